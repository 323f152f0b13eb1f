"""Frames, finite sections and the scalar invariants taken from them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hessenberg

from ..errors import FrameError, TruncationError
from .operators import OperatorSpec

__all__ = [
    "CoordinateFrame",
    "DenseFrame",
    "FiniteSection",
    "compress",
    "trace_minor",
    "det_minor",
    "trace_norm",
    "exterior_trace",
    "exterior_traces",
    "charpoly",
    "principal_minor_sums",
]

_GRAM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CoordinateFrame:
    """Standard basis vectors ``e_i`` for the given 0-based indices."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or np.unique(idx).size != idx.size):
            raise FrameError("coordinate frame indices must be distinct and nonnegative")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def first(cls, n: int) -> "CoordinateFrame":
        return cls(np.arange(n))

    @property
    def n(self) -> int:
        return int(self.indices.size)

    @property
    def horizon(self) -> int:
        return int(self.indices.max()) + 1 if self.n else 0

    def vectors(self, N: int | None = None) -> np.ndarray:
        N = self.horizon if N is None else N
        out = np.zeros((N, self.n))
        out[self.indices, np.arange(self.n)] = 1.0
        return out


@dataclass(frozen=True, eq=False)
class DenseFrame:
    """Orthonormal columns ``V`` (shape ``N x n``) in the first ``N``
    coordinates."""

    V: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V))
        if V.shape[1]:
            gram = V.conj().T @ V
            err = float(np.linalg.norm(gram - np.eye(V.shape[1])))
            if err > _GRAM_TOL:
                raise FrameError(f"frame is not orthonormal (Gram error {err:.3g})")
        object.__setattr__(self, "V", V)

    @property
    def n(self) -> int:
        return int(self.V.shape[1])

    @property
    def horizon(self) -> int:
        nz = np.nonzero(np.any(self.V != 0, axis=1))[0]
        return int(nz[-1]) + 1 if nz.size else 0

    def vectors(self, N: int | None = None) -> np.ndarray:
        N = self.V.shape[0] if N is None else N
        if N < self.V.shape[0]:
            if self.horizon > N:
                raise FrameError("truncation dimension cuts through the frame")
            return self.V[:N]
        out = np.zeros((N, self.n), dtype=self.V.dtype)
        out[: self.V.shape[0]] = self.V
        return out


@dataclass(frozen=True, eq=False)
class FiniteSection:
    """``T_F`` in the frame basis, stored as a diagonal when it is one."""

    diag: np.ndarray | None
    dense: np.ndarray | None
    source: str = ""
    frame: object = None
    tail_bound: float = 0.0

    @property
    def n(self) -> int:
        return int(self.diag.size if self.diag is not None else self.dense.shape[0])

    @property
    def is_diagonal(self) -> bool:
        return self.diag is not None

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) if self.diag is not None else self.dense

    def adjoint(self) -> "FiniteSection":
        if self.diag is not None:
            return FiniteSection(self.diag.conj(), None, f"({self.source})*", self.frame, self.tail_bound)
        return FiniteSection(None, self.dense.conj().T, f"({self.source})*", self.frame, self.tail_bound)

    @classmethod
    def of(cls, matrix) -> "FiniteSection":
        return cls(None, np.atleast_2d(np.asarray(matrix)))


def _required_dim(T: OperatorSpec, tol: float, start: int) -> int | None:
    n = max(start, 1)
    while n <= 2**22:
        if T.trace_tail(n) <= tol:
            return n
        n *= 2
    return None


def compress(T: OperatorSpec, F, N: int | None = None, tol: float | None = None) -> FiniteSection:
    """``V^* T_N V`` for the frame ``F`` inside the first ``N`` coordinates.

    The recorded tail bound is the trace norm of ``T`` outside the
    ``N x N`` corner.  With ``tol`` given, a corner too small for that
    budget raises :class:`TruncationError` carrying the required ``N``.
    """
    h = F.horizon
    N = h if N is None else int(N)
    if N < F.n or N < h:
        raise TruncationError(f"truncation dimension {N} smaller than frame horizon {max(h, F.n)}", max(h, F.n))
    if T.size is not None and N > T.size:
        raise TruncationError(f"truncation dimension {N} exceeds operator size {T.size}", T.size)
    tail = T.trace_tail(N)
    if tol is not None and not tail <= tol:
        raise TruncationError(
            f"trace-norm tail {tail:.3g} beyond N={N} exceeds {tol:.3g}", _required_dim(T, tol, N)
        )
    if isinstance(F, CoordinateFrame):
        idx = F.indices
        if T.has_fast_diagonal:
            return FiniteSection(T.diagonal(idx), None, str(T), F, tail)
        return FiniteSection(None, T.entries(idx, idx), str(T), F, tail)
    V = F.vectors(N)
    rows = np.nonzero(np.any(V != 0, axis=1))[0]
    Vr = V[rows]
    if T.has_fast_diagonal:
        M = (Vr.conj().T * T.diagonal(rows)) @ Vr
    else:
        M = Vr.conj().T @ T.entries(rows, rows) @ Vr
    return FiniteSection(None, M, str(T), F, tail)


def trace_minor(S: FiniteSection):
    """Sum of the diagonal entries of the section."""
    v = np.sum(S.diag) if S.is_diagonal else np.trace(S.dense)
    return v.item() if hasattr(v, "item") else v


def det_minor(S: FiniteSection):
    """Determinant of the section (LU with partial pivoting; diagonal
    sections via a sum of logarithms so long products neither under- nor
    overflow prematurely)."""
    if S.n == 0:
        return 1.0
    if not S.is_diagonal:
        return np.linalg.det(S.dense).item()
    d = S.diag
    if np.any(d == 0):
        return 0.0 * d[0]
    if np.isrealobj(d):
        sign = -1.0 if np.count_nonzero(d < 0) % 2 else 1.0
        with np.errstate(over="ignore"):
            return sign * float(np.exp(np.sum(np.log(np.abs(d)))))
    with np.errstate(over="ignore", invalid="ignore"):
        return complex(np.exp(np.sum(np.log(d.astype(complex)))))


def trace_norm(S: FiniteSection) -> float:
    """Sum of singular values."""
    if S.is_diagonal:
        return float(np.sum(np.abs(S.diag)))
    return float(np.sum(np.linalg.svd(S.dense, compute_uv=False)))


def charpoly(A) -> np.ndarray:
    """Coefficients ``c_0 = 1, c_1, ..., c_n`` of ``det(x I - A)``
    (highest power first), by reduction to Hessenberg form and the
    La Budde recurrence on its leading principal submatrices."""
    A = np.atleast_2d(np.asarray(A))
    n = A.shape[0]
    if n == 0:
        return np.ones(1)
    H = hessenberg(A)
    dtype = H.dtype
    # p[i] = char poly of the leading i x i block, stored as length-(i+1) arrays
    p = [np.ones(1, dtype=dtype)]
    for i in range(n):
        # (x - h_ii) p_{i}
        nxt = np.concatenate([p[i], [0]]) - H[i, i] * np.concatenate([[0], p[i]])
        beta = 1.0
        for m in range(1, i + 1):
            beta = beta * H[i - m + 1, i - m]
            coef = H[i - m, i] * beta
            if coef != 0:
                nxt[m + 1:] -= coef * p[i - m]
        p.append(nxt)
    return p[n]


def _esym_diag(d: np.ndarray, kmax: int) -> np.ndarray:
    e = np.zeros(kmax + 1, dtype=np.result_type(d, float))
    e[0] = 1.0
    for x in d:
        e[1:] = e[1:] + x * e[:-1]
    return e


def exterior_traces(S, k_max: int | None = None) -> np.ndarray:
    """``tr(wedge^k S)`` for ``k = 0..k_max``: the elementary symmetric
    polynomials of the eigenvalues.  Entries with ``k > n`` are zero."""
    if not isinstance(S, FiniteSection):
        S = FiniteSection.of(S)
    n = S.n
    k_max = n if k_max is None else int(k_max)
    if S.is_diagonal:
        return _esym_diag(S.diag, k_max)
    c = charpoly(S.dense)
    e = np.zeros(k_max + 1, dtype=c.dtype)
    k = min(n, k_max)
    signs = (-1.0) ** np.arange(k + 1)
    e[: k + 1] = signs * c[: k + 1]
    return e


def exterior_trace(S, k: int):
    """``tr(wedge^k S)``; zero for ``k > n`` by convention."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    v = exterior_traces(S, k)[k]
    return v.item() if hasattr(v, "item") else v


def principal_minor_sums(A) -> np.ndarray:
    """Sums of all ``k x k`` principal minors by exhaustive enumeration
    (exponential cost; an independent check for small matrices)."""
    A = np.atleast_2d(np.asarray(A))
    n = A.shape[0]
    out = np.zeros(n + 1, dtype=np.result_type(A, float))
    out[0] = 1.0
    for k in range(1, n + 1):
        out[k] = sum(np.linalg.det(A[np.ix_(c, c)]) for c in itertools.combinations(range(n), k))
    return out
