"""Bounded Hilbert-space operators in computable forms.

Indices are 0-based: position ``i`` carries the 1-based sequence index
``j = i + 1``.  Every form can produce arbitrary blocks of matrix entries;
forms that are diagonal beyond some index also expose that diagonal tail
so that minors can be tail-corrected and trace norms bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from ..errors import OperatorFormError
from ..sequences import EigenSequence

__all__ = [
    "OperatorSpec",
    "Diagonal",
    "DiagonalPlusFiniteRank",
    "EntryOracle",
    "IdentityMinus",
    "BlockDiag",
    "Matrix",
    "identity",
    "rank_one",
]


def _idx(a) -> np.ndarray:
    return np.asarray(a, dtype=np.int64).ravel()


class OperatorSpec:
    """Common interface; subclasses are frozen dataclasses."""

    size: int | None = None
    label: str = ""

    @property
    def normal(self) -> bool:
        return False

    def entries(self, rows, cols) -> np.ndarray:
        raise NotImplementedError

    def diagonal(self, idx) -> np.ndarray:
        idx = _idx(idx)
        return np.array([self.entries([i], [i])[0, 0] for i in idx])

    def norm_bound(self) -> float:
        raise NotImplementedError

    def diag_tail(self):
        """``(seq, offset)`` when the operator is diagonal from position
        ``offset`` on with ``T[i, i] = seq.at(i - offset)``, else ``None``."""
        return None

    def as_diagonal(self) -> EigenSequence | None:
        t = self.diag_tail()
        if t is not None and t[1] == 0 and self.size is None:
            return t[0]
        return None

    @property
    def has_fast_diagonal(self) -> bool:
        return self.as_diagonal() is not None

    def trace_tail(self, n: int) -> float:
        """Upper bound for the trace norm of everything outside the leading
        ``n x n`` corner (``inf`` if unknown)."""
        if self.size is not None and n >= self.size:
            return 0.0
        t = self.diag_tail()
        if t is None or n < t[1]:
            return math.inf
        return t[0].abs_tail(n - t[1])

    def tail_trace(self, n: int):
        """``sum_{i >= n} T[i, i]`` when known, else ``None``."""
        if self.size is not None and n >= self.size:
            return 0.0
        t = self.diag_tail()
        if t is None or n < t[1]:
            return None
        return t[0].tail_sum(n - t[1])

    def tail_logdet(self, n: int):
        """``sum_{i >= n} log T[i, i]`` when known, else ``None``."""
        if self.size is not None and n >= self.size:
            return 0.0
        t = self.diag_tail()
        if t is None or n < t[1]:
            return None
        return t[0].log_tail(n - t[1])

    def dense(self, n: int) -> np.ndarray:
        """Leading ``n x n`` truncation."""
        r = np.arange(n)
        return self.entries(r, r)

    def __str__(self) -> str:
        return self.label or type(self).__name__


@dataclass(frozen=True)
class Diagonal(OperatorSpec):
    """``T e_i = seq_i e_i``; ``size=None`` means infinite dimensional."""

    seq: EigenSequence
    size: int | None = None
    label: str = ""

    @property
    def normal(self) -> bool:
        return True

    def entries(self, rows, cols):
        rows, cols = _idx(rows), _idx(cols)
        vals = self.diagonal(rows)
        out = np.zeros((rows.size, cols.size), dtype=vals.dtype)
        hit = rows[:, None] == cols[None, :]
        r, c = np.nonzero(hit)
        out[r, c] = vals[r]
        return out

    def diagonal(self, idx):
        idx = _idx(idx)
        if self.size is not None and np.any(idx >= self.size):
            raise IndexError("index beyond operator size")
        return self.seq.at(idx)

    def norm_bound(self) -> float:
        if self.size is not None:
            return float(np.max(np.abs(self.seq.at(np.arange(self.size))), initial=0.0))
        return self.seq.sup_abs()

    def diag_tail(self):
        return (self.seq, 0)


def identity(size: int | None = None) -> Diagonal:
    return Diagonal(EigenSequence.constant(1.0), size, "identity")


@dataclass(frozen=True, eq=False)
class DiagonalPlusFiniteRank(OperatorSpec):
    """``diag(seq) + U V^*`` with ``U, V`` of shape ``(m, r)``, zero beyond
    row ``m``."""

    seq: EigenSequence
    U: np.ndarray
    V: np.ndarray
    label: str = ""
    size: int | None = None

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.U))
        V = np.atleast_2d(np.asarray(self.V))
        if U.shape != V.shape:
            raise OperatorFormError("finite-rank factors must have equal shapes")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def m(self) -> int:
        return self.U.shape[0]

    def _rows(self, A, idx):
        out = np.zeros((idx.size, A.shape[1]), dtype=A.dtype)
        ok = idx < self.m
        out[ok] = A[idx[ok]]
        return out

    def entries(self, rows, cols):
        rows, cols = _idx(rows), _idx(cols)
        low = self._rows(self.U, rows) @ self._rows(self.V, cols).conj().T
        return Diagonal(self.seq).entries(rows, cols) + low

    def diagonal(self, idx):
        idx = _idx(idx)
        return self.seq.at(idx) + np.sum(self._rows(self.U, idx) * self._rows(self.V, idx).conj(), axis=1)

    def norm_bound(self) -> float:
        low = float(np.sum(np.linalg.norm(self.U, axis=0) * np.linalg.norm(self.V, axis=0)))
        return self.seq.sup_abs() + low

    def diag_tail(self):
        return (self.seq.drop(self.m), self.m)

    def tail_trace(self, n):
        if n < self.m:
            return None
        return self.seq.tail_sum(n)

    def tail_logdet(self, n):
        if n < self.m:
            return None
        return self.seq.log_tail(n)

    def trace_tail(self, n):
        if n < self.m:
            return math.inf
        return self.seq.abs_tail(n)


def rank_one(s: float, u, v=None) -> DiagonalPlusFiniteRank:
    """``s * u v^*`` on an infinite-dimensional space."""
    u = np.asarray(u, dtype=float).reshape(-1, 1)
    v = u if v is None else np.asarray(v, dtype=float).reshape(-1, 1)
    return DiagonalPlusFiniteRank(EigenSequence(), s * u, v, label=f"rank-one {s}")


@dataclass(frozen=True, eq=False)
class EntryOracle(OperatorSpec):
    """Entries from a vectorized callable ``entry(i, j)`` (0-based arrays).

    ``tail_bound(n)`` must bound the trace norm outside the leading
    ``n x n`` corner; without it sections cannot carry an error budget.
    """

    entry: Callable
    tail_bound: Callable[[int], float] | None = None
    norm: float | None = None
    size: int | None = None
    is_normal: bool = False
    label: str = ""

    @property
    def normal(self) -> bool:
        return self.is_normal

    def entries(self, rows, cols):
        rows, cols = _idx(rows), _idx(cols)
        return np.asarray(self.entry(rows[:, None], cols[None, :])) * np.ones((rows.size, cols.size))

    def diagonal(self, idx):
        idx = _idx(idx)
        return np.asarray(self.entry(idx, idx)) * np.ones(idx.size)

    def norm_bound(self) -> float:
        if self.norm is None:
            raise OperatorFormError("entry oracle has no declared norm bound")
        return float(self.norm)

    def trace_tail(self, n):
        if self.size is not None and n >= self.size:
            return 0.0
        if self.tail_bound is None:
            return math.inf
        return float(self.tail_bound(n))


@dataclass(frozen=True, eq=False)
class Matrix(OperatorSpec):
    """A finite matrix acting on ``C^n``."""

    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.data))
        if a.shape[0] != a.shape[1]:
            raise OperatorFormError("matrix operator must be square")
        object.__setattr__(self, "data", a)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def normal(self) -> bool:
        a = self.data
        return bool(np.allclose(a @ a.conj().T, a.conj().T @ a, atol=1e-12))

    def entries(self, rows, cols):
        return self.data[np.ix_(_idx(rows), _idx(cols))]

    def diagonal(self, idx):
        return np.diagonal(self.data)[_idx(idx)]

    def norm_bound(self) -> float:
        return float(np.linalg.norm(self.data, 2)) if self.data.size else 0.0

    def diag_tail(self):
        if self.data.size and not np.array_equal(self.data, np.diag(np.diagonal(self.data))):
            return None
        return (EigenSequence(tuple(np.diagonal(self.data))), 0)


@dataclass(frozen=True)
class IdentityMinus(OperatorSpec):
    """``1 - T``."""

    inner: OperatorSpec
    label: str = ""

    @property
    def size(self):
        return self.inner.size

    @property
    def normal(self) -> bool:
        return self.inner.normal

    @cached_property
    def _tail(self):
        t = self.inner.diag_tail()
        if t is None:
            return None
        return (t[0].one_minus(), t[1])

    def diag_tail(self):
        return self._tail

    def normalized(self) -> OperatorSpec:
        seq = self.inner.as_diagonal()
        if seq is not None:
            return Diagonal(self._tail[0], self.size, self.label or f"1-({self.inner})")
        return self

    def entries(self, rows, cols):
        rows, cols = _idx(rows), _idx(cols)
        return (rows[:, None] == cols[None, :]).astype(float) - self.inner.entries(rows, cols)

    def diagonal(self, idx):
        return 1.0 - self.inner.diagonal(idx)

    def norm_bound(self) -> float:
        return 1.0 + self.inner.norm_bound()

    def trace_tail(self, n):
        if self.size is not None and n >= self.size:
            return 0.0
        t = self._tail
        if t is None or n < t[1]:
            return math.inf
        return t[0].abs_tail(n - t[1])


@dataclass(frozen=True, eq=False)
class BlockDiag(OperatorSpec):
    """Finite square blocks followed by an optional infinite tail operator."""

    blocks: tuple
    tail: OperatorSpec | None = None
    label: str = ""

    def __post_init__(self):
        blocks = []
        for b in self.blocks:
            if isinstance(b, OperatorSpec):
                if b.size is None:
                    raise OperatorFormError("only the tail block may be infinite")
                blocks.append(b)
            else:
                blocks.append(Matrix(np.atleast_2d(np.asarray(b))))
        object.__setattr__(self, "blocks", tuple(blocks))
        if self.tail is not None and self.tail.size is not None:
            raise OperatorFormError("tail block must be infinite dimensional")

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([b.size for b in self.blocks])]).astype(np.int64)

    @property
    def head_size(self) -> int:
        return int(self.offsets[-1])

    @property
    def size(self):
        return None if self.tail is not None else self.head_size

    @property
    def normal(self) -> bool:
        return all(b.normal for b in self.blocks) and (self.tail is None or self.tail.normal)

    def normalized(self) -> OperatorSpec:
        """A plain :class:`Diagonal` when every block is diagonal."""
        heads = []
        for b in self.blocks:
            t = b.diag_tail()
            if t is None:
                return self
            heads.extend(b.diagonal(np.arange(b.size)))
        if self.tail is None:
            return Diagonal(EigenSequence(tuple(heads)), self.head_size, self.label)
        seq = self.tail.as_diagonal()
        if seq is None:
            return self
        return Diagonal(seq.prepend(heads), None, self.label)

    def _locate(self, idx):
        off = self.offsets
        blk = np.searchsorted(off, idx, side="right") - 1
        return blk, idx - off[np.minimum(blk, len(off) - 1)]

    def entries(self, rows, cols):
        rows, cols = _idx(rows), _idx(cols)
        out = np.zeros((rows.size, cols.size), dtype=complex)
        rb, rl = self._locate(rows)
        cb, cl = self._locate(cols)
        nb = len(self.blocks)
        for b in np.unique(rb):
            ri = np.nonzero(rb == b)[0]
            ci = np.nonzero(cb == b)[0]
            if ci.size == 0:
                continue
            op = self.blocks[b] if b < nb else self.tail
            if op is None:
                raise IndexError("index beyond operator size")
            out[np.ix_(ri, ci)] = op.entries(rl[ri], cl[ci])
        return out.real.copy() if not np.any(out.imag) else out

    def diagonal(self, idx):
        idx = _idx(idx)
        out = np.zeros(idx.size, dtype=complex)
        b, loc = self._locate(idx)
        nb = len(self.blocks)
        for k in np.unique(b):
            sel = b == k
            op = self.blocks[k] if k < nb else self.tail
            out[sel] = op.diagonal(loc[sel])
        return out.real.copy() if not np.any(out.imag) else out

    def norm_bound(self) -> float:
        vals = [b.norm_bound() for b in self.blocks]
        if self.tail is not None:
            vals.append(self.tail.norm_bound())
        return max(vals, default=0.0)

    def diag_tail(self):
        if self.tail is None:
            return None
        t = self.tail.diag_tail()
        if t is None:
            return None
        return (t[0], t[1] + self.head_size)
