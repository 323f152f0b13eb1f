"""Concrete locally convex spaces given by directed countable seminorm
families, and countable dense subsets of function images.

Vectors are stored as finite coordinate arrays plus a tail descriptor.
Every family evaluates seminorm ``k`` (1-based) on whole stacks of
coordinate arrays at once via :meth:`SeminormFamily.eval_coords`, which is
what the Bochner machinery relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import UnknownSpaceError

__all__ = [
    "ZeroTail",
    "GeometricTail",
    "FunctionTable",
    "LcsVector",
    "SeminormFamily",
    "Euclidean",
    "FrechetSequences",
    "ContinuousOn01",
    "WeightedL1",
    "DirectedFamily",
    "directed",
    "make_space",
    "CountableDenseSet",
    "CurveDenseSet",
    "dense_from_image",
    "van_der_corput",
]


@dataclass(frozen=True)
class ZeroTail:
    """All coordinates beyond the stored ones vanish."""


@dataclass(frozen=True)
class GeometricTail:
    """``|x_{L+i}| <= bound * ratio**i`` for ``i >= 1``."""

    ratio: float
    bound: float

    def __post_init__(self):
        if not 0 <= self.ratio < 1 or self.bound < 0:
            raise ValueError("geometric tail needs 0 <= ratio < 1 and bound >= 0")


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Coordinates are values at ``nodes``, linearly interpolated."""

    nodes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))


def _merge_tails(a, b):
    if isinstance(a, FunctionTable) or isinstance(b, FunctionTable):
        ta = a if isinstance(a, FunctionTable) else b
        tb = b if isinstance(b, FunctionTable) else a
        if isinstance(tb, FunctionTable) and not np.array_equal(ta.nodes, tb.nodes):
            raise ValueError("function tables on different grids")
        return ta
    if isinstance(a, ZeroTail):
        return b
    if isinstance(b, ZeroTail):
        return a
    return GeometricTail(max(a.ratio, b.ratio), a.bound + b.bound)


@dataclass(frozen=True, eq=False)
class LcsVector:
    coords: np.ndarray
    tail: object = ZeroTail()

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords))
        if not np.iscomplexobj(c):
            c = c.astype(float)
        object.__setattr__(self, "coords", c)

    def _pad(self, n):
        if self.coords.size >= n:
            return self.coords
        return np.concatenate([self.coords, np.zeros(n - self.coords.size, self.coords.dtype)])

    def __add__(self, other: "LcsVector") -> "LcsVector":
        n = max(self.coords.size, other.coords.size)
        return LcsVector(self._pad(n) + other._pad(n), _merge_tails(self.tail, other.tail))

    def __neg__(self) -> "LcsVector":
        return LcsVector(-self.coords, self.tail)

    def __sub__(self, other: "LcsVector") -> "LcsVector":
        return self + (-other)

    def __mul__(self, c) -> "LcsVector":
        tail = self.tail
        if isinstance(tail, GeometricTail):
            tail = GeometricTail(tail.ratio, abs(c) * tail.bound)
        return LcsVector(c * self.coords, tail)

    __rmul__ = __mul__

    def allclose(self, other: "LcsVector", atol: float = 1e-12) -> bool:
        n = max(self.coords.size, other.coords.size)
        return bool(np.allclose(self._pad(n), other._pad(n), rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"LcsVector({np.array2string(self.coords, threshold=8)}, {type(self.tail).__name__})"


def _coords(v) -> np.ndarray:
    return v.coords if isinstance(v, LcsVector) else np.atleast_1d(np.asarray(v))


class SeminormFamily:
    """A directed (pointwise increasing in ``k``) seminorm family."""

    space_id: str = ""
    count: float = 1
    # "euclidean": p_k is sqrt of a quadratic form; "other": anything else
    shape: str = "other"

    def eval_coords(self, k: int, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, k: int) -> None:
        if k < 1 or k > self.count:
            raise IndexError(f"seminorm index {k} outside 1..{self.count}")

    def eval(self, k: int, v) -> float:
        self._check(k)
        return float(self.eval_coords(k, _coords(v)[None, :])[0])

    def tail_bound(self, k: int, v) -> float:
        """Upper bound for what the unstored tail of ``v`` adds to ``eval``."""
        return 0.0

    def quadratic_form(self, k: int, dim: int) -> np.ndarray:
        """``W`` with ``p_k(x)**2 = x^T W x`` (only for euclidean shapes)."""
        raise NotImplementedError

    def chain(self, depth: int) -> list[int]:
        return list(range(1, int(min(depth, self.count)) + 1))

    def vector(self, coords) -> LcsVector:
        return LcsVector(coords)


@dataclass(frozen=True)
class Euclidean(SeminormFamily):
    """``R^d`` (or ``C^d``) with the Euclidean norm as its only seminorm."""

    d: int
    space_id: str = "euclidean"
    count: int = 1
    shape: str = "euclidean"

    def eval_coords(self, k, X):
        A = np.abs(np.asarray(X))
        if A.shape[-1] == 1:
            return A[..., 0]
        # scale by the largest entry so tiny and huge vectors keep full precision
        m = np.max(A, axis=-1, initial=0.0)
        safe = np.where(m > 0, m, 1.0)
        return m * np.sqrt(np.sum((A / safe[..., None]) ** 2, axis=-1))

    def quadratic_form(self, k, dim):
        return np.eye(dim)


@dataclass(frozen=True)
class WeightedL1(SeminormFamily):
    """``R^d`` with ``sum_i w_i |x_i|``, weights positive."""

    weights: tuple
    space_id: str = "weighted-l1"
    count: int = 1

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or min(w) <= 0:
            raise ValueError("weights must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return len(self.weights)

    @property
    def shape(self) -> str:
        return "euclidean" if self.d == 1 else "other"

    def eval_coords(self, k, X):
        X = np.asarray(X)
        w = np.asarray(self.weights)[: X.shape[-1]]
        return np.abs(X[..., : w.size]) @ w

    def quadratic_form(self, k, dim):
        if self.d != 1:
            raise NotImplementedError
        return np.array([[self.weights[0] ** 2]])


@dataclass(frozen=True)
class FrechetSequences(SeminormFamily):
    """All sequences with ``p_k(x) = max_{j<=k} |x_j|`` (pointwise
    convergence topology)."""

    space_id: str = "frechet-sequences"
    count: float = math.inf

    def eval_coords(self, k, X):
        X = np.abs(np.asarray(X))
        if X.shape[-1] == 0:
            return np.zeros(X.shape[:-1])
        return np.max(X[..., : int(k)], axis=-1)

    def tail_bound(self, k, v):
        if not isinstance(v, LcsVector) or int(k) <= v.coords.size:
            return 0.0
        if isinstance(v.tail, GeometricTail):
            return v.tail.bound * v.tail.ratio
        return 0.0


@dataclass(frozen=True)
class ContinuousOn01(SeminormFamily):
    """``C[0,1]`` with the sup norm; vectors are piecewise-linear tables on
    a fixed grid, for which the sup is exactly the largest node value."""

    nodes: int = 1025
    space_id: str = "continuous01"
    count: int = 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nodes)

    def eval_coords(self, k, X):
        return np.max(np.abs(np.asarray(X)), axis=-1)

    def vector(self, coords) -> LcsVector:
        c = np.asarray(coords)
        if c.shape[-1] != self.nodes:
            raise ValueError(f"C[0,1] vectors need {self.nodes} node values")
        return LcsVector(c, FunctionTable(self.grid))

    def function(self, fn: Callable) -> LcsVector:
        """Tabulate a vectorized callable on the grid."""
        return self.vector(np.asarray(fn(self.grid), dtype=float))

    def sup(self, fn, lipschitz: float | None = None, refine: int = 64) -> tuple[float, float]:
        """Sup norm of a function on [0,1] and an error bar.

        Numpy polynomials are exact (critical points).  Other callables are
        sampled on a refined grid and padded by ``lipschitz * h / 2``.
        """
        if isinstance(fn, np.polynomial.Polynomial):
            crit = fn.deriv().roots() if fn.degree() > 1 else np.array([])
            crit = np.real(crit[np.isreal(crit)])
            pts = np.concatenate([[0.0, 1.0], crit[(crit >= 0) & (crit <= 1)]])
            return float(np.max(np.abs(fn(pts)))), 0.0
        m = (self.nodes - 1) * refine + 1
        x = np.linspace(0.0, 1.0, m)
        val = float(np.max(np.abs(fn(x))))
        pad = 0.0 if lipschitz is None else lipschitz * (1.0 / (m - 1)) / 2
        return val, pad


@dataclass(frozen=True)
class DirectedFamily(SeminormFamily):
    """``q_n = max(p_1, ..., p_n)`` for an arbitrary finite list of
    vectorized seminorms."""

    seminorms: tuple
    space_id: str = "directed"

    @property
    def count(self) -> int:
        return len(self.seminorms)

    def eval_coords(self, k, X):
        return np.max(np.stack([p(X) for p in self.seminorms[: int(k)]]), axis=0)


def directed(seminorms: Sequence[Callable]) -> DirectedFamily:
    """Present seminorms ``p_1, p_2, ...`` in increasing form."""
    if not seminorms:
        raise ValueError("need at least one seminorm")
    return DirectedFamily(tuple(seminorms))


def make_space(spec) -> SeminormFamily:
    """Build a family from a descriptor such as ``{"kind": "euclidean",
    "dim": 2}``, ``{"kind": "frechet-sequences"}``, ``{"kind":
    "continuous01"}`` or ``{"kind": "weighted-l1", "weights": [1, 2]}``."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "euclidean":
            return Euclidean(int(spec.pop("dim")))
        if kind == "frechet-sequences":
            return FrechetSequences()
        if kind == "continuous01":
            return ContinuousOn01(int(spec.pop("nodes", 1025)))
        if kind == "weighted-l1":
            return WeightedL1(tuple(spec.pop("weights")))
    except KeyError as exc:
        raise UnknownSpaceError(f"space {kind!r} is missing field {exc.args[0]!r}") from None
    raise UnknownSpaceError(f"unknown space kind {kind!r}")


def van_der_corput(n: np.ndarray) -> np.ndarray:
    """Order ``0, 1, 1/2, 1/4, 3/4, 1/8, ...`` for ``n = 1, 2, 3, ...``: the
    first ``2**m + 1`` values are exactly the dyadic grid of step
    ``2**-m``."""
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape)
    out[n == 2] = 1.0
    big = n >= 3
    k = n[big] - 2  # 1, 2, 3, ... -> radical inverse
    val = np.zeros(k.shape)
    base = 0.5
    while np.any(k):
        val += (k & 1) * base
        k = k >> 1
        base /= 2
    out[big] = val
    return out


@dataclass(frozen=True, eq=False)
class CountableDenseSet:
    """Enumeration ``c_1, c_2, ...`` of finitely many stored points,
    cycling once exhausted."""

    points: np.ndarray
    order: np.ndarray
    provenance: str = "image-points"
    tail: object = ZeroTail()

    def centers(self, n: int) -> np.ndarray:
        """Coordinates of ``c_1..c_n`` as an ``(n, d)`` array."""
        idx = self.order[np.arange(int(n)) % self.order.size]
        return self.points[idx]

    def enumerate(self, n: int) -> LcsVector:
        if n < 1:
            raise ValueError("enumeration starts at 1")
        return LcsVector(self.centers(n)[-1], self.tail)

    def first(self, n: int) -> list[LcsVector]:
        return [LcsVector(c, self.tail) for c in self.centers(n)]

    @property
    def distinct(self) -> int:
        return int(self.order.size)


@dataclass(frozen=True, eq=False)
class CurveDenseSet:
    """Points ``f(t_n)`` of a curve, ``t_n`` equally spaced in arc length in
    van der Corput order; the first ``2**m + 1`` form a grid of arc step
    ``length / 2**m``."""

    curve: Callable[[np.ndarray], np.ndarray]
    arc_nodes: np.ndarray
    arc_length: np.ndarray
    provenance: str = "image-points"

    @classmethod
    def from_curve(cls, curve, speed, pieces=(0.0, 1.0), m: int = 4096) -> "CurveDenseSet":
        """Arc-length table from Gauss-Legendre on ``m`` cells per piece."""
        g, w = np.polynomial.legendre.leggauss(16)
        nodes, cum = [np.array([pieces[0]])], [np.array([0.0])]
        total = 0.0
        for a, b in zip(pieces[:-1], pieces[1:]):
            x = np.linspace(a, b, m + 1)
            h = np.diff(x)
            mid = (x[:-1] + x[1:]) / 2
            pts = mid[:, None] + h[:, None] / 2 * g[None, :]
            cell = np.sum(speed(pts) * w[None, :], axis=1) * h / 2
            nodes.append(x[1:])
            cum.append(total + np.cumsum(cell))
            total += float(np.sum(cell))
        return cls(curve, np.concatenate(nodes), np.concatenate(cum))

    @property
    def length(self) -> float:
        return float(self.arc_length[-1])

    def parameters(self, n: int) -> np.ndarray:
        s = van_der_corput(np.arange(1, int(n) + 1)) * self.length
        return np.interp(s, self.arc_length, self.arc_nodes)

    def centers(self, n: int) -> np.ndarray:
        return np.atleast_2d(self.curve(self.parameters(n)).T).reshape(int(n), -1)

    def enumerate(self, n: int) -> LcsVector:
        return LcsVector(self.centers(n)[-1])


def dense_from_image(points, k: int, family: SeminormFamily, eps: float | None = None) -> CountableDenseSet:
    """A countable subset of the given image points whose ``p_k``-closure
    contains them all.

    Points are ordered by farthest-point traversal, so every prefix is a
    good net; exact duplicates are dropped.  With ``eps`` the enumeration
    stops at the first prefix whose covering radius is at most ``eps``
    (a greedy ``eps``-net) and cycles through it.
    """
    pts = [_coords(p) for p in points] if not isinstance(points, np.ndarray) else list(points)
    if len(pts) == 0:
        raise ValueError("dense_from_image needs at least one point")
    tail = points[0].tail if isinstance(points[0], LcsVector) else ZeroTail()
    width = max(p.size for p in pts)
    P = np.zeros((len(pts), width), dtype=np.result_type(*pts, float))
    for i, p in enumerate(pts):
        P[i, : p.size] = p
    order = [0]
    dist = family.eval_coords(k, P - P[0])
    while True:
        j = int(np.argmax(dist))
        radius = float(dist[j])
        if radius <= 0 or (eps is not None and radius <= eps):
            break
        order.append(j)
        dist = np.minimum(dist, family.eval_coords(k, P - P[j]))
    return CountableDenseSet(P, np.asarray(order, dtype=np.int64), "image-points", tail)
