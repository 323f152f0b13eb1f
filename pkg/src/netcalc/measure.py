"""Measure spaces, measurable vector-valued functions and simple functions.

Two kinds of space are supported: countable discrete spaces ``{1, 2, ...}``
with point weights, and ``[0, 1]`` with Lebesgue measure.  Measurable sets
are finite/cofinite point sets and finite unions of intervals
respectively; endpoints of intervals are null and ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PossiblyInfiniteError, SetDescriptorError
from .lcspace import LcsVector, ZeroTail
from .sequences import EigenSequence

__all__ = [
    "DiscreteSpace",
    "Interval01",
    "PointSet",
    "IntervalSet",
    "measure_of",
    "scalar_integral",
    "gauss_legendre",
    "MeasurableFn",
    "PiecewisePolynomial",
    "SimpleFunction",
]


# ------------------------------------------------------------------ spaces


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """Points ``1..m`` (finite tuple of weights) or ``1, 2, ...`` (weights
    given as an :class:`EigenSequence` with a computable tail)."""

    weights: object
    kind: str = field(default="discrete", init=False)

    def __post_init__(self):
        w = self.weights
        if isinstance(w, EigenSequence):
            head = np.asarray(w.values(np.arange(1, 4097)))
            if np.any(np.real(head) < 0) or np.iscomplexobj(head) or w.const != 0:
                raise ValueError("weights must be nonnegative and tend to zero")
        else:
            w = tuple(float(x) for x in w)
            if any(x < 0 for x in w):
                raise ValueError("weights must be nonnegative")
            object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int | None:
        return None if isinstance(self.weights, EigenSequence) else len(self.weights)

    def weight(self, x) -> np.ndarray:
        """Weights at 1-based points."""
        x = np.asarray(x, dtype=np.int64)
        if self.size is None:
            return np.asarray(self.weights.values(x), dtype=float)
        if np.any((x < 1) | (x > self.size)):
            raise SetDescriptorError(f"points must lie in 1..{self.size}")
        return np.asarray(self.weights, dtype=float)[x - 1]

    def tail_weight(self, m: int) -> float:
        """``sum_{x > m} w_x``."""
        if self.size is None:
            return float(self.weights.abs_tail(int(m)))
        return float(sum(self.weights[int(m):]))

    @property
    def total(self) -> float:
        return self.tail_weight(0)

    def truncation(self, tol: float, scale: float = 1.0, cap: int = 2**22) -> int:
        """Smallest ``m`` with ``scale * tail_weight(m) <= tol``."""
        if self.size is not None:
            return self.size
        m = 1
        while scale * self.tail_weight(m) > tol:
            m *= 2
            if m > cap:
                raise PossiblyInfiniteError(f"weight tail stays above {tol:.3g} beyond {cap} points")
        lo = m // 2
        while m - lo > 1:
            mid = (lo + m) // 2
            if scale * self.tail_weight(mid) <= tol:
                m = mid
            else:
                lo = mid
        return m


@dataclass(frozen=True)
class Interval01:
    """``[0, 1]`` with Lebesgue measure; partitions are dyadic and nested."""

    kind: str = field(default="interval01", init=False)
    total: float = field(default=1.0, init=False)
    size = None

    @staticmethod
    def partition(level: int) -> np.ndarray:
        return np.linspace(0.0, 1.0, 2**int(level) + 1)


# ---------------------------------------------------------- set descriptors


@dataclass(frozen=True)
class PointSet:
    """``indices`` (1-based) together with ``{x >= cofinite_from}``."""

    indices: frozenset = frozenset()
    cofinite_from: int | None = None

    def __post_init__(self):
        idx = frozenset(int(i) for i in self.indices)
        if any(i < 1 for i in idx):
            raise SetDescriptorError("point indices are 1-based")
        c = self.cofinite_from
        if c is not None:
            c = int(c)
            if c < 1:
                raise SetDescriptorError("cofinite_from must be >= 1")
            idx = frozenset(i for i in idx if i < c)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "cofinite_from", c)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        inside = np.isin(x, np.fromiter(self.indices, dtype=np.int64, count=len(self.indices)))
        if self.cofinite_from is not None:
            inside |= x >= self.cofinite_from
        return inside


@dataclass(frozen=True)
class IntervalSet:
    """A finite union of intervals in [0, 1], kept sorted and merged."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = []
        for iv in self.intervals:
            if len(iv) != 2:
                raise SetDescriptorError(f"interval {iv!r} is not a pair")
            a, b = float(iv[0]), float(iv[1])
            if not (0.0 <= a <= b <= 1.0):
                raise SetDescriptorError(f"interval ({a}, {b}) not inside [0, 1]")
            if b > a:
                ivs.append((a, b))
        ivs.sort()
        merged = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x > a) & (x < b)
        return out


def measure_of(space, s) -> float:
    """Exact measure of a point set (discrete) or interval union."""
    if isinstance(space, DiscreteSpace):
        if not isinstance(s, PointSet):
            raise SetDescriptorError(f"discrete spaces measure PointSet, not {type(s).__name__}")
        idx = np.fromiter(sorted(s.indices), dtype=np.int64, count=len(s.indices))
        total = float(np.sum(space.weight(idx))) if idx.size else 0.0
        if s.cofinite_from is not None:
            if space.size is not None and s.cofinite_from > space.size:
                return total
            total += space.tail_weight(s.cofinite_from - 1)
        return total
    if isinstance(space, Interval01):
        if not isinstance(s, IntervalSet):
            raise SetDescriptorError(f"[0,1] measures IntervalSet, not {type(s).__name__}")
        return s.length
    raise SetDescriptorError(f"unknown space {space!r}")


# ------------------------------------------------------------- quadrature

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (8, 16)}


def gauss_legendre(g: Callable, lo: np.ndarray, hi: np.ndarray, n: int = 8, tag=None,
                   chunk: int = 1 << 16) -> np.ndarray:
    """Per-cell Gauss-Legendre sums of a vectorized ``g`` on cells
    ``[lo_i, hi_i]``.  ``g`` receives points of shape ``(cells, n)`` and,
    when ``tag`` is given, the matching slice of ``tag``."""
    x, w = _GL[n]
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    out = np.empty(lo.size)
    for s in range(0, lo.size, chunk):
        a, b = lo[s:s + chunk], hi[s:s + chunk]
        h = (b - a) / 2
        pts = (a + h)[:, None] + h[:, None] * x[None, :]
        vals = g(pts) if tag is None else g(pts, tag[s:s + chunk])
        out[s:s + chunk] = np.sum(np.asarray(vals) * w[None, :], axis=1) * h
    return out


def adaptive_cells(g: Callable, lo, hi, tol: float, tag=None, max_rounds: int = 40):
    """Adaptive GL8 vs GL16 on cells, bisecting the worst cells until the
    summed error estimate is below ``tol``.  Returns ``(value, error)``."""
    lo, hi = np.asarray(lo, float).ravel(), np.asarray(hi, float).ravel()
    if tag is not None:
        tag = np.asarray(tag).ravel()
    done_val, done_err = 0.0, 0.0
    for _ in range(max_rounds):
        if lo.size == 0:
            return done_val, done_err
        a8 = gauss_legendre(g, lo, hi, 8, tag)
        a16 = gauss_legendre(g, lo, hi, 16, tag)
        err = np.abs(a16 - a8)
        total_err = done_err + float(np.sum(err))
        if total_err <= tol:
            return done_val + float(np.sum(a16)), total_err
        # accept cells already far below their share, bisect the rest
        share = tol / (2.0 * max(lo.size, 1))
        keep = err <= share
        done_val += float(np.sum(a16[keep]))
        done_err += float(np.sum(err[keep]))
        lo, hi = lo[~keep], hi[~keep]
        mid = (lo + hi) / 2
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        if tag is not None:
            tag = np.concatenate([tag[~keep], tag[~keep]])
    raise PossiblyInfiniteError("adaptive quadrature did not reach the requested tolerance")


def scalar_integral(space, g: Callable, tol: float = 1e-10, *, pieces=None, bound: float | None = None,
                    max_points: int = 2**22) -> float:
    """Integral of a vectorized scalar function.

    Discrete spaces: exact for finite spaces; for infinite ones the sum is
    cut where ``bound * tail_weight`` drops below ``tol`` when a sup bound
    is declared, otherwise dyadic blocks are summed until they decay
    geometrically.  Blocks that refuse to shrink signal divergence and the
    result is ``math.inf``; anything undecidable raises
    :class:`PossiblyInfiniteError`.  On [0, 1] the integrand must be
    smooth on each declared piece.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(space, DiscreteSpace):
        if space.size is not None:
            x = np.arange(1, space.size + 1)
            return float(np.sum(space.weight(x) * np.asarray(g(x), dtype=float)))
        if bound is not None:
            m = space.truncation(tol / 2, abs(bound))
            x = np.arange(1, m + 1)
            return float(np.sum(space.weight(x) * np.asarray(g(x), dtype=float)))
        total = float(np.sum(space.weight([1, 2]) * np.asarray(g(np.array([1, 2])), dtype=float)))
        blocks = []
        lo = 3
        while lo <= max_points:
            x = np.arange(lo, 2 * lo)
            b = float(np.sum(space.weight(x) * np.asarray(g(x), dtype=float)))
            blocks.append(b)
            total += b
            lo *= 2
            if len(blocks) >= 4:
                r = [blocks[i + 1] / blocks[i] if blocks[i] > 0 else 0.0 for i in range(len(blocks) - 4, len(blocks) - 1)]
                if all(ri >= 0.99 for ri in r) and blocks[-1] > 0:
                    return math.inf
                rmax = max(r)
                if blocks[-1] == 0 or (rmax < 0.9 and blocks[-1] * rmax / (1 - rmax) < tol):
                    return total
        raise PossiblyInfiniteError("no tail bound: dyadic blocks neither decay nor stay level")
    if isinstance(space, Interval01):
        br = np.unique(np.concatenate([[0.0, 1.0], np.asarray(pieces if pieces is not None else [], float)]))
        val, _ = adaptive_cells(g, br[:-1], br[1:], tol)
        return val
    raise SetDescriptorError(f"unknown space {space!r}")


# ------------------------------------------------------ measurable functions


@dataclass(frozen=True, eq=False)
class MeasurableFn:
    """``f: X -> V`` given by a vectorized map from points to coordinate
    rows, shape ``(npoints, dim)``.

    ``bound`` optionally bounds every stored seminorm of ``f(x)``;
    ``support`` optionally restricts where ``f`` can be nonzero;
    ``pieces`` lists breakpoints on [0, 1] between which ``f`` is smooth.
    """

    fn: Callable
    dim: int
    bound: float | None = None
    support: object = None
    pieces: tuple = ()
    tail: object = ZeroTail()
    label: str = ""

    def values(self, x) -> np.ndarray:
        v = np.asarray(self.fn(np.asarray(x)))
        return v.reshape(np.size(x), self.dim)

    def __call__(self, x) -> LcsVector:
        return LcsVector(self.values(np.atleast_1d(x))[0], self.tail)

    @classmethod
    def table(cls, rows, tail=ZeroTail(), label: str = "") -> "MeasurableFn":
        """``f(x) = rows[x - 1]`` on a finite discrete space."""
        R = np.atleast_2d(np.asarray(rows, dtype=float))
        if R.shape[0] == 1 and np.ndim(rows) == 1:
            R = R.T
        bound = float(np.max(np.sum(np.abs(R), axis=1), initial=0.0))
        return cls(lambda x, R=R: R[np.asarray(x, dtype=np.int64) - 1], R.shape[1], bound, None, (), tail, label)


@dataclass(frozen=True, eq=False)
class PiecewisePolynomial(MeasurableFn):
    """Polynomial pieces on [0, 1]: ``coeffs[p, i, :]`` are the ascending
    power coefficients of coordinate ``i`` on ``[breaks[p], breaks[p+1]]``."""

    breaks: np.ndarray = None
    coeffs: np.ndarray = None

    @classmethod
    def from_coeffs(cls, coords, breaks=(0.0, 1.0), label: str = "") -> "PiecewisePolynomial":
        """``coords`` is a list over coordinates of ascending coefficient
        lists (one piece), or an array ``(pieces, dim, degree+1)``."""
        if isinstance(coords, np.ndarray) and coords.ndim == 3:
            C = coords.astype(float)
        else:
            deg = max(len(c) for c in coords)
            C = np.zeros((1, len(coords), deg))
            for i, c in enumerate(coords):
                C[0, i, : len(c)] = c
        breaks = np.asarray(breaks, dtype=float)
        if breaks[0] != 0 or breaks[-1] != 1 or np.any(np.diff(breaks) <= 0) or C.shape[0] != breaks.size - 1:
            raise ValueError("breaks must increase from 0 to 1, one more than pieces")
        dim = C.shape[1]

        def fn(x, C=C, breaks=breaks):
            x = np.asarray(x, dtype=float).ravel()
            if C.shape[0] == 1:
                Cp = C[0][None, :, :]
            else:
                Cp = C[np.clip(np.searchsorted(breaks, x, side="right") - 1, 0, C.shape[0] - 1)]
            out = np.broadcast_to(Cp[:, :, -1], (x.size, C.shape[1])).copy()
            for i in range(C.shape[2] - 2, -1, -1):
                out *= x[:, None]
                out += Cp[:, :, i]
            return out

        bound = float(np.max(np.sum(np.abs(C), axis=2).sum(axis=1)))
        return cls(fn, dim, bound, None, tuple(breaks[1:-1]), ZeroTail(), label, breaks, C)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[2] - 1

    def speed(self, x) -> np.ndarray:
        """``|f'(x)|`` (Euclidean), vectorized over any shape."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        p = np.clip(np.searchsorted(self.breaks, flat, side="right") - 1, 0, self.coeffs.shape[0] - 1)
        k = np.arange(1, self.coeffs.shape[2])
        D = self.coeffs[:, :, 1:] * k[None, None, :]
        powers = flat[:, None] ** (k - 1)[None, :]
        d = np.einsum("nk,nik->ni", powers, D[p])
        return np.sqrt(np.sum(d**2, axis=1)).reshape(x.shape)


# -------------------------------------------------------- simple functions


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    """``sum_j 1_{A_j} v_j`` held as a table.

    Discrete: ``points`` (1-based) with atom ids ``ids``, plus optionally
    every point from ``cofinite_from`` on carrying atom ``cofinite_id``.
    Interval: segments ``(lo[i], hi[i])`` with atom ids ``ids``.
    ``values[a]`` are the coordinates of atom ``a``.
    """

    kind: str
    values: np.ndarray
    ids: np.ndarray
    points: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    cofinite_from: int | None = None
    cofinite_id: int | None = None
    tail: object = ZeroTail()
    canonical_form: bool = False

    @classmethod
    def empty(cls, kind: str, dim: int) -> "SimpleFunction":
        z = np.zeros(0, dtype=np.int64)
        if kind == "discrete":
            return cls(kind, np.zeros((0, dim)), z, points=z, canonical_form=True)
        return cls(kind, np.zeros((0, dim)), z, lo=np.zeros(0), hi=np.zeros(0), canonical_form=True)

    @classmethod
    def from_atoms(cls, atoms, dim: int | None = None) -> "SimpleFunction":
        """From ``[(set descriptor, vector), ...]``; overlapping sets add."""
        atoms = list(atoms)
        if not atoms:
            return cls.empty("discrete", dim or 0)
        vecs = [a[1].coords if isinstance(a[1], LcsVector) else np.atleast_1d(np.asarray(a[1], float)) for a in atoms]
        tail = atoms[0][1].tail if isinstance(atoms[0][1], LcsVector) else ZeroTail()
        d = max(v.size for v in vecs) if dim is None else dim
        V = np.zeros((len(atoms), d), dtype=np.result_type(*vecs, float))
        for i, v in enumerate(vecs):
            V[i, : v.size] = v
        sets = [a[0] for a in atoms]
        if all(isinstance(s, PointSet) for s in sets):
            pts, ids = [], []
            cof = [(s.cofinite_from, i) for i, s in enumerate(sets) if s.cofinite_from is not None]
            for i, s in enumerate(sets):
                for p in sorted(s.indices):
                    pts.append(p)
                    ids.append(i)
            c_from = max((c for c, _ in cof), default=None)
            # expand cofinite parts below the common start point by point
            for c, i in cof:
                for p in range(c, c_from):
                    pts.append(p)
                    ids.append(i)
            # point sums, then the common cofinite tail as its own atom
            P = np.asarray(pts, dtype=np.int64)
            I = np.asarray(ids, dtype=np.int64)
            uniq = np.unique(P)
            acc = np.zeros((uniq.size, d), dtype=V.dtype)
            np.add.at(acc, np.searchsorted(uniq, P), V[I])
            cof_vec = None
            if cof:
                cof_vec = V[[i for _, i in cof]].sum(axis=0)
            out = cls("discrete", acc, np.arange(uniq.size), points=uniq, tail=tail)
            if cof_vec is not None:
                vals = np.vstack([acc, cof_vec[None, :]])
                out = cls("discrete", vals, np.arange(uniq.size), points=uniq,
                          cofinite_from=c_from, cofinite_id=uniq.size, tail=tail)
            return out.canonical()
        if all(isinstance(s, IntervalSet) for s in sets):
            lo, hi, ids = [], [], []
            for i, s in enumerate(sets):
                for a, b in s.intervals:
                    lo.append(a)
                    hi.append(b)
                    ids.append(i)
            br = np.unique(np.concatenate([[0.0, 1.0], lo, hi]))
            seg_lo, seg_hi = br[:-1], br[1:]
            acc = np.zeros((seg_lo.size, d), dtype=V.dtype)
            for a, b, i in zip(lo, hi, ids):
                ia, ib = np.searchsorted(br, a), np.searchsorted(br, b)
                acc[ia:ib] += V[i]
            out = cls("interval01", acc, np.arange(seg_lo.size), lo=seg_lo, hi=seg_hi, tail=tail)
            return out.canonical()
        raise SetDescriptorError("atoms mix point sets and interval sets")

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def canonical(self) -> "SimpleFunction":
        """Disjoint atoms with distinct nonzero vectors, adjacent segments
        merged, atoms numbered by first appearance."""
        if self.canonical_form:
            return self
        V = self.values
        nz = np.any(V != 0, axis=1)
        # identify atoms with equal vectors
        if V.shape[0]:
            _, first, inv = np.unique(V, axis=0, return_index=True, return_inverse=True)
            inv = np.asarray(inv).ravel()
            rep = first[inv]
        else:
            rep = np.zeros(0, dtype=np.int64)
        if self.kind == "discrete":
            keep = nz[self.ids]
            pts, ids = self.points[keep], rep[self.ids[keep]]
            cof_from, cof_id = self.cofinite_from, None
            if cof_from is not None and nz[self.cofinite_id]:
                cof_id = rep[self.cofinite_id]
            elif cof_from is not None:
                cof_from = None
            order = np.argsort(pts, kind="stable")
            pts, ids = pts[order], ids[order]
            used = list(dict.fromkeys(ids.tolist() + ([cof_id] if cof_id is not None else [])))
            remap = {a: k for k, a in enumerate(used)}
            new_ids = np.array([remap[a] for a in ids.tolist()], dtype=np.int64)
            vals = V[used] if used else np.zeros((0, self.dim), dtype=V.dtype)
            return SimpleFunction("discrete", vals, new_ids, points=pts,
                                  cofinite_from=cof_from, cofinite_id=remap.get(cof_id),
                                  tail=self.tail, canonical_form=True)
        keep = nz[self.ids] & (self.hi > self.lo)
        lo, hi, ids = self.lo[keep], self.hi[keep], rep[self.ids[keep]]
        order = np.argsort(lo, kind="stable")
        lo, hi, ids = lo[order], hi[order], ids[order]
        if lo.size:
            brk = np.ones(lo.size, dtype=bool)
            brk[1:] = (ids[1:] != ids[:-1]) | (lo[1:] != hi[:-1])
            starts = np.nonzero(brk)[0]
            ends = np.concatenate([starts[1:], [lo.size]]) - 1
            lo, hi, ids = lo[starts], hi[ends], ids[starts]
        used, inv = np.unique(ids, return_inverse=True) if ids.size else (np.zeros(0, np.int64), ids)
        # number atoms by first appearance along [0, 1]
        firsts = np.full(used.size, ids.size)
        np.minimum.at(firsts, np.asarray(inv).ravel(), np.arange(ids.size))
        order = np.argsort(firsts, kind="stable")
        rank = np.empty(used.size, dtype=np.int64)
        rank[order] = np.arange(used.size)
        new_ids = rank[np.asarray(inv).ravel()] if ids.size else ids
        vals = V[used[order]] if used.size else np.zeros((0, self.dim), dtype=V.dtype)
        return SimpleFunction("interval01", vals, new_ids.astype(np.int64), lo=lo, hi=hi,
                              tail=self.tail, canonical_form=True)

    @property
    def natoms(self) -> int:
        return int(self.values.shape[0])

    @property
    def atoms(self) -> list:
        """``[(set descriptor, LcsVector), ...]``."""
        out = []
        for a in range(self.natoms):
            if self.kind == "discrete":
                s = PointSet(frozenset(self.points[self.ids == a].tolist()),
                             self.cofinite_from if self.cofinite_id == a else None)
            else:
                sel = self.ids == a
                s = IntervalSet(tuple(zip(self.lo[sel].tolist(), self.hi[sel].tolist())))
            out.append((s, LcsVector(self.values[a], self.tail)))
        return out

    def evaluate(self, x) -> np.ndarray:
        """Coordinates ``s(x)`` at points (1-based ints or reals in [0,1])."""
        x = np.atleast_1d(np.asarray(x))
        out = np.zeros((x.size, self.dim), dtype=self.values.dtype)
        if self.kind == "discrete":
            pos = np.searchsorted(self.points, x)
            hit = (pos < self.points.size) & (self.points[np.minimum(pos, max(self.points.size - 1, 0))] == x) \
                if self.points.size else np.zeros(x.size, bool)
            out[hit] = self.values[self.ids[pos[hit]]]
            if self.cofinite_from is not None:
                cof = (~hit) & (x >= self.cofinite_from)
                out[cof] = self.values[self.cofinite_id]
            return out
        pos = np.searchsorted(self.lo, x, side="right") - 1
        ok = pos >= 0
        ok[ok] &= x[ok] < self.hi[pos[ok]]
        out[ok] = self.values[self.ids[pos[ok]]]
        return out

    def measures(self, space) -> np.ndarray:
        """``mu(A_a)`` for every atom ``a``."""
        m = np.zeros(self.natoms)
        if self.kind == "discrete":
            if self.points.size:
                np.add.at(m, self.ids, space.weight(self.points))
            if self.cofinite_from is not None:
                m[self.cofinite_id] += measure_of(space, PointSet(frozenset(), self.cofinite_from))
            return m
        np.add.at(m, self.ids, self.hi - self.lo)
        return m
