"""Directed sets, nets, and numerical probes of net convergence.

A net is only ever looked at along a finite, monotone schedule of indices
(a cofinal sample).  ``probe_convergence`` turns such a sample into a
:class:`ConvergenceReport`; ``dominated_net_sum`` evaluates the limit of
``sum_k a[alpha, k]`` for a dominated net of sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import (
    DominationError,
    IncompatibleIndexError,
    ProbeFailedError,
    ScheduleError,
    TailBoundError,
)

__all__ = [
    "DirectedIndex",
    "Net",
    "Witness",
    "ConvergenceReport",
    "Dominator",
    "leq",
    "join",
    "distance",
    "probe_convergence",
    "probe_samples",
    "dominated_net_sum",
]

_SUBSPACE_TOL = 1e-10


def _orthonormal_columns(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    mat = np.atleast_2d(np.asarray(mat))
    if mat.shape[1] == 0:
        return mat
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank]


def _pad_rows(a: np.ndarray, rows: int) -> np.ndarray:
    if a.shape[0] == rows:
        return a
    out = np.zeros((rows, a.shape[1]), dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@dataclass(frozen=True, eq=False)
class DirectedIndex:
    """An element of one of three concrete directed sets.

    ``kind`` is ``"chain"`` (integers, usual order), ``"finite-set"``
    (finite sets ordered by inclusion) or ``"subspace"`` (column spans of
    orthonormal matrices ordered by inclusion).  ``rank`` is a nonnegative
    integer used only for scheduling and reporting.
    """

    kind: str
    payload: Any
    rank: int

    @classmethod
    def chain(cls, n: int) -> "DirectedIndex":
        return cls("chain", int(n), max(int(n), 0))

    @classmethod
    def finite_set(cls, items) -> "DirectedIndex":
        items = frozenset(items)
        return cls("finite-set", items, len(items))

    @classmethod
    def subspace(cls, vectors) -> "DirectedIndex":
        basis = _orthonormal_columns(np.asarray(vectors, dtype=complex))
        return cls("subspace", basis, basis.shape[1])

    def __le__(self, other: "DirectedIndex") -> bool:
        return leq(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedIndex) or other.kind != self.kind:
            return NotImplemented
        if self.kind == "subspace":
            return leq(self, other) and leq(other, self)
        return self.payload == other.payload

    def __hash__(self) -> int:
        if self.kind == "subspace":
            return hash((self.kind, self.rank))
        return hash((self.kind, self.payload))


def _check_same(i: DirectedIndex, j: DirectedIndex) -> None:
    if i.kind != j.kind:
        raise IncompatibleIndexError(f"cannot compare {i.kind!r} index with {j.kind!r} index")


def leq(i: DirectedIndex, j: DirectedIndex) -> bool:
    """Partial order ``i <= j`` of the directed set both indices belong to."""
    _check_same(i, j)
    if i.kind == "chain":
        return i.payload <= j.payload
    if i.kind == "finite-set":
        return i.payload <= j.payload
    if i.kind == "subspace":
        a, b = i.payload, j.payload
        if a.shape[1] == 0:
            return True
        rows = max(a.shape[0], b.shape[0])
        a, b = _pad_rows(a, rows), _pad_rows(b, rows)
        resid = a - b @ (b.conj().T @ a)
        return float(np.linalg.norm(resid)) < _SUBSPACE_TOL * max(1, a.shape[1])
    raise IncompatibleIndexError(f"unknown index kind {i.kind!r}")


def join(i: DirectedIndex, j: DirectedIndex) -> DirectedIndex:
    """An upper bound of ``i`` and ``j``: max on a chain, union of sets,
    sum of subspaces."""
    _check_same(i, j)
    if i.kind == "chain":
        return i if i.payload >= j.payload else j
    if i.kind == "finite-set":
        return DirectedIndex.finite_set(i.payload | j.payload)
    if i.kind == "subspace":
        a, b = i.payload, j.payload
        rows = max(a.shape[0], b.shape[0])
        return DirectedIndex.subspace(np.hstack([_pad_rows(a, rows), _pad_rows(b, rows)]))
    raise IncompatibleIndexError(f"unknown index kind {i.kind!r}")


@dataclass(frozen=True)
class Net:
    """A deterministic map from indices of one directed set to values."""

    fn: Callable[[Any], Any]
    kind: str = "chain"

    def __call__(self, index: DirectedIndex):
        if index.kind != self.kind:
            raise IncompatibleIndexError(f"net over {self.kind!r} evaluated at {index.kind!r} index")
        return self.fn(index.payload)


def distance(a, b) -> float:
    """Norm distance between scalars, vectors or matrices (Frobenius)."""
    with np.errstate(invalid="ignore"):
        diff = np.asarray(a) - np.asarray(b)
    # non-finite samples are never close to anything, themselves included
    d = float(abs(diff)) if diff.ndim == 0 else float(np.linalg.norm(diff.ravel()))
    return math.inf if math.isnan(d) else d


@dataclass(frozen=True)
class Witness:
    """Two comparable indices whose values are further apart than allowed."""

    rank_a: int
    rank_b: int
    distance: float
    label_a: str = ""
    label_b: str = ""


@dataclass(frozen=True)
class ConvergenceReport:
    verdict: str  # "converged" | "diverged" | "inconclusive"
    limit: Any
    oscillation: float
    samples: tuple
    tol: float
    div_threshold: float
    witness: Witness | None = None
    rows: tuple = ()
    notes: str = ""

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"


def probe_samples(
    ranks: Sequence[int],
    values: Sequence,
    tol: float,
    div_threshold: float,
    *,
    window: int = 5,
    tail_fraction: float = 0.5,
    dist: Callable = distance,
    label: str = "",
) -> ConvergenceReport:
    """Verdict for values already sampled along a monotone schedule."""
    m = len(values)
    if m < 3:
        raise ScheduleError(f"schedule needs at least 3 samples, got {m}")
    samples = tuple(zip((int(r) for r in ranks), values))

    # stabilization point: earliest s with samples[s:] pairwise within tol
    start = m - 1
    osc = 0.0
    while start > 0:
        cand = max(dist(values[start - 1], values[t]) for t in range(start, m))
        if cand > tol:
            break
        osc = max(osc, cand)
        start -= 1
    if m - start >= window:
        return ConvergenceReport("converged", values[-1], osc, samples, tol, div_threshold)

    tail0 = min(int(math.floor(m * (1.0 - tail_fraction))), m - 2)
    worst, pair = 0.0, None
    for a in range(tail0, m):
        for b in range(a + 1, m):
            d = dist(values[a], values[b])
            if not np.isfinite(d):
                d = math.inf
            if d > worst:
                worst, pair = d, (a, b)
    if pair is not None and worst > div_threshold:
        w = Witness(samples[pair[0]][0], samples[pair[1]][0], worst, label, label)
        return ConvergenceReport("diverged", None, worst, samples, tol, div_threshold, witness=w)
    return ConvergenceReport("inconclusive", values[-1], worst, samples, tol, div_threshold)


def probe_convergence(
    net: Net,
    schedule: Sequence[DirectedIndex],
    tol: float,
    div_threshold: float,
    *,
    window: int = 5,
    tail_fraction: float = 0.5,
    dist: Callable = distance,
) -> ConvergenceReport:
    """Probe a net along a monotone schedule of indices.

    Converged: at least ``window`` trailing samples are pairwise within
    ``tol``.  Diverged: two samples in the trailing ``tail_fraction`` of
    the schedule differ by more than ``div_threshold``.  Anything else is
    inconclusive.
    """
    if tol <= 0 or div_threshold <= 0:
        raise ValueError("tol and div_threshold must be positive")
    schedule = list(schedule)
    if len(schedule) < 3:
        raise ScheduleError(f"schedule needs at least 3 indices, got {len(schedule)}")
    for a, b in zip(schedule, schedule[1:]):
        if not leq(a, b):
            raise ScheduleError(f"schedule not monotone at ranks {a.rank} -> {b.rank}")
    values = [net(i) for i in schedule]
    return probe_samples(
        [i.rank for i in schedule], values, tol, div_threshold,
        window=window, tail_fraction=tail_fraction, dist=dist,
    )


@dataclass(frozen=True)
class Dominator:
    """Nonnegative summable sequence ``g_k`` (k >= 1) with a tail bound.

    ``tail(k0)`` must bound ``sum_{k > k0} g_k`` from above.
    """

    values: Callable[[np.ndarray], np.ndarray]
    tail: Callable[[int], float] | None

    @classmethod
    def geometric(cls, scale: float, ratio: float) -> "Dominator":
        """``g_k = scale * ratio**k``."""
        if not 0 <= ratio < 1:
            raise ValueError("ratio must lie in [0, 1)")
        return cls(
            lambda k: scale * ratio ** np.asarray(k, dtype=float),
            lambda k0: scale * ratio ** (k0 + 1) / (1.0 - ratio),
        )

    @classmethod
    def from_sequence(cls, seq) -> "Dominator":
        """Wrap an object exposing ``values(j)`` and ``abs_tail(m)``."""
        return cls(lambda k: np.abs(seq.values(k)), seq.abs_tail)


def _first_tail_index(tail: Callable[[int], float], target: float, cap: int) -> int:
    hi = 1
    while True:
        t = tail(hi)
        if t is None or not np.isfinite(t):
            raise TailBoundError("dominator has no finite tail bound")
        if t < target:
            break
        hi *= 2
        if hi > cap:
            raise TailBoundError(f"dominator tail stays above {target:.3g} beyond k={cap}")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) < target:
            hi = mid
        else:
            lo = mid
    return hi


def dominated_net_sum(
    family,
    dominator: Dominator,
    tol: float,
    *,
    alphas: Sequence | None = None,
    stable_steps: int = 2,
    k_cap: int = 1_000_000,
    return_trace: bool = False,
):
    """Limit of ``sum_k a[alpha, k]`` for a dominated net of sequences.

    ``family`` is a :class:`Net` over a chain (or a plain callable) whose
    value at ``alpha`` is a vectorized callable ``k -> a[alpha, k]``.  The
    sum is split at ``k0`` where the dominator tail drops below ``tol/4``;
    then ``alpha`` advances until every head term has moved by less than
    ``tol / 2**(k+2)`` for ``stable_steps`` consecutive schedule steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if dominator.tail is None:
        raise TailBoundError("dominator has no tail bound")
    k0 = _first_tail_index(dominator.tail, tol / 4.0, k_cap)
    ks = np.arange(1, k0 + 1)
    g = np.asarray(dominator.values(ks), dtype=float)
    if np.any(g < 0):
        raise ValueError("dominator must be nonnegative")
    head_tol = tol / 2.0 ** (ks + 2)

    if alphas is None:
        alphas = [2.0**e for e in range(0, 64)]

    def term(alpha):
        if isinstance(family, Net):
            seq = family(DirectedIndex.chain(alpha)) if family.kind == "chain" else family.fn(alpha)
        else:
            seq = lambda k, _a=alpha: family(_a, k)  # noqa: E731
        return np.asarray(seq(ks))

    prev = None
    streak = 0
    trace = []
    for alpha in alphas:
        a = term(alpha)
        over = np.abs(a) > g * (1 + 1e-12) + 1e-300
        if np.any(over):
            k = int(np.argmax(over))
            raise DominationError(alpha, int(ks[k]), float(abs(a[k])), float(g[k]))
        drift = math.inf if prev is None else float(np.max(np.abs(a - prev) / head_tol))
        streak = streak + 1 if drift < 1.0 else 0
        head = a.sum()
        trace.append((alpha, head, drift))
        if streak >= stable_steps:
            value = head.item() if hasattr(head, "item") else head
            return (value, trace) if return_trace else value
        prev = a
    raise ProbeFailedError(
        f"head terms did not stabilize within {len(list(alphas))} schedule steps (k0={k0})"
    )
