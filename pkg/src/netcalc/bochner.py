"""Bochner integration in locally convex spaces through nets of simple
functions.

For a seminorm ``p`` and ``n >= 1`` (``delta = 1/n``) the approximant is

    s_{p,n} = sum_{j<=n} 1_{D_j} c_j,
    A_j = {x : p(f(x)) > delta, p(f(x) - c_j) < delta},
    D_j = A_j minus (A_1 u ... u A_{j-1}),

with ``c_1, c_2, ...`` a countable set inside the image of ``f``.  On
discrete spaces membership is decided exactly; on [0, 1] the sets ``A_j``
are preimages of balls under a polynomial map and are computed from the
real roots of one polynomial per centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (
    InconclusiveIntegralError,
    NotBochnerApproximableError,
    NotIntegrallyBoundedError,
    PossiblyInfiniteError,
    UnsupportedPreimageError,
)
from .lcspace import CountableDenseSet, CurveDenseSet, LcsVector, SeminormFamily
from .measure import (
    DiscreteSpace,
    Interval01,
    MeasurableFn,
    PiecewisePolynomial,
    SimpleFunction,
    adaptive_cells,
    scalar_integral,
)
from .netcore import ConvergenceReport

__all__ = [
    "ApproximationBasis",
    "IntegralResult",
    "LinearMap",
    "simple_integral",
    "approximant_sets",
    "build_approximant",
    "approximation_defect",
    "bochner_integrate",
    "default_basis",
    "pushforward_check",
    "convex_hull_residual",
    "essential_bound_probe",
    "essential_separability_probe",
]

DEFAULT_ATOM_BUDGET = 10**4


@dataclass(frozen=True, eq=False)
class ApproximationBasis:
    """Seminorm index ``k``, the enumeration ``c_1, c_2, ...`` and the null
    set outside of which the image lies in the closure of the enumeration."""

    k: int
    dense: object
    nullset: object = None

    def __post_init__(self):
        if isinstance(self.dense, CountableDenseSet) and self.dense.order.size == 0:
            raise ValueError("dense enumeration must be nonempty")


@dataclass(frozen=True, eq=False)
class IntegralResult:
    value: LcsVector
    per_seminorm_defect: dict
    report: ConvergenceReport
    covered: tuple = ()
    seminorm_integrals: dict = field(default_factory=dict)
    atoms: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """``x -> M x`` between coordinate spaces."""

    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", np.atleast_2d(np.asarray(self.M, dtype=float)))

    @classmethod
    def functional(cls, alpha) -> "LinearMap":
        return cls(np.atleast_2d(np.asarray(alpha, dtype=float)))

    def apply(self, v) -> LcsVector:
        c = v.coords if isinstance(v, LcsVector) else np.asarray(v)
        return LcsVector(self.M[:, : c.size] @ c)

    def compose(self, f: MeasurableFn) -> MeasurableFn:
        M = self.M[:, : f.dim]
        if isinstance(f, PiecewisePolynomial):
            C = np.einsum("oi,pik->pok", M, f.coeffs)
            return PiecewisePolynomial.from_coeffs(C, f.breaks, label=f"T({f.label})")
        bound = None if f.bound is None else f.bound * float(np.abs(M).sum(axis=0).max())
        return MeasurableFn(lambda x: f.values(x) @ M.T, M.shape[0], bound, f.support, f.pieces,
                            label=f"T({f.label})")


# ----------------------------------------------------------- simple parts


def simple_integral(space, s: SimpleFunction) -> LcsVector:
    """``sum_j mu(A_j) v_j``."""
    m = s.measures(space)
    if np.any(~np.isfinite(m)):
        raise PossiblyInfiniteError("simple function has an atom of infinite measure")
    if s.natoms == 0:
        return LcsVector(np.zeros(s.dim), s.tail)
    return LcsVector(m @ s.values, s.tail)


def _norms(family, k, X):
    return np.asarray(family.eval_coords(k, X), dtype=float)


def _discrete_points(space: DiscreteSpace, f: MeasurableFn, family, k, tol: float) -> np.ndarray:
    if space.size is not None:
        return np.arange(1, space.size + 1)
    if f.bound is None:
        raise NotIntegrallyBoundedError("infinite discrete spaces need a bound hint on f")
    return np.arange(1, space.truncation(tol, 2.0 * f.bound + 1.0) + 1)


def _first_member(space, f, family, k, centers, delta, x, chunk=1 << 22):
    """Index (0-based) of the set D_j containing each point, or -1."""
    fx = f.values(x)
    big = _norms(family, k, fx) > delta
    out = np.full(x.size, -1, dtype=np.int64)
    n = centers.shape[0]
    step = max(1, chunk // max(n * fx.shape[1], 1))
    for s in range(0, x.size, step):
        blk = fx[s:s + step]
        d = _norms(family, k, blk[:, None, :] - centers[None, :, :])
        inside = d < delta
        hit = inside.any(axis=1)
        first = np.argmax(inside, axis=1)
        out[s:s + step] = np.where(hit & big[s:s + step], first, -1)
    return out


def approximant_sets(space, f, family, basis: ApproximationBasis, n: int, *, tol: float = 1e-12) -> dict:
    """``{j: D_j}`` (1-based ``j``) as arrays of points, discrete spaces only."""
    if not isinstance(space, DiscreteSpace):
        raise UnsupportedPreimageError("explicit D-sets are listed for discrete spaces only")
    x = _discrete_points(space, f, family, basis.k, tol)
    who = _first_member(space, f, family, basis.k, basis.dense.centers(n), 1.0 / n, x)
    return {j + 1: x[who == j] for j in range(n)}


# --------------------------------------------- polynomial preimages on [0,1]


def _polyval(Q, x):
    """Evaluate rows of ascending coefficients ``Q`` at matching ``x``
    (shapes ``(M, d+1)`` and ``(M, r)``)."""
    out = np.zeros(x.shape)
    for i in range(Q.shape[1] - 1, -1, -1):
        out = out * x + Q[:, i:i + 1]
    return out


def _real_roots(Q, a, b):
    """Real roots in ``(a, b)`` of each row polynomial (ascending
    coefficients, common exact degree ``e >= 1``), NaN elsewhere."""
    M, e = Q.shape[0], Q.shape[1] - 1
    if e == 1:
        r = (-Q[:, 0] / Q[:, 1])[:, None]
    elif e == 2:
        c0, c1, c2 = Q[:, 0], Q[:, 1], Q[:, 2]
        disc = c1 * c1 - 4 * c2 * c0
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        qq = -0.5 * (c1 + np.where(c1 >= 0, sq, -sq))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = qq / c2
            r2 = np.where(qq != 0, c0 / qq, r1)
        r = np.stack([r1, r2], axis=1)
        r[~ok] = np.nan
    else:
        comp = np.zeros((M, e, e))
        comp[:, np.arange(1, e), np.arange(e - 1)] = 1.0
        comp[:, :, -1] = -Q[:, :-1] / Q[:, -1:]
        ev = np.linalg.eigvals(comp)
        real = np.abs(ev.imag) <= 1e-7 * (1.0 + np.abs(ev.real))
        r = np.where(real, ev.real, np.nan)
    # Newton polish
    k = np.arange(1, e + 1)
    dQ = Q[:, 1:] * k[None, :]
    for _ in range(3):
        fv = _polyval(Q, np.nan_to_num(r))
        dv = _polyval(dQ, np.nan_to_num(r))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dv != 0, fv / dv, 0.0)
        r = r - np.where(np.isfinite(step), step, 0.0)
    r[(r <= a) | (r >= b)] = np.nan
    return r


def _negative_intervals(Q, a, b):
    """Intervals in ``[a, b]`` where each row polynomial is negative.
    Returns ``(row, lo, hi)`` arrays."""
    Q = np.atleast_2d(Q)
    M = Q.shape[0]
    nz = np.nonzero(np.any(Q != 0, axis=0))[0]
    e = int(nz[-1]) if nz.size else 0
    if e == 0:
        neg = Q[:, 0] < 0
        rows = np.nonzero(neg)[0]
        return rows, np.full(rows.size, a), np.full(rows.size, b)
    Q = Q[:, : e + 1]
    r = _real_roots(Q, a, b)
    bp = np.concatenate([np.full((M, 1), a), np.where(np.isnan(r), b, r), np.full((M, 1), b)], axis=1)
    bp.sort(axis=1)
    lo, hi = bp[:, :-1], bp[:, 1:]
    neg = (_polyval(Q, (lo + hi) / 2) < 0) & (hi > lo)
    rows, cols = np.nonzero(neg)
    return rows, lo[rows, cols], hi[rows, cols]


def _conv_rows(A, B):
    """Row-wise polynomial products for ascending coefficient arrays."""
    out = np.zeros(A.shape[:-1] + (A.shape[-1] + B.shape[-1] - 1,))
    for i in range(A.shape[-1]):
        out[..., i:i + B.shape[-1]] += A[..., i:i + 1] * B
    return out


def _interval_assignment(f: PiecewisePolynomial, family, k, centers, delta):
    """Elementary segments of [0, 1] and the first centre index whose ball
    preimage contains each one (``-1`` where none applies)."""
    if family.shape != "euclidean":
        raise UnsupportedPreimageError(
            f"preimage {{x : p_{k}(f(x) - c_j) < 1/n}} is not a polynomial sublevel set for {family.space_id}"
        )
    W = family.quadratic_form(k, f.dim)
    CW = centers @ W
    cwc = np.einsum("ni,ni->n", CW, centers)
    J, LO, HI, B = [], [], [], [f.breaks]
    for p in range(f.coeffs.shape[0]):
        a, b = f.breaks[p], f.breaks[p + 1]
        P = f.coeffs[p]  # (dim, deg+1)
        F2 = np.einsum("ij,jk->ik", W, P)
        F2 = sum(_conv_rows(P[i:i + 1], F2[i:i + 1]) for i in range(f.dim))[0]
        lin = CW @ P  # (n, deg+1)
        Q = np.zeros((centers.shape[0], F2.size))
        Q[:, :] = F2
        Q[:, : lin.shape[1]] -= 2 * lin
        Q[:, 0] += cwc - delta**2
        rows, lo, hi = _negative_intervals(Q, a, b)
        J.append(rows)
        LO.append(lo)
        HI.append(hi)
        # where |f| = delta: roots of F2 - delta^2 split segments
        q0 = F2.copy()
        q0[0] -= delta**2
        _, l0, h0 = _negative_intervals(q0[None, :], a, b)
        B += [l0, h0]
    J, LO, HI = np.concatenate(J), np.concatenate(LO), np.concatenate(HI)
    bounds = np.unique(np.concatenate(B + [LO, HI, [0.0, 1.0]]))
    nseg = bounds.size - 1
    best = np.full(nseg, np.iinfo(np.int64).max, dtype=np.int64)
    if J.size:
        ia = np.searchsorted(bounds, LO)
        ib = np.searchsorted(bounds, HI)
        cnt = ib - ia
        start = np.repeat(ia - np.concatenate([[0], np.cumsum(cnt)[:-1]]), cnt)
        seg = start + np.arange(int(cnt.sum()))
        np.minimum.at(best, seg, np.repeat(J, cnt))
    lo, hi = bounds[:-1], bounds[1:]
    mid = (lo + hi) / 2
    small = _norms(family, k, f.values(mid)) <= delta
    best[small | (best == np.iinfo(np.int64).max)] = -1
    return lo, hi, best


# --------------------------------------------------------------- approximant


def default_basis(space, f: MeasurableFn, family: SeminormFamily, k: int, *, tol: float = 1e-12):
    """Image-point enumeration: ``f(1), f(2), ...`` (first occurrences) on
    discrete spaces, arc-length dyadic points of the curve on [0, 1]."""
    if isinstance(space, DiscreteSpace):
        x = _discrete_points(space, f, family, k, tol)
        vals = f.values(x)
        _, first = np.unique(vals, axis=0, return_index=True)
        order = np.sort(first)
        return ApproximationBasis(k, CountableDenseSet(vals, order, "image-points", f.tail))
    if isinstance(f, PiecewisePolynomial):
        curve = lambda t: f.values(t).T  # noqa: E731
        dense = CurveDenseSet.from_curve(curve, f.speed, tuple(f.breaks))
        return ApproximationBasis(k, dense)
    raise UnsupportedPreimageError("functions on [0,1] must be piecewise polynomial")


def build_approximant(space, f: MeasurableFn, family: SeminormFamily, basis: ApproximationBasis, n: int,
                      *, tol: float = 1e-12, atom_budget: int = DEFAULT_ATOM_BUDGET) -> SimpleFunction:
    """The simple function ``s_{p,n}`` with ``p = p_k``, in canonical form.

    On infinite discrete spaces the sets are decided on the points where
    the remaining weight times ``2 * bound + 1`` exceeds ``tol``; beyond
    them the approximant is zero and the difference is charged to the
    defect.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if n > atom_budget:
        raise NotBochnerApproximableError(f"n = {n} exceeds the atom budget {atom_budget}")
    k = basis.k
    delta = 1.0 / n
    centers = np.atleast_2d(basis.dense.centers(n))
    if centers.shape[1] < f.dim:
        centers = np.pad(centers, ((0, 0), (0, f.dim - centers.shape[1])))
    centers = centers[:, : f.dim]
    if isinstance(space, DiscreteSpace):
        x = _discrete_points(space, f, family, k, tol)
        who = _first_member(space, f, family, k, centers, delta, x)
        keep = who >= 0
        s = SimpleFunction("discrete", centers, who[keep], points=x[keep], tail=f.tail)
        return s.canonical()
    if isinstance(space, Interval01):
        if not isinstance(f, PiecewisePolynomial):
            raise UnsupportedPreimageError("preimages on [0,1] need a piecewise polynomial f")
        lo, hi, best = _interval_assignment(f, family, k, centers, delta)
        keep = best >= 0
        s = SimpleFunction("interval01", centers, best[keep], lo=lo[keep], hi=hi[keep], tail=f.tail)
        return s.canonical()
    raise UnsupportedPreimageError(f"unknown space {space!r}")


def approximation_defect(space, f: MeasurableFn, s: SimpleFunction, family: SeminormFamily, k: int,
                         tol: float = 1e-10, *, kinks=None) -> float:
    """``int p_k(f - s) dmu`` within ``tol``.

    ``kinks`` optionally maps atom ids to points in [0, 1] where
    ``p_k(f - s)`` may fail to be smooth; cells are split there.
    """
    if isinstance(space, DiscreteSpace):
        if space.size is not None:
            x = np.arange(1, space.size + 1)
            return float(space.weight(x) @ _norms(family, k, f.values(x) - s.evaluate(x)))
        if f.bound is None:
            raise NotIntegrallyBoundedError("infinite discrete spaces need a bound hint on f")
        sup_s = float(np.max(_norms(family, k, s.values), initial=0.0))
        m = space.truncation(tol / 2, f.bound + sup_s)
        x = np.arange(1, m + 1)
        return float(space.weight(x) @ _norms(family, k, f.values(x) - s.evaluate(x)))
    if isinstance(space, Interval01):
        bounds = np.unique(np.concatenate([[0.0, 1.0], s.lo, s.hi, np.asarray(f.pieces, float)]))
        lo, hi = bounds[:-1], bounds[1:]
        mid = (lo + hi) / 2
        pos = np.searchsorted(s.lo, mid, side="right") - 1
        tag = np.full(lo.size, -1, dtype=np.int64)
        ok = pos >= 0
        ok[ok] &= mid[ok] < s.hi[pos[ok]]
        tag[ok] = s.ids[pos[ok]]
        if kinks is not None:
            t = np.where(tag >= 0, kinks[np.maximum(tag, 0)], np.nan)
            split = (t > lo) & (t < hi)
            lo = np.concatenate([lo, t[split]])
            hi = np.concatenate([np.where(split, t, hi), hi[split]])
            tag = np.concatenate([tag, tag[split]])
        V = np.vstack([s.values, np.zeros((1, s.dim))]) if s.natoms else np.zeros((1, f.dim))

        def g(pts, tg):
            F = f.values(pts.ravel()).reshape(pts.shape + (f.dim,))
            return _norms(family, k, F - V[tg][:, None, :])

        val, _ = adaptive_cells(g, lo, hi, tol, tag=tag)
        return val
    raise UnsupportedPreimageError(f"unknown space {space!r}")


def _atom_parameters(dense: CurveDenseSet, n: int, values: np.ndarray) -> np.ndarray:
    """Curve parameter of the first centre equal to each atom value (the
    point where ``p(f - c)`` has its kink), plus a trailing NaN slot."""
    cs = np.atleast_2d(dense.centers(n))[:, : values.shape[1]]
    both = np.vstack([cs, values])
    _, first, inv = np.unique(both, axis=0, return_index=True, return_inverse=True)
    src = first[np.ravel(inv)[cs.shape[0]:]]
    params = np.asarray(dense.parameters(n), dtype=float)
    out = np.where(src < cs.shape[0], params[np.minimum(src, cs.shape[0] - 1)], np.nan)
    return np.append(out, np.nan)


def _next_n(schedule, i, history, target):
    """Index of the next schedule entry, skipping ahead when the observed
    decay rate of the defect predicts a much larger ``n`` is needed."""
    if len(history) < 2:
        return i + 1
    (n0, d0), (n1, d1) = history[-2], history[-1]
    if not (d1 > 0 and d0 > d1):
        return i + 1
    rate = math.log(d0 / d1) / math.log(n1 / n0)
    log_want = math.log(1.25 * n1) + math.log(d1 / target) / rate
    j = i + 1
    while j + 1 < len(schedule) and math.log(schedule[j]) < log_want:
        j += 1
    return j


def _schedule(space, budget: int):
    if isinstance(space, Interval01):
        # 2**m + 1 centres form a complete dyadic arc-length grid
        m, out = 0, []
        while 2**m + 1 <= budget:
            out.append(2**m + 1)
            m += 1
        return out
    out, n = [], 1
    while n <= budget:
        out.append(n)
        n *= 2
    if out and out[-1] != budget:
        out.append(budget)
    return out


def _p_integral(space, f, family, k, tol):
    if isinstance(space, DiscreteSpace):
        if space.size is None and f.bound is None:
            return scalar_integral(space, lambda x: _norms(family, k, f.values(x)), tol)
        return scalar_integral(space, lambda x: _norms(family, k, f.values(x)), tol,
                               bound=None if f.bound is None else f.bound + 1.0)
    return scalar_integral(
        space, lambda x: _norms(family, k, f.values(x.ravel()).reshape(x.shape + (f.dim,))), tol,
        pieces=f.pieces,
    )


def bochner_integrate(space, f: MeasurableFn, family: SeminormFamily, bases=None, tol: float = 1e-6, *,
                      depth: int = 8, atom_budget: int = DEFAULT_ATOM_BUDGET) -> IntegralResult:
    """Integrate ``f`` as the limit of the net of simple integrals.

    For every ``k`` in the directed chain ``1..min(depth, count)`` the
    approximants ``s_{p_k,n}`` are built along a doubling schedule until
    ``int p_k(f - s) < min(1, tol)``.  The value is the simple integral at
    the last (largest) seminorm, which bounds every earlier one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    ks = family.chain(depth)
    target = min(1.0, tol)
    defects, values, rows, integrals, atoms = {}, {}, [], {}, {}
    for k in ks:
        pint = _p_integral(space, f, family, k, tol / 10)
        if not np.isfinite(pint):
            raise NotIntegrallyBoundedError(f"integral of p_{k}(f) is infinite")
        integrals[k] = pint
        if callable(bases):
            basis = bases(k)
        elif isinstance(bases, dict):
            basis = bases[k]
        else:
            basis = default_basis(space, f, family, k, tol=tol / 4)
        kinks = None
        below_one = False
        best = None
        sched = _schedule(space, atom_budget)
        i, hist = 0, []
        while i < len(sched):
            n = sched[i]
            s = build_approximant(space, f, family, basis, n, tol=tol / 4, atom_budget=atom_budget)
            if isinstance(basis.dense, CurveDenseSet) and s.natoms:
                kinks = _atom_parameters(basis.dense, n, s.values)
            d = approximation_defect(space, f, s, family, k, tol / 10, kinks=kinks)
            val = simple_integral(space, s)
            rows.append((k, n, d, family.eval(k, val)))
            below_one = below_one or d < 1.0
            best = (n, d, val, s.natoms)
            if d < target:
                break
            hist.append((n, d))
            # defects on [0, 1] decay like a power of n, so skip ahead;
            # discrete defects drop in jumps and are stepped through
            i = _next_n(sched, i, hist, target) if isinstance(space, Interval01) else i + 1
        if not below_one:
            raise NotBochnerApproximableError(
                f"defect for p_{k} stayed >= 1 up to n = {best[0]} (atom budget {atom_budget})"
            )
        n, d, val, na = best
        if d >= target:
            rep = ConvergenceReport("inconclusive", val, d, tuple((r[1], r[2]) for r in rows if r[0] == k),
                                    tol, 1.0, rows=tuple(rows))
            raise InconclusiveIntegralError(
                f"defect for p_{k} is {d:.3g} >= {target:.3g} at the atom budget {atom_budget}", rep
            )
        defects[k], values[k], atoms[k] = d, val, na
    # Cauchy check of the net of simple integrals along the chain
    osc = 0.0
    for i, a in enumerate(ks):
        for b in ks[i + 1:]:
            osc = max(osc, family.eval(a, values[a] - values[b]))
    value = values[ks[-1]]
    verdict = "converged" if osc <= 2 * tol + 1e-15 else "inconclusive"
    rep = ConvergenceReport(verdict, value, osc, tuple((k, values[k]) for k in ks), tol, 1.0,
                            rows=tuple(rows))
    if verdict != "converged":
        raise InconclusiveIntegralError("simple integrals along the seminorm chain do not agree", rep)
    return IntegralResult(value, defects, rep, tuple(ks), integrals, atoms)


# ----------------------------------------------------------- pushforwards


def pushforward_check(space, f: MeasurableFn, T: LinearMap, source: SeminormFamily, target: SeminormFamily,
                      tol: float = 1e-6, **kw) -> float:
    """Distance in the target's largest stored seminorm between ``T`` of
    the integral and the integral of ``T o f``."""
    lhs = T.apply(bochner_integrate(space, f, source, tol=tol, **kw).value)
    rhs = bochner_integrate(space, T.compose(f), target, tol=tol, **kw).value
    kmax = target.chain(kw.get("depth", 8))[-1]
    return target.eval(kmax, lhs - rhs)


def convex_hull_residual(point, samples) -> float:
    """Smallest ``max``-distance from ``point`` to the convex hull of the
    sample rows (a linear program)."""
    P = np.atleast_2d(np.asarray(samples, dtype=float))
    x = np.asarray(point, dtype=float).ravel()
    m, d = P.shape
    # variables: lambda (m), t; minimize t s.t. |P^T lambda - x| <= t
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A = np.vstack([np.hstack([P.T, -np.ones((d, 1))]), np.hstack([-P.T, -np.ones((d, 1))])])
    b = np.concatenate([x, -x])
    Aeq = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A, b_ub=b, A_eq=Aeq, b_eq=[1.0], bounds=[(0, None)] * (m + 1), method="highs")
    if not res.success:
        raise RuntimeError(res.message)
    return float(res.x[-1])


def essential_bound_probe(space, f: MeasurableFn, family: SeminormFamily, ks, samples: int = 4096, seed: int = 0):
    """Advisory: sampled ``sup p_k(f)`` for each ``k``."""
    rng = np.random.default_rng(seed)
    if isinstance(space, DiscreteSpace):
        top = space.size or samples
        x = np.arange(1, min(top, samples) + 1)
    else:
        x = np.sort(rng.random(samples))
    fx = f.values(x)
    return {k: float(np.max(_norms(family, k, fx))) for k in ks}


def essential_separability_probe(space, f: MeasurableFn, family: SeminormFamily, basis: ApproximationBasis,
                                 n: int, samples: int = 2048, seed: int = 0) -> float:
    """Advisory: largest ``p_k`` distance from sampled image points to the
    first ``n`` enumerated centres."""
    rng = np.random.default_rng(seed)
    if isinstance(space, DiscreteSpace):
        top = space.size or samples
        x = np.arange(1, min(top, samples) + 1)
    else:
        x = rng.random(samples)
    fx = f.values(x)
    C = np.atleast_2d(basis.dense.centers(n))[:, : f.dim]
    d = np.min(_norms(family, basis.k, fx[:, None, :] - C[None, :, :]), axis=1)
    return float(np.max(d))
