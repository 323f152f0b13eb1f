"""Nets of principal minors and the operator-class probes built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    FredholmInconsistencyError,
    OperatorFormError,
    ProbeFailedError,
    TailBoundError,
    TruncationError,
)
from ..netcore import ConvergenceReport, Witness, probe_samples
from .filtrations import DENSE_CAP, DIAGONAL_FACTOR, Filtration
from .operators import BlockDiag, Diagonal, IdentityMinus, Matrix, OperatorSpec, identity
from .sections import CoordinateFrame, compress, det_minor, exterior_traces, trace_minor, trace_norm

__all__ = [
    "normalize",
    "doubling_schedule",
    "minor_net",
    "TraceClassReport",
    "trace_class_probe",
    "FredholmResult",
    "fredholm_det",
    "EquivalenceReport",
    "det_class_to_trace_class_check",
    "FactorReport",
    "block_factor_check",
    "product_rule_check",
    "open_question_probe",
    "DEFAULT_STRATEGIES",
]

DEFAULT_STRATEGIES = ("coordinate", "eigen-sorted", "adversarial+", "adversarial-", "random")

# contraction required of successive increments before extrapolating
_CONTRACTION = 0.9


def normalize(T: OperatorSpec) -> OperatorSpec:
    """Collapse identity-minus and block forms to a plain diagonal when
    they are one."""
    if isinstance(T, IdentityMinus):
        inner = normalize(T.inner)
        T = IdentityMinus(inner, T.label)
    if hasattr(T, "normalized"):
        return T.normalized()
    return T


def doubling_schedule(n_max: int, n_min: int = 1) -> list[int]:
    out, n = [], max(1, n_min)
    while n < n_max:
        out.append(n)
        n *= 2
    out.append(int(n_max))
    return out


def _aitken(x: list) -> list:
    out = list(x)
    for i in range(2, len(x)):
        d1, d2 = x[i - 1] - x[i - 2], x[i] - x[i - 1]
        den = d2 - d1
        noise = 64 * np.finfo(float).eps * max(1.0, abs(x[i]))
        if abs(d2) > noise and abs(d2) <= _CONTRACTION * abs(d1) and den != 0:
            out[i] = x[i] - d2 * d2 / den
    return out


def _accelerate(ns: list, vals: list, levels: int = 3) -> list:
    """Iterated Aitken extrapolation, applied only on a doubling schedule
    and only where the increments actually contract."""
    if len(ns) < 3 or any(b != 2 * a for a, b in zip(ns[:-1], ns[1:])):
        return list(vals)
    if not all(np.isfinite(v) for v in vals):
        return list(vals)
    out = list(vals)
    for lev in range(levels):
        nxt = _aitken(out)
        # the first 2*(lev+1) entries have no complete stencil at this level
        out = out[: 2 * (lev + 1)] + nxt[2 * (lev + 1):]
    return out


def _logabs(v) -> float:
    a = abs(v)
    return math.log(a) if a > 0 else -math.inf


def _logdist(a, b) -> float:
    la, lb = _logabs(a), _logabs(b)
    if la == lb:
        return 0.0
    return abs(la - lb)


def _sample_strategy(T, filt: Filtration, kind: str, ns: list):
    raws, ests, bounds = [], [], []
    dt = T.diag_tail()
    for n in ns:
        F = filt.frame(T, n, kind)
        S = compress(T, F)
        H = filt.horizon(T, F)
        if kind == "trace":
            raw = trace_minor(S)
            corr = T.tail_trace(H)
            est = raw + corr if corr is not None else raw
            bound = T.trace_tail(H)
        else:
            raw = det_minor(S)
            corr = T.tail_logdet(H)
            if corr is None:
                est, bound = raw, math.inf
            else:
                with np.errstate(under="ignore", over="ignore"):
                    est = raw * complex(np.exp(corr)) if isinstance(corr, complex) else raw * math.exp(corr)
                lab = math.inf
                if T.size is not None and H >= T.size:
                    lab = 0.0
                elif dt is not None and H >= dt[1]:
                    lab = dt[0].log_abs_tail(H - dt[1])
                bound = abs(est) * math.expm1(lab) if np.isfinite(lab) else math.inf
        raws.append(raw)
        ests.append(est)
        bounds.append(float(bound))
    return raws, ests, bounds


def minor_net(
    T: OperatorSpec,
    kind: str = "trace",
    filtrations=None,
    n_max: int = 4096,
    tol: float = 1e-8,
    div_threshold: float = 1.0,
    *,
    schedule=None,
    zero_threshold: float = 1e-12,
    window: int = 5,
    accelerate: bool = True,
) -> ConvergenceReport:
    """Probe the net ``F -> tr(T_F)`` (or ``det(T_F)``) along several
    filtrations at once.

    Each sample's estimate is the raw minor plus the closed-form
    contribution of all coordinates beyond the frame horizon (when the
    operator is diagonal there with a summable tail), followed by guarded
    Aitken extrapolation along doubling schedules.  Converged means every
    strategy converged and all limits agree within ``tol``; for
    determinants the limit must also exceed ``zero_threshold`` in modulus.
    Divergence witnesses come from raw minors on comparable frames
    (coordinate versus adversarial/random), in log scale for determinants.
    """
    if kind not in ("trace", "det"):
        raise ValueError("kind must be 'trace' or 'det'")
    if tol <= 0 or div_threshold <= 0:
        raise ValueError("tol and div_threshold must be positive")
    T = normalize(T)
    if filtrations is None:
        filtrations = [Filtration("coordinate")]
    filtrations = [Filtration(f) if isinstance(f, str) else f for f in filtrations]
    if not filtrations:
        raise ValueError("at least one filtration is required")
    base = list(schedule) if schedule is not None else doubling_schedule(n_max)

    rows, parts, raw_by, notes = [], [], {}, []
    for filt in filtrations:
        cap = filt.cap(T)
        ns = sorted({min(n, cap) for n in base})
        if filt.strategy == "eigen-sorted" and filt.pool is None:
            pool = DIAGONAL_FACTOR * max(ns) if T.has_fast_diagonal else max(ns)
            filt = Filtration("eigen-sorted", pool=pool)
        if len(ns) < 3:
            notes.append(f"{filt.name}: fewer than 3 samples below cap {cap}, skipped")
            continue
        raws, ests, bounds = _sample_strategy(T, filt, kind, ns)
        acc = _accelerate(ns, ests) if accelerate else list(ests)
        rows += [(filt.name, n, r, e, b) for n, r, e, b in zip(ns, raws, acc, bounds)]
        raw_by[filt.name] = dict(zip(ns, raws))
        rep = probe_samples(ns, acc, tol, div_threshold, window=window, label=filt.name)
        if kind == "det" and rep.verdict != "converged":
            lrep = probe_samples(ns, acc, tol, div_threshold, window=window, dist=_logdist, label=filt.name)
            if lrep.verdict == "diverged":
                rep = lrep
        parts.append((filt.name, rep))

    if not parts:
        return ConvergenceReport("inconclusive", None, math.inf, (), tol, div_threshold, notes="; ".join(notes))

    # comparable cross-strategy witnesses against the coordinate filtration
    witness = None
    coord = raw_by.get("coordinate")
    if coord is not None:
        cns = sorted(coord)
        tail_ns = cns[len(cns) // 2:]
        dist = _logdist if kind == "det" else (lambda a, b: abs(a - b))
        for name, by in raw_by.items():
            if name in ("coordinate", "eigen-sorted"):
                continue
            for n in tail_ns:
                if n in by:
                    d = dist(by[n], coord[n])
                    if d > div_threshold and (witness is None or d > witness.distance):
                        witness = Witness(n, n, d, "coordinate", name)

    first_name, first = parts[0]
    samples = tuple((int(r), v) for r, v in first.samples)
    diverged = [(name, r) for name, r in parts if r.verdict == "diverged"]
    if witness is None and diverged:
        witness = max((r.witness for _, r in diverged), key=lambda w: w.distance)
    if witness is not None:
        return ConvergenceReport(
            "diverged", None, witness.distance, samples, tol, div_threshold,
            witness=witness, rows=tuple(rows), notes="; ".join(notes),
        )
    if all(r.verdict == "converged" for _, r in parts):
        limits = [r.limit for _, r in parts]
        spread = max(abs(a - b) for a in limits for b in limits)
        osc = max([spread] + [r.oscillation for _, r in parts])
        limit = first.limit
        if spread > tol:
            notes.append(f"strategies disagree by {spread:.3g}")
            return ConvergenceReport("inconclusive", limit, osc, samples, tol, div_threshold,
                                     rows=tuple(rows), notes="; ".join(notes))
        if kind == "det" and abs(limit) <= zero_threshold:
            notes.append("limit ~ 0, not determinant class")
            w = Witness(samples[0][0], samples[-1][0], math.inf, first_name, "zero limit")
            return ConvergenceReport("diverged", limit, osc, samples, tol, div_threshold,
                                     witness=w, rows=tuple(rows), notes="; ".join(notes))
        return ConvergenceReport("converged", limit, osc, samples, tol, div_threshold,
                                 rows=tuple(rows), notes="; ".join(notes))
    pending = [name for name, r in parts if r.verdict != "converged"]
    notes.append("no verdict from: " + ",".join(pending))
    osc = max(r.oscillation for _, r in parts)
    return ConvergenceReport("inconclusive", first.limit, osc, samples, tol, div_threshold,
                             rows=tuple(rows), notes="; ".join(notes))


def _strategies(strategies, seed):
    names = DEFAULT_STRATEGIES if strategies is None else strategies
    return [
        Filtration(s, seed=seed if s == "random" else None) if isinstance(s, str) else s for s in names
    ]


@dataclass(frozen=True)
class TraceClassReport:
    trace_class: bool
    trace: object
    trace_norm: float
    report: ConvergenceReport
    notes: str = ""


def _trace_norm_estimate(T: OperatorSpec, n: int) -> float:
    seq = T.as_diagonal()
    if seq is not None:
        return seq.abs_tail(0)
    if T.size is not None:
        n = T.size
    n = min(n, DENSE_CAP)
    S = compress(T, CoordinateFrame.first(n))
    return trace_norm(S) + T.trace_tail(n)


def trace_class_probe(
    T: OperatorSpec, n_max: int = 4096, tol: float = 1e-8, *, seed: int = 0, strategies=None,
    div_threshold: float = 1.0,
) -> TraceClassReport:
    """Trace-class verdict from the trace-minor net over all strategies,
    cross-checked against the trace norm when that is finite."""
    T = normalize(T)
    rep = minor_net(T, "trace", _strategies(strategies, seed), n_max, tol, div_threshold)
    tn = _trace_norm_estimate(T, n_max)
    notes = []
    if rep.converged and np.isfinite(tn) and abs(rep.limit) > tn + tol:
        notes.append(f"|trace| {abs(rep.limit):.6g} exceeds trace norm {tn:.6g}")
    if not rep.converged and np.isfinite(tn):
        notes.append("trace norm finite but minor net not certified")
    return TraceClassReport(rep.converged, rep.limit if rep.converged else None, tn, rep, "; ".join(notes))


@dataclass(frozen=True)
class FredholmResult:
    value: object
    method: str
    bound: float
    N: int | None = None
    k_max: int | None = None
    series: object = None
    eigen: object = None

    def __float__(self):
        return float(np.real(self.value))

    def __complex__(self):
        return complex(self.value)


def _eigen_det(T: OperatorSpec):
    seq = T.as_diagonal()
    if seq is not None:
        lt = seq.one_minus().log_tail(0)
        if lt is None:
            raise TailBoundError("eigenvalues are not absolutely summable")
        with np.errstate(under="ignore"):
            v = np.exp(lt)
        return v.item() if hasattr(v, "item") else v
    if T.size is not None and T.normal:
        M = T.dense(T.size)
        return np.linalg.det(np.eye(T.size) - M).item()
    raise OperatorFormError("eigenvalue product needs a normal operator in diagonal form")


def _choose_N(T, tol, N_cap):
    if T.size is not None:
        return T.size
    if not np.isfinite(T.trace_tail(N_cap)):
        raise TailBoundError("no trace-norm tail bound available")
    tn = _trace_norm_estimate(T, 64)
    if not np.isfinite(tn):
        raise TailBoundError("trace norm not finite")
    need = lambda n: T.trace_tail(n) * math.exp(2 * tn + 1) <= tol / 2  # noqa: E731
    hi = 1
    while not need(hi):
        hi *= 2
        if hi > N_cap:
            req = hi
            while req < 2**30 and not need(req):
                req *= 2
            raise TruncationError(f"series method needs truncation beyond {N_cap}", req)
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if need(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _series_det(T, tol, N, k_max, N_cap):
    N = _choose_N(T, tol, N_cap) if N is None else int(N)
    S = compress(T, CoordinateFrame.first(N))
    tn = trace_norm(S)
    tail = T.trace_tail(N)
    if k_max is None:
        k_max, term, rem = 0, 1.0, math.expm1(tn)
        while rem > tol / 2 and k_max < N:
            k_max += 1
            term *= tn / k_max
            rem -= term
        rem = max(rem, 0.0)
    else:
        k_max = int(k_max)
        terms = [tn**k / math.factorial(k) for k in range(k_max + 1)]
        rem = max(math.exp(tn) - sum(terms), 0.0) if k_max < N else 0.0
    e = exterior_traces(S, min(k_max, N))
    value = np.sum(((-1.0) ** np.arange(e.size)) * e)
    value = value.item() if hasattr(value, "item") else value
    trunc = tail * math.exp(2 * (tn + tail) + 1) if np.isfinite(tail) else math.inf
    return value, trunc + rem, N, k_max


def fredholm_det(
    T: OperatorSpec, method: str = "both", N: int | None = None, k_max: int | None = None,
    tol: float = 1e-10, *, N_cap: int = 2048,
) -> FredholmResult:
    """``det(1 - T)`` for trace-class ``T``.

    ``series`` sums ``(-1)^k tr(wedge^k T_N)`` with ``N`` chosen so the
    truncation error stays below ``tol/2`` and ``k_max`` so the series
    remainder does too.  ``eigen`` (normal operators) takes the product of
    ``1 - lambda_j`` with a closed-form log tail.  ``both`` computes each
    and insists on agreement within ``2*tol``.
    """
    T = normalize(T)
    if method not in ("series", "eigen", "both"):
        raise ValueError("method must be 'series', 'eigen' or 'both'")
    if method == "eigen":
        return FredholmResult(_eigen_det(T), "eigen", tol, eigen=_eigen_det(T))
    if method == "series" or not T.normal:
        v, b, N, k_max = _series_det(T, tol, N, k_max, N_cap)
        return FredholmResult(v, "series", b, N, k_max, series=v)
    ev = _eigen_det(T)
    sv, b, N, k_max = _series_det(T, tol, N, k_max, N_cap)
    if abs(ev - sv) > 2 * tol:
        raise FredholmInconsistencyError(
            f"series {sv!r} and eigen {ev!r} differ by {abs(ev - sv):.3g} > {2 * tol:.3g}"
        )
    return FredholmResult(ev, "both", max(b, abs(ev - sv)), N, k_max, series=sv, eigen=ev)


@dataclass(frozen=True)
class EquivalenceReport:
    det_class: bool
    trace_class: bool
    det_estimate: object
    fredholm: object
    det_report: ConvergenceReport
    trace_report: TraceClassReport
    values_match: bool | None = None

    @property
    def verdicts_match(self) -> bool:
        return self.det_class == self.trace_class


def det_class_to_trace_class_check(
    A: OperatorSpec, n_max: int = 4096, tol: float = 1e-8, *, seed: int = 0, strategies=None,
) -> EquivalenceReport:
    """Determinant-class probe on normal ``A`` next to the trace-class probe
    on ``1 - A``; when both hold, the determinant must match the Fredholm
    determinant of ``1 - A``."""
    A = normalize(A)
    if not A.normal:
        raise OperatorFormError("equivalence check needs a normal operator")
    filts = _strategies(strategies, seed)
    det_rep = minor_net(A, "det", filts, n_max, tol)
    T = normalize(IdentityMinus(A))
    tc = trace_class_probe(T, n_max, tol, seed=seed, strategies=strategies)
    fd, match = None, None
    if tc.trace_class:
        try:
            fd = fredholm_det(T, "eigen", tol=tol).value
        except (TailBoundError, OperatorFormError):
            fd = None
        if det_rep.converged and fd is not None:
            match = abs(det_rep.limit - fd) <= tol
    return EquivalenceReport(
        det_rep.converged, tc.trace_class, det_rep.limit if det_rep.converged else None,
        fd, det_rep, tc, match,
    )


@dataclass(frozen=True)
class FactorReport:
    residual: float
    det: object
    parts: tuple
    reports: tuple = field(default=(), repr=False)


def _det_or_fail(T, filts, n_max, tol, what):
    rep = minor_net(T, "det", filts, n_max, tol)
    if not rep.converged:
        raise ProbeFailedError(f"determinant probe for {what} did not converge ({rep.verdict})", rep)
    return rep.limit, rep


def block_factor_check(
    A: OperatorSpec, split: int, n_max: int = 4096, tol: float = 1e-10, *, strategies=("coordinate",),
    seed: int = 0,
) -> FactorReport:
    """``|det(A) - det(A_U) det(A_{U-perp})|`` for ``U`` spanned by the
    first ``split`` coordinates."""
    A = normalize(A)
    split = int(split)
    if split < 0:
        raise ValueError("split must be nonnegative")
    filts = _strategies(strategies, seed)
    if isinstance(A, Diagonal):
        seq = A.seq
        det_u = det_minor(compress(A, CoordinateFrame.first(split)))
        if A.size is not None:
            perp = Diagonal(seq.drop(split), A.size - split)
        else:
            perp = Diagonal(seq.drop(split))
    elif isinstance(A, BlockDiag):
        offs = list(A.offsets)
        if split not in offs:
            raise OperatorFormError(f"split {split} does not fall on a block boundary {offs}")
        k = offs.index(split)
        det_u = complex(np.prod([np.linalg.det(b.dense(b.size)) for b in A.blocks[:k]]))
        det_u = det_u.real if det_u.imag == 0 else det_u
        perp = normalize(BlockDiag(A.blocks[k:], A.tail)) if (A.blocks[k:] or A.tail) else identity(0)
    else:
        raise OperatorFormError(f"{type(A).__name__} does not respect a coordinate split")
    det_all, r1 = _det_or_fail(A, filts, n_max, tol, "A")
    if perp.size == 0:
        det_perp, r2 = 1.0, None
    else:
        det_perp, r2 = _det_or_fail(perp, filts, n_max, tol, "A on the complement")
    res = float(abs(det_all - det_u * det_perp))
    return FactorReport(res, det_all, (det_u, det_perp), (r1, r2))


def product_rule_check(
    A: OperatorSpec, B: OperatorSpec, n_max: int = 4096, tol: float = 1e-10, *,
    strategies=("coordinate",), seed: int = 0,
) -> FactorReport:
    """``|det(AB) - det(A) det(B)|`` for normal diagonal ``A, B``."""
    A, B = normalize(A), normalize(B)
    sa, sb = A.as_diagonal(), B.as_diagonal()
    if sa is None or sb is None:
        raise OperatorFormError("product check needs diagonal operators in a shared basis")
    AB = Diagonal(sa * sb)
    filts = _strategies(strategies, seed)
    da, ra = _det_or_fail(A, filts, n_max, tol, "A")
    db, rb = _det_or_fail(B, filts, n_max, tol, "B")
    dab, rab = _det_or_fail(AB, filts, n_max, tol, "AB")
    return FactorReport(float(abs(dab - da * db)), dab, (da, db), (ra, rb, rab))


def open_question_probe(
    M, n_max: int = 256, tol: float = 1e-8, *, seed: int = 0, strategies=("coordinate", "random"),
) -> tuple[ConvergenceReport, ConvergenceReport]:
    """Determinant minors of ``A = M (+) 1`` for a small, typically
    non-normal block ``M`` next to trace minors of ``1 - A``.  Returns both
    trajectories; no verdict about the general question is drawn."""
    blk = Matrix(np.asarray(M))
    A = BlockDiag((blk,), identity())
    filts = _strategies(strategies, seed)
    n_max = max(n_max, 4 * blk.size)
    det_rep = minor_net(A, "det", filts, n_max, tol)
    tr_rep = minor_net(IdentityMinus(A), "trace", filts, n_max, tol)
    return det_rep, tr_rep
