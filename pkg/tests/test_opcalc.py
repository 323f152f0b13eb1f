import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group, unitary_group

from netcalc.errors import (
    FrameError,
    OperatorFormError,
    ProbeFailedError,
    SpecError,
    TailBoundError,
    TruncationError,
)
from netcalc.opcalc import (
    BlockDiag,
    CoordinateFrame,
    DenseFrame,
    Diagonal,
    EntryOracle,
    FiniteSection,
    Filtration,
    IdentityMinus,
    Matrix,
    block_factor_check,
    compress,
    det_class_to_trace_class_check,
    det_minor,
    exterior_trace,
    exterior_traces,
    fredholm_det,
    identity,
    minor_net,
    parse_strategies,
    principal_minor_sums,
    product_rule_check,
    rank_one,
    trace_class_probe,
    trace_minor,
    trace_norm,
)
from netcalc.sequences import EigenSequence, parse_sequence

EULER = float(mpmath.qp(mpmath.mpf(0.5)))  # prod_{j>=1} (1 - 2^-j)


def diag(text):
    return Diagonal(parse_sequence(text))


def cofactor_det(A):
    """Laplace expansion along the first row."""
    n = A.shape[0]
    if n == 1:
        return A[0, 0]
    return sum((-1) ** c * A[0, c] * cofactor_det(np.delete(A[1:], c, axis=1)) for c in range(n))


def hermitian_split(T):
    """``T = H + iK`` with ``H, K`` Hermitian."""
    H = (T + T.conj().T) / 2
    K = (T - T.conj().T) / 2j
    return H, K


# ---- sections ----

def test_identity_section_in_a_rotated_frame():
    Q = ortho_group.rvs(3, random_state=np.random.default_rng(0))
    S = compress(identity(), DenseFrame(Q))
    assert np.allclose(S.matrix, np.eye(3), atol=1e-14)


def test_diagonal_section_on_coordinate_frame_is_exactly_diagonal():
    S = compress(diag("2^-j"), CoordinateFrame.first(4))
    assert S.is_diagonal
    assert np.array_equal(S.diag, [0.5, 0.25, 0.125, 0.0625])


def test_rank_one_section():
    s = 3.0
    T = rank_one(s, [1.0])
    V = np.array([[1.0], [1.0]]) / np.sqrt(2)
    S = compress(T, DenseFrame(V))
    assert S.matrix.shape == (1, 1) and abs(S.matrix[0, 0] - s / 2) < 1e-15


def test_non_orthonormal_frame_is_rejected():
    with pytest.raises(FrameError):
        DenseFrame(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(FrameError):
        CoordinateFrame([0, 0])


def test_truncation_error_carries_required_dimension():
    with pytest.raises(TruncationError) as err:
        compress(diag("1/j^2"), CoordinateFrame.first(4), N=4, tol=1e-3)
    need = err.value.required_dim
    assert need is not None and diag("1/j^2").trace_tail(need) <= 1e-3
    with pytest.raises(TruncationError):
        compress(diag("2^-j"), CoordinateFrame([5]), N=3)


def test_entry_oracle_without_decay_bound_cannot_meet_a_tolerance():
    T = EntryOracle(lambda i, j: 2.0 ** (-(i + j + 2)))
    with pytest.raises(TruncationError):
        compress(T, CoordinateFrame.first(3), tol=1e-6)
    bounded = EntryOracle(lambda i, j: 2.0 ** (-(i + j + 2)), tail_bound=lambda n: 4.0 ** (-n))
    S = compress(bounded, CoordinateFrame.first(12), tol=1e-6)
    assert S.tail_bound <= 1e-6


def test_trace_minor_examples():
    assert trace_minor(compress(identity(), CoordinateFrame.first(7))) == 7
    assert trace_minor(FiniteSection(np.array([0.5, 0.25, 0.125]), None)) == 0.875
    rng = np.random.default_rng(5)
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    H = (A + A.conj().T) / 2
    assert abs(trace_minor(FiniteSection.of(H)) - np.sum(np.linalg.eigvalsh(H))) < 1e-10


def test_det_minor_examples():
    assert det_minor(compress(identity(), CoordinateFrame.first(5))) == 1.0
    S = compress(diag("1 - 1/(j+1)^2"), CoordinateFrame.first(3))
    assert abs(det_minor(S) - 5 / 8) < 1e-15
    A = np.random.default_rng(6).normal(size=(6, 6))
    want = cofactor_det(A)
    assert abs(det_minor(FiniteSection.of(A)) - want) <= 1e-9 * abs(want)


def test_trace_norm_examples():
    assert trace_norm(FiniteSection(np.array([-0.5, 0.25]), None)) == 0.75
    A = np.random.default_rng(7).normal(size=(4, 4))
    oracle = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(A.T @ A), 0, None)))
    assert abs(trace_norm(FiniteSection.of(A)) - oracle) < 1e-9


def test_exterior_trace_examples():
    A = np.random.default_rng(8).normal(size=(5, 5))
    S = FiniteSection.of(A)
    assert exterior_trace(S, 0) == 1.0
    assert abs(exterior_trace(S, 1) - trace_minor(S)) < 1e-12
    brute = sum(np.linalg.det(A[np.ix_(c, c)]) for c in itertools.combinations(range(5), 3))
    assert abs(exterior_trace(S, 3) - brute) <= 1e-9 * max(1.0, abs(brute))
    assert exterior_trace(S, 6) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1), st.booleans())
def test_exterior_traces_match_principal_minor_sums(n, seed, cplx):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + (1j * rng.normal(size=(n, n)) if cplx else 0)
    got, want = exterior_traces(A), principal_minor_sums(A)
    scale = np.maximum(1.0, np.abs(want))
    assert np.all(np.abs(got - want) <= 1e-9 * scale)


def test_diagonal_exterior_traces_are_elementary_symmetric():
    d = np.array([1.0, 2.0, 3.0])
    assert np.allclose(exterior_traces(FiniteSection(d, None)), [1, 6, 11, 6])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_section_invariants(n, seed):
    rng = np.random.default_rng(seed)
    N = n + 3
    T = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    op = Matrix(T)
    V = unitary_group.rvs(N, random_state=rng)[:, :n]
    S = compress(op, DenseFrame(V))
    # conjugate symmetry, exactly on sections
    Sa = compress(Matrix(T.conj().T), DenseFrame(V))
    assert np.allclose(Sa.matrix, S.adjoint().matrix, atol=1e-13)
    assert abs(trace_minor(Sa) - np.conj(trace_minor(S))) < 1e-12
    # trace-norm domination, and compression does not increase it
    assert abs(trace_minor(S)) <= trace_norm(S) + 1e-10
    assert trace_norm(S) <= trace_norm(FiniteSection.of(T)) + 1e-10
    # another orthonormal basis of the same subspace
    W = unitary_group.rvs(n, random_state=rng) if n > 1 else np.array([[np.exp(0.3j)]])
    S2 = compress(op, DenseFrame(V @ W))
    assert abs(det_minor(S2) - det_minor(S)) < 1e-10 * max(1.0, abs(det_minor(S)))
    assert abs(trace_minor(S2) - trace_minor(S)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_hermitian_split_of_sections(seed):
    # the trace of a section splits into the traces of its Hermitian parts
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    V = unitary_group.rvs(6, random_state=rng)[:, :3]
    H, K = hermitian_split(T)
    assert np.allclose(H + 1j * K, T)
    tr = lambda M: trace_minor(compress(Matrix(M), DenseFrame(V)))  # noqa: E731
    assert abs(tr(T) - (tr(H) + 1j * tr(K))) < 1e-12
    assert abs(np.imag(tr(H))) < 1e-12 and abs(np.imag(tr(K))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(0, 200), min_size=1, max_size=30), st.sets(st.integers(0, 200), max_size=30))
def test_positive_minors_are_monotone(small, extra):
    T = diag("1/j^2")
    a = trace_minor(compress(T, CoordinateFrame(sorted(small))))
    b = trace_minor(compress(T, CoordinateFrame(sorted(small | extra))))
    assert 0 <= a <= b <= math.pi**2 / 6


# ---- filtrations ----

@pytest.mark.parametrize("name", ["coordinate", "eigen-sorted", "adversarial+", "adversarial-", "random"])
def test_filtrations_are_nested(name):
    T = diag("(-1)^(j+1)/j")
    f = Filtration(name, seed=3 if name == "random" else None, pool=256 if name == "eigen-sorted" else None)
    prev = None
    for n in (1, 2, 4, 8):
        V = f.frame(T, n).vectors(512)
        if prev is not None:
            P = V @ V.conj().T
            assert np.linalg.norm(prev - P @ prev) < 1e-10
        prev = V


def test_random_strategy_needs_a_seed():
    with pytest.raises(SpecError) as err:
        Filtration("random")
    assert err.value.field == "seed"
    with pytest.raises(SpecError):
        parse_strategies("coordinate,bogus")
    assert [f.name for f in parse_strategies("coordinate, random", seed=1)] == ["coordinate", "random"]


def test_random_frames_are_reproducible():
    f = Filtration("random", seed=11)
    T = diag("2^-j")
    assert np.array_equal(f.frame(T, 8).V, Filtration("random", seed=11).frame(T, 8).V)


# ---- minor nets ----

def test_trace_net_of_geometric_diagonal():
    rep = minor_net(diag("2^-j"), "trace", ["coordinate"], n_max=40, tol=1e-10)
    assert rep.converged and abs(rep.limit - 1.0) <= 1e-10


def test_trace_net_of_alternating_harmonic_diverges():
    T = diag("(-1)^(j+1)/j")
    rep = minor_net(T, "trace", ["coordinate", "adversarial+"], n_max=512, tol=1e-8)
    assert rep.verdict == "diverged" and rep.witness is not None
    rows = {(s, n): raw for s, n, raw, _, _ in rep.rows}
    coord = [v for (s, n), v in rows.items() if s == "coordinate" and 100 <= n <= 500]
    adv = [v for (s, n), v in rows.items() if s == "adversarial+" and 100 <= n <= 500]
    assert coord and all(abs(v - math.log(2)) <= 0.05 for v in coord)
    assert adv and all(v > 2 for v in adv)


def test_det_net_of_telescoping_diagonal():
    rep = minor_net(diag("1 - 1/(j+1)^2"), "det", ["coordinate"], tol=1e-8)
    assert rep.converged and abs(rep.limit - 0.5) <= 1e-8


def test_det_net_limit_near_zero_is_not_determinant_class():
    rep = minor_net(diag("1 - 1/j"), "det", ["coordinate"], tol=1e-8)
    assert not rep.converged


def test_empty_filtration_list_is_rejected():
    with pytest.raises(ValueError):
        minor_net(diag("2^-j"), "trace", [])


# ---- trace class and Fredholm determinants ----

def test_trace_class_examples():
    r = trace_class_probe(diag("1/j^2"), tol=1e-6, seed=0)
    assert r.trace_class and abs(r.trace - math.pi**2 / 6) <= 1e-6
    assert not trace_class_probe(diag("1/j"), tol=1e-6, seed=0).trace_class
    z = trace_class_probe(Diagonal(EigenSequence.constant(0.0)), seed=0)
    assert z.trace_class and z.trace == 0


def test_fredholm_examples():
    assert fredholm_det(Diagonal(EigenSequence.constant(0.0)), "series").value == 1.0
    s = 0.3
    assert abs(fredholm_det(rank_one(s, [1.0]), "series").value - (1 - s)) < 1e-14
    oracle = float(mpmath.fprod([1 - mpmath.mpf(2) ** -j for j in range(1, 61)]))
    r = fredholm_det(diag("2^-j"), "both", tol=1e-8)
    assert abs(r.value - oracle) <= 1e-8 and abs(oracle - EULER) < 1e-17
    assert abs(r.series - r.eigen) <= 2e-8


def test_fredholm_of_rank_one_off_the_first_axis():
    u = np.array([0.6, 0.8])
    assert abs(fredholm_det(rank_one(0.5, u), "series").value - 0.5) < 1e-14


def test_fredholm_without_tail_bound_fails():
    with pytest.raises(TailBoundError):
        fredholm_det(EntryOracle(lambda i, j: 0.0 * i), "series")
    with pytest.raises(TailBoundError):
        fredholm_det(diag("1/j"), "eigen")


def test_fredholm_truncation_beyond_cap_reports_required_n():
    with pytest.raises(TruncationError) as err:
        fredholm_det(diag("1/j^2"), "series", tol=1e-10, N_cap=64)
    assert err.value.required_dim > 64


def test_fredholm_methods_agree_on_finite_normal_operators():
    rng = np.random.default_rng(2)
    for _ in range(5):
        d = rng.uniform(-0.9, 0.9, size=6)
        T = Diagonal(EigenSequence(tuple(d)), 6)
        r = fredholm_det(T, "both", tol=1e-12)
        assert abs(r.value - np.prod(1 - d)) < 1e-12


# ---- determinant class, block and product laws ----

def test_det_class_equivalence_examples():
    r = det_class_to_trace_class_check(diag("1 - 2^-j"), seed=0)
    assert r.det_class and r.trace_class and r.values_match
    assert abs(r.det_estimate - EULER) < 1e-8
    r = det_class_to_trace_class_check(diag("1 - 1/j"), seed=0)
    assert not r.det_class and not r.trace_class and r.verdicts_match
    r = det_class_to_trace_class_check(identity(), seed=0)
    assert r.det_class and r.trace_class and r.det_estimate == 1.0


def test_equivalence_check_needs_normal_operator():
    with pytest.raises(OperatorFormError):
        det_class_to_trace_class_check(Matrix(np.array([[1.0, 1.0], [0.0, 1.0]])))


def test_block_law_examples():
    r = block_factor_check(diag("1 - 1/(j+1)^2"), 1)
    assert r.residual <= 1e-8 and abs(r.det - 0.5) <= 1e-8
    for k in (0, 3, 10):
        assert block_factor_check(identity(), k).residual == 0.0
    A = BlockDiag((np.array([[2.0]]),), diag("1 - 2^-j"))
    r = block_factor_check(A, 1)
    assert r.residual <= 1e-8 and abs(r.det - 2 * EULER) <= 1e-8


def test_block_law_on_non_diagonal_blocks():
    M = np.array([[1.0, 2.0], [0.5, 3.0]])
    A = BlockDiag((Matrix(M),), diag("1 - 2^-j"))
    r = block_factor_check(A, 2, strategies=("coordinate",))
    assert r.residual <= 1e-8 and abs(r.det - 2.0 * EULER) <= 1e-8


def test_block_law_rejects_splits_it_cannot_respect():
    M = np.array([[1.0, 2.0], [0.5, 3.0]])
    with pytest.raises(OperatorFormError):
        block_factor_check(BlockDiag((Matrix(M),), identity()), 1)
    with pytest.raises(OperatorFormError):
        block_factor_check(rank_one(0.5, [1.0, 1.0]), 1)


def test_product_law_examples():
    assert product_rule_check(identity(), identity()).residual == 0.0
    r = product_rule_check(diag("1 - 2^-j"), diag("1 - 3^-j"))
    assert r.residual <= 1e-7
    oracle = float(mpmath.qp(mpmath.mpf(0.5)) * mpmath.qp(mpmath.mpf(1) / 3))
    assert abs(r.det - oracle) <= 1e-8
    assert product_rule_check(diag("1 - 1/(j+1)^2"), identity()).residual <= 1e-8


def test_product_law_propagates_failed_probes():
    with pytest.raises(ProbeFailedError):
        product_rule_check(diag("1 - 1/j"), identity())


def test_identity_minus_normalizes_to_diagonal():
    r = trace_class_probe(IdentityMinus(diag("1 - 2^-j")), tol=1e-10, seed=0)
    assert r.trace_class and abs(r.trace - 1.0) <= 1e-10


def test_zero_eigenvalue_breaks_the_equivalence():
    # 1 - A = diag(1/j^2) is trace class, yet lambda_1 = 0 forces every
    # determinant minor containing e_1 to vanish: the limit is 0
    r = det_class_to_trace_class_check(diag("1 - 1/j^2"), seed=0)
    assert r.trace_class and not r.det_class and not r.verdicts_match
    assert fredholm_det(diag("1/j^2"), "eigen").value == 0.0
