import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcalc.bochner import (
    ApproximationBasis,
    LinearMap,
    approximant_sets,
    approximation_defect,
    bochner_integrate,
    build_approximant,
    convex_hull_residual,
    default_basis,
    essential_bound_probe,
    essential_separability_probe,
    pushforward_check,
    simple_integral,
)
from netcalc.errors import (
    InconclusiveIntegralError,
    NotBochnerApproximableError,
    NotIntegrallyBoundedError,
    PossiblyInfiniteError,
    UnsupportedPreimageError,
)
from netcalc.lcspace import (
    ContinuousOn01,
    CountableDenseSet,
    Euclidean,
    FrechetSequences,
    LcsVector,
    WeightedL1,
)
from netcalc.measure import (
    DiscreteSpace,
    Interval01,
    IntervalSet,
    MeasurableFn,
    PiecewisePolynomial,
    PointSet,
    SimpleFunction,
    scalar_integral,
)
from netcalc.sequences import parse_sequence


def brute_force_sets(fvals, centers, family, k, n):
    """D_j^{1/n} straight from the set definitions, one point at a time."""
    delta = 1.0 / n
    A = [
        {x for x, fx in fvals.items()
         if family.eval(k, fx) > delta and family.eval(k, fx - centers[j]) < delta}
        for j in range(n)
    ]
    D, seen = {}, set()
    for j in range(n):
        D[j + 1] = A[j] - seen
        seen |= A[j]
    return D


def test_simple_integral_weighted_sum():
    s = SimpleFunction.from_atoms([(PointSet({1}), [1.0, 0.0]), (PointSet({2}), [0.0, 1.0])])
    v = simple_integral(DiscreteSpace((1, 2)), s)
    assert np.array_equal(v.coords, [1.0, 2.0])


def test_simple_integral_of_empty_function():
    v = simple_integral(DiscreteSpace((1, 2)), SimpleFunction.empty("discrete", 2))
    assert np.array_equal(v.coords, [0.0, 0.0])


def test_simple_integral_of_split_interval_atom():
    w = LcsVector(np.array([3.0, -1.0]))
    s = SimpleFunction.from_atoms([(IntervalSet(((0.0, 0.5),)), w), (IntervalSet(((0.5, 1.0),)), w)])
    assert simple_integral(Interval01(), s).allclose(w, atol=1e-15)


def test_simple_integral_rejects_infinite_atoms():
    space = DiscreteSpace(parse_sequence("1/j^0.5"))  # weights not summable
    s = SimpleFunction.from_atoms([(PointSet(frozenset(), 1), [1.0])])
    with pytest.raises(PossiblyInfiniteError):
        simple_integral(space, s)


def test_approximant_reproduces_identity_on_three_points():
    X, f, fam = DiscreteSpace((1, 1, 1)), MeasurableFn.table([1, 2, 3]), Euclidean(1)
    basis = default_basis(X, f, fam, 1)
    s = build_approximant(X, f, fam, basis, 10)
    assert np.allclose(s.evaluate([1, 2, 3]), f.values([1, 2, 3]))
    sets = approximant_sets(X, f, fam, basis, 10)
    assert [sets[j].tolist() for j in (1, 2, 3)] == [[1], [2], [3]]
    assert approximation_defect(X, f, s, fam, 1) == 0.0


def test_approximant_of_zero_function_is_empty():
    X, f, fam = DiscreteSpace((1, 1, 1)), MeasurableFn.table([0, 0, 0]), Euclidean(1)
    s = build_approximant(X, f, fam, default_basis(X, f, fam, 1), 4)
    assert s.natoms == 0


def test_constant_function_gives_single_atom():
    X, f, fam = DiscreteSpace((1, 1)), MeasurableFn.table([[1, 1], [1, 1]]), Euclidean(2)
    s = build_approximant(X, f, fam, default_basis(X, f, fam, 1), 2)
    (A, v), = s.atoms
    assert A.indices == frozenset({1, 2}) and np.array_equal(v.coords, [1.0, 1.0])


def test_defect_of_constant_approximation():
    X, f, fam = DiscreteSpace((1, 1, 1)), MeasurableFn.table([1, 2, 3]), Euclidean(1)
    s = SimpleFunction.from_atoms([(PointSet({1, 2, 3}), [2.0])])
    assert approximation_defect(X, f, s, fam, 1) == 2.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 30), st.sampled_from(["euclidean", "l1", "frechet"]))
def test_constructed_sets_match_brute_force(seed, n, famname):
    rng = np.random.default_rng(seed)
    m, d = 9, 3
    rows = np.round(rng.normal(size=(m, d)), 1)
    rows[rng.random(m) < 0.2] = 0.0
    f = MeasurableFn.table(rows)
    X = DiscreteSpace(tuple(rng.random(m) + 0.1))
    fam = {"euclidean": Euclidean(d), "l1": WeightedL1((1.0, 0.5, 2.0)), "frechet": FrechetSequences()}[famname]
    k = 2 if famname == "frechet" else 1
    # a dense set that mixes image points with nearby perturbations
    pts = np.vstack([rows + rng.normal(scale=0.05, size=rows.shape), rows])
    dense = CountableDenseSet(pts, rng.permutation(pts.shape[0]))
    basis = ApproximationBasis(k, dense)
    got = approximant_sets(X, f, fam, basis, n)
    fvals = {x: rows[x - 1] for x in range(1, m + 1)}
    want = brute_force_sets(fvals, dense.centers(n), fam, k, n)
    assert {j: set(v.tolist()) for j, v in got.items()} == want
    s = build_approximant(X, f, fam, basis, n)
    c = dense.centers(n)
    expect = np.zeros((m, d))
    for j, pts_j in want.items():
        for x in pts_j:
            expect[x - 1] = c[j - 1]
    assert np.allclose(s.evaluate(np.arange(1, m + 1)), expect)


def test_defects_decrease_on_discrete_space():
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(20, 2))
    X, f, fam = DiscreteSpace(tuple(np.full(20, 0.05))), MeasurableFn.table(rows), Euclidean(2)
    basis = default_basis(X, f, fam, 1)
    d = [approximation_defect(X, f, build_approximant(X, f, fam, basis, n), fam, 1) for n in range(1, 51)]
    assert d[-1] < 1e-6
    assert min(i for i, x in enumerate(d) if x < 1) < 50
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_integral_two_point_space():
    r = bochner_integrate(DiscreteSpace((1, 2)), MeasurableFn.table([[1, 0], [0, 1]]), Euclidean(2))
    assert np.abs(r.value.coords - [1.0, 2.0]).max() <= 1e-12
    assert all(v < 1 for v in r.per_seminorm_defect.values())
    assert r.report.converged


def test_integral_on_interval_moderate_tolerance():
    f = PiecewisePolynomial.from_coeffs([[0, 1], [0, 0, 1]])
    r = bochner_integrate(Interval01(), f, Euclidean(2), tol=1e-3)
    assert np.abs(r.value.coords - [0.5, 1 / 3]).max() <= 1e-3
    assert r.per_seminorm_defect[1] < 1e-3


def test_integral_on_interval_with_pieces():
    # hat function with a 0.5 breakpoint, arc length 2*sqrt(0.5) < 2
    C = np.array([[[0.0, 1.0]], [[1.0, -1.0]]])
    f = PiecewisePolynomial.from_coeffs(C, (0.0, 0.5, 1.0))
    r = bochner_integrate(Interval01(), f, Euclidean(1), tol=1e-4, atom_budget=2**15)
    assert abs(r.value.coords[0] - 0.25) <= 1e-4


def test_integral_of_unit_vectors_in_sequence_space():
    L = 40
    eye = np.vstack([np.eye(L), np.zeros((1, L))])
    f = MeasurableFn(lambda x: eye[np.minimum(np.asarray(x), L + 1) - 1], L, 1.0)
    space = DiscreteSpace(parse_sequence("2^-j"))
    r = bochner_integrate(space, f, FrechetSequences(), tol=1e-12, depth=6)
    want = 2.0 ** -np.arange(1, L + 1)
    for k in r.covered:
        assert FrechetSequences().eval(k, r.value.coords - want) <= 1e-12


def test_unbounded_on_infinite_space_needs_bound():
    f = MeasurableFn(lambda x: np.asarray(x, float)[:, None], 1)
    with pytest.raises(NotIntegrallyBoundedError):
        bochner_integrate(DiscreteSpace(parse_sequence("1/j^2")), f, Euclidean(1))


def test_atom_budget_is_enforced():
    f = PiecewisePolynomial.from_coeffs([[0, 1], [0, 0, 1]])
    with pytest.raises(InconclusiveIntegralError) as err:
        bochner_integrate(Interval01(), f, Euclidean(2), tol=1e-6, atom_budget=300)
    assert err.value.report.rows
    with pytest.raises(NotBochnerApproximableError):
        build_approximant(Interval01(), f, Euclidean(2), default_basis(Interval01(), f, Euclidean(2), 1), 301,
                          atom_budget=300)


def test_non_quadratic_preimage_is_rejected():
    f = PiecewisePolynomial.from_coeffs([[0, 1], [0, 0, 1]])
    fam = WeightedL1((1.0, 1.0))
    with pytest.raises(UnsupportedPreimageError, match="preimage"):
        build_approximant(Interval01(), f, fam, default_basis(Interval01(), f, fam, 1), 3)


def test_identity_pushforward():
    X, f = DiscreteSpace((1, 2)), MeasurableFn.table([[1, 0], [0, 1]])
    assert pushforward_check(X, f, LinearMap(np.eye(2)), Euclidean(2), Euclidean(2)) <= 1e-12


def test_rotation_pushforward_on_discrete_space():
    X, f = DiscreteSpace((1, 2)), MeasurableFn.table([[1, 0], [0, 1]])
    R = LinearMap([[0.0, -1.0], [1.0, 0.0]])
    assert pushforward_check(X, f, R, Euclidean(2), Euclidean(2)) <= 1e-12


def test_functional_pushforward_on_interval():
    f = PiecewisePolynomial.from_coeffs([[0, 1], [0, 0, 1]])
    alpha = LinearMap.functional([1.0, 0.0])
    tol = 1e-3
    assert pushforward_check(Interval01(), f, alpha, Euclidean(2), Euclidean(1), tol=tol) <= 2 * tol


def test_scalar_consistency_on_interval():
    f = PiecewisePolynomial.from_coeffs([[0.2, 0, 0.5]])
    tol = 1e-4
    r = bochner_integrate(Interval01(), f, Euclidean(1), tol=tol, atom_budget=2**15)
    ref = scalar_integral(Interval01(), lambda x: 0.2 + 0.5 * x**2, 1e-12)
    assert abs(r.value.coords[0] - ref) <= tol


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(-3, 3), st.integers(-3, 3))
def test_linearity_on_discrete_spaces(seed, a, b):
    # values on a 0.1 lattice: every nonzero p(f(x)) exceeds 1/n once n > 10,
    # so the approximants become exact well inside the atom budget
    rng = np.random.default_rng(seed)
    F, G = np.round(rng.normal(size=(6, 2)), 1), np.round(rng.normal(size=(6, 2)), 1)
    X = DiscreteSpace(tuple(rng.random(6)))
    tol = 1e-9
    fam = Euclidean(2)
    I = lambda rows: bochner_integrate(X, MeasurableFn.table(rows), fam, tol=tol).value.coords  # noqa: E731
    lhs = I(a * F + b * G)
    rhs = a * I(F) + b * I(G)
    assert fam.eval(1, lhs - rhs) <= 3 * tol


def test_integral_lies_in_hull_of_image():
    rng = np.random.default_rng(5)
    rows = rng.normal(size=(7, 2))
    w = rng.random(7)
    X = DiscreteSpace(tuple(w / w.sum()))
    r = bochner_integrate(X, MeasurableFn.table(rows), Euclidean(2), tol=1e-9)
    assert convex_hull_residual(r.value.coords, rows) <= 1e-9
    assert convex_hull_residual([10.0, 10.0], rows) > 1


def test_continuous_function_space_values():
    fam = ContinuousOn01(nodes=5)
    rows = np.array([fam.grid * c for c in (1.0, 2.0, 3.0)])
    X = DiscreteSpace((0.5, 0.25, 0.25))
    r = bochner_integrate(X, MeasurableFn.table(rows), fam, tol=1e-10)
    assert np.allclose(r.value.coords, fam.grid * 1.75, atol=1e-12)


def test_advisory_probes():
    X, f = DiscreteSpace((1, 2)), MeasurableFn.table([[3, 4], [0, 1]])
    assert essential_bound_probe(X, f, Euclidean(2), [1]) == {1: 5.0}
    basis = default_basis(X, f, Euclidean(2), 1)
    assert essential_separability_probe(X, f, Euclidean(2), basis, 2) == 0.0
