import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from netcalc.errors import UnknownSpaceError
from netcalc.lcspace import (
    ContinuousOn01,
    CurveDenseSet,
    Euclidean,
    FrechetSequences,
    GeometricTail,
    LcsVector,
    WeightedL1,
    dense_from_image,
    directed,
    make_space,
    van_der_corput,
)

FAMILIES = [Euclidean(3), WeightedL1((1.0, 2.0, 0.5)), FrechetSequences(), ContinuousOn01(nodes=3)]
vec3 = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3).map(np.array)


def test_euclidean_norm():
    assert Euclidean(2).eval(1, (3, 4)) == 5.0


def test_frechet_takes_max_of_leading_entries():
    assert FrechetSequences().eval(3, (1, -2, 0.5, 99)) == 2.0


def test_sup_norm_of_square_is_one():
    fam = ContinuousOn01()
    val, pad = fam.sup(np.polynomial.Polynomial([0, 0, 1]))
    assert val == 1.0 and pad == 0.0
    assert fam.eval(1, fam.function(lambda x: x**2)) == 1.0


def test_sup_norm_with_lipschitz_padding():
    val, pad = ContinuousOn01(nodes=65).sup(lambda x: np.sin(7 * x), lipschitz=7.0)
    assert val <= 1.0 <= val + pad + 1e-12


def test_polynomial_sup_uses_critical_points():
    p = np.polynomial.Polynomial([0, 1, -1])  # max 1/4 at x = 1/2
    assert ContinuousOn01().sup(p)[0] == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.space_id)
def test_zero_has_zero_seminorms(fam):
    for k in fam.chain(4):
        assert fam.eval(k, np.zeros(3)) == 0.0


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, st.floats(-50, 50))
def test_seminorm_axioms(u, v, c):
    for fam in FAMILIES:
        for k in fam.chain(3):
            pu, pv = fam.eval(k, u), fam.eval(k, v)
            assert fam.eval(k, c * u) == pytest.approx(abs(c) * pu, rel=1e-12, abs=1e-300)
            assert fam.eval(k, u + v) <= pu + pv + 1e-12 * (1 + pu + pv)


@settings(max_examples=60, deadline=None)
@given(vec3)
def test_presentation_is_increasing_and_directed(v):
    fam = FrechetSequences()
    vals = [fam.eval(k, v) for k in range(1, 4)]
    assert vals == sorted(vals)
    for i in range(1, 4):
        for j in range(1, 4):
            assert max(fam.eval(i, v), fam.eval(j, v)) == fam.eval(max(i, j), v)


def test_directed_normalizes_arbitrary_families():
    p1 = lambda X: np.abs(X[..., 0])  # noqa: E731
    p2 = lambda X: np.abs(X[..., 1])  # noqa: E731
    fam = directed([p1, p2])
    v = np.array([3.0, 1.0])
    assert fam.eval(1, v) == 3.0 and fam.eval(2, v) == 3.0
    assert fam.eval(2, np.array([0.0, 5.0])) == 5.0


def test_separation_on_test_vectors():
    fam = FrechetSequences()
    for v in (np.array([0.0, 0.0, 1e-9]), np.array([1.0])):
        assert max(fam.eval(k, v) for k in fam.chain(5)) > 0


def test_frechet_tail_bound_from_geometric_descriptor():
    v = LcsVector(np.array([1.0, 0.5]), GeometricTail(0.5, 0.5))
    assert FrechetSequences().tail_bound(3, v) == 0.25
    assert FrechetSequences().tail_bound(2, v) == 0.0


def test_vector_arithmetic():
    a = LcsVector(np.array([1.0, 2.0]))
    b = LcsVector(np.array([1.0]))
    assert (a + b).allclose(LcsVector(np.array([2.0, 2.0])))
    assert (a - a).allclose(LcsVector(np.zeros(2)))
    assert (a * 2).allclose(LcsVector(np.array([2.0, 4.0])))


def test_make_space_and_unknown_tag():
    assert make_space({"kind": "euclidean", "dim": 2}).eval(1, (3, 4)) == 5.0
    assert make_space("frechet-sequences").count == np.inf
    with pytest.raises(UnknownSpaceError):
        make_space({"kind": "hilbert-cube"})
    with pytest.raises(UnknownSpaceError):
        make_space({"kind": "euclidean"})


def test_two_point_enumeration_alternates():
    d = dense_from_image([(1.0, 0.0), (0.0, 1.0)], 1, Euclidean(2))
    c = d.centers(4)
    assert np.array_equal(c, [[1, 0], [0, 1], [1, 0], [0, 1]])


def test_singleton_enumeration_is_constant():
    d = dense_from_image([(2.0, 3.0)], 1, Euclidean(2))
    assert np.array_equal(d.centers(3), [[2, 3]] * 3)
    assert d.enumerate(5).allclose(LcsVector(np.array([2.0, 3.0])))


def test_empty_image_is_rejected():
    with pytest.raises(ValueError):
        dense_from_image([], 1, Euclidean(2))


def test_circle_samples_are_covered_within_radius():
    x = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    pts = np.stack([np.cos(x), np.sin(x)], axis=1)
    d = dense_from_image(pts, 1, Euclidean(2), eps=0.01)
    centers = d.centers(d.distinct)
    # brute-force nearest neighbour over all samples
    assert cdist(pts, centers).min(axis=1).max() <= 0.01
    # every enumerated point is one of the input points
    assert cdist(centers, pts).min(axis=1).max() <= 1e-9
    # deterministic
    assert np.array_equal(dense_from_image(pts, 1, Euclidean(2), eps=0.01).order, d.order)


def test_van_der_corput_prefixes_are_dyadic_grids():
    for m in range(6):
        v = np.sort(van_der_corput(np.arange(1, 2**m + 2)))
        assert np.array_equal(v, np.linspace(0, 1, 2**m + 1))


def test_curve_centres_cover_a_segment_in_arc_length():
    # f(t) = (t, t^2), arc length 1.4789...
    curve = lambda t: np.stack([t, t**2])  # noqa: E731
    speed = lambda t: np.sqrt(1 + 4 * t**2)  # noqa: E731
    c = CurveDenseSet.from_curve(curve, speed)
    exact = (2 * np.sqrt(5) + np.arcsinh(2)) / 4
    assert c.length == pytest.approx(exact, abs=1e-12)
    n = 2**6 + 1
    t = np.sort(c.parameters(n))
    steps = np.interp(t, c.arc_nodes, c.arc_length)
    assert np.allclose(np.diff(steps), c.length / 2**6, atol=1e-9)
    assert c.centers(n).shape == (n, 2)
