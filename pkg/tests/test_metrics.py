"""Metric primitives: the weighted metric, Hausdorff distance, and the
comparison-function certificates."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import countable_fif as cf
from countable_fif.metrics import snap_dedup

THETA = cf.ThetaMetric(0.5)

coords = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False,
                   allow_infinity=False)
points = st.tuples(coords, coords)


# ---------------------------------------------------------------------------
# d_theta
# ---------------------------------------------------------------------------

def test_d_theta_identity():
    assert cf.d_theta((0.0, 0.0), (0.0, 0.0), THETA) == 0.0


def test_d_theta_pure_y_scaled():
    assert cf.d_theta((0.0, 1.0), (0.0, 0.0), THETA) == 0.5


def test_d_theta_direct_formula():
    # 1 + 0.125 * 2
    assert cf.d_theta((1.0, 2.0), (0.0, 0.0), cf.ThetaMetric(0.125)) == 1.25


def test_d_theta_rejects_non_finite():
    with pytest.raises(cf.InvalidInputError):
        cf.d_theta((float("nan"), 0.0), (0.0, 0.0), THETA)


def test_theta_metric_range():
    for bad in (0.0, 1.0, -0.3, float("inf")):
        with pytest.raises(cf.InvalidInputError):
            cf.ThetaMetric(bad)


@given(points, points)
def test_d_theta_symmetry_nonneg(p, q):
    d1 = cf.d_theta(p, q, THETA)
    assert d1 >= 0.0
    assert d1 == cf.d_theta(q, p, THETA)


@given(points, points, points)
def test_d_theta_triangle(p, q, r):
    assert cf.d_theta(p, r, THETA) <= cf.d_theta(p, q, THETA) \
        + cf.d_theta(q, r, THETA) + 1e-12


@given(points, points)
def test_d_theta_indiscernible(p, q):
    d = cf.d_theta(p, q, THETA)
    if p == q:
        assert d == 0.0
    else:
        assert d > 0.0 or (abs(p[0] - q[0]) + abs(p[1] - q[1])) < 1e-12


@given(points, points)
def test_metric_equivalence(p, q):
    # theta * d_1 <= d_theta <= d_1
    d1 = cf.d_theta(p, q, cf.ThetaMetric(0.9999999999))  # ~ d_1
    dt = cf.d_theta(p, q, THETA)
    exact_d1 = abs(p[0] - q[0]) + abs(p[1] - q[1])
    assert THETA.theta * exact_d1 <= dt + 1e-12
    assert dt <= exact_d1 + 1e-12
    assert abs(d1 - exact_d1) < 1e-6


# ---------------------------------------------------------------------------
# hausdorff
# ---------------------------------------------------------------------------

def _ps(pts):
    return cf.PointSet(np.asarray(pts, dtype=float), dedup_tol=0.0)


def test_hausdorff_identical_singletons():
    A = _ps([[0.0, 0.0]])
    assert cf.hausdorff(A, A) == 0.0


def test_hausdorff_singletons():
    assert cf.hausdorff(_ps([[0.0, 0.0]]), _ps([[1.0, 0.0]])) == 1.0


def test_hausdorff_directed_dominates():
    A = _ps([[0.0, 0.0], [1.0, 0.0]])
    B = _ps([[0.0, 0.0]])
    assert cf.hausdorff(A, B) == 1.0


def test_hausdorff_empty_rejected():
    with pytest.raises(cf.InvalidInputError):
        cf.hausdorff(np.empty((0, 2)), np.array([[0.0, 0.0]]))


small_sets = st.lists(points, min_size=1, max_size=12)


@settings(deadline=None, max_examples=60)
@given(small_sets, small_sets)
def test_hausdorff_symmetric_selfzero(sa, sb):
    A, B = _ps(sa), _ps(sb)
    assert cf.hausdorff(A, A) == 0.0
    assert cf.hausdorff(A, B) == cf.hausdorff(B, A)


@settings(deadline=None, max_examples=40)
@given(small_sets, small_sets, small_sets)
def test_hausdorff_triangle(sa, sb, sc):
    A, B, C = _ps(sa), _ps(sb), _ps(sc)
    assert cf.hausdorff(A, C) <= cf.hausdorff(A, B) + cf.hausdorff(B, C) + 1e-12


@settings(deadline=None, max_examples=40)
@given(small_sets, small_sets)
def test_hausdorff_metric_equivalence(sa, sb):
    A, B = _ps(sa), _ps(sb)
    d1 = cf.hausdorff(A, B)
    dt = cf.hausdorff(A, B, metric=THETA)
    assert THETA.theta * d1 <= dt + 1e-12
    assert dt <= d1 + 1e-12


# ---------------------------------------------------------------------------
# point sets
# ---------------------------------------------------------------------------

def test_pointset_dedup_separation():
    rng = np.random.default_rng(0)
    ps = cf.PointSet(rng.uniform(size=(500, 2)), dedup_tol=1e-2)
    pts = ps.pts
    dx = np.abs(pts[:, None, 0] - pts[None, :, 0])
    dy = np.abs(pts[:, None, 1] - pts[None, :, 1])
    sep = np.maximum(dx, dy) + np.eye(len(pts)) * 1e9
    assert sep.min() >= 0.99e-2


def test_pointset_rejects_empty_and_nan():
    with pytest.raises(cf.InvalidInputError):
        cf.PointSet(np.empty((0, 2)))
    with pytest.raises(cf.InvalidInputError):
        cf.PointSet(np.array([[np.nan, 0.0]]))


def test_snap_dedup_merges():
    pts = np.array([[0.0, 0.0], [1e-9, 1e-9], [1.0, 1.0]])
    assert snap_dedup(pts, 1e-7).shape[0] == 2


# ---------------------------------------------------------------------------
# comparison functions
# ---------------------------------------------------------------------------

def test_phi_hyperbolic_values():
    phi = cf.ComparisonFunction.rakotch_hyperbolic()
    assert cf.phi_eval(phi, 0.0) == 0.0
    assert cf.phi_eval(phi, 1.0) == 0.5


def test_phi_banach_linear():
    assert cf.phi_eval(cf.ComparisonFunction.banach(0.3), 2.0) == pytest.approx(0.6, abs=1e-15)


def test_phi_rejects_negative():
    with pytest.raises(cf.InvalidInputError):
        cf.ComparisonFunction.rakotch_hyperbolic()(-1.0)
    with pytest.raises(cf.InvalidInputError):
        cf.ComparisonFunction.banach(1.0)


@given(st.floats(min_value=1e-9, max_value=100.0),
       st.floats(min_value=1e-9, max_value=100.0))
def test_phi_hyperbolic_subadditive_and_below_t(s, t):
    phi = cf.ComparisonFunction.rakotch_hyperbolic()
    assert phi(s + t) <= phi(s) + phi(t) + 1e-12
    assert phi(t) < t


def test_certify_hyperbolic():
    cert = cf.certify_rakotch(cf.ComparisonFunction.rakotch_hyperbolic(),
                              [0.1, 1.0, 10.0])
    assert cert.passed
    assert cert.alphas == pytest.approx((1 / 1.1, 1 / 2, 1 / 11), abs=1e-15)


def test_certify_banach_constant_ratio():
    cert = cf.certify_rakotch(cf.ComparisonFunction.banach(0.9), [0.1, 1.0, 10.0])
    assert cert.passed
    assert all(a == pytest.approx(0.9, abs=1e-15) for a in cert.alphas)


def test_certify_identity_fails_everywhere():
    phi = cf.ComparisonFunction.custom(lambda t: t, "identity")
    cert = cf.certify_rakotch(phi, [0.1, 1.0, 10.0])
    assert cert.status == "fail"
    assert not cert.alpha_below_one
    assert cert.worst_alpha == pytest.approx(1.0, abs=1e-15)


def test_certify_inconclusive_custom():
    # ratio dips then rises: not non-increasing, so sampling cannot decide
    phi = cf.ComparisonFunction.custom(lambda t: 0.5 * t + 0.2 * t * t / (1 + t * t),
                                       "wobbly")
    cert = cf.certify_rakotch(phi, list(np.geomspace(0.01, 10.0, 30)))
    assert cert.status == "inconclusive"


def test_certify_grid_validation():
    phi = cf.ComparisonFunction.rakotch_hyperbolic()
    for grid in ([1.0], [1.0, 0.5], [0.0, 1.0], [-1.0, 1.0]):
        with pytest.raises(cf.InvalidInputError):
            cf.certify_rakotch(phi, grid)


def test_phi_iterate_closed_form():
    # the k-fold composite of t/(1+t) is t/(1+k t)
    phi = cf.ComparisonFunction.rakotch_hyperbolic()
    t0 = 0.7
    for k in (1, 3, 10):
        assert phi.iterate(t0, k) == pytest.approx(t0 / (1 + k * t0), abs=1e-12)
