import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anosov_tangent.errors import (
    ExponentOverflow,
    NonOrthogonalEigenbasis,
    NotHyperbolic,
    NotUnimodular,
    RealityViolation,
)
from anosov_tangent.torus import (
    TWO_PI,
    PerturbedMap,
    TorusPoint,
    TrigPoly,
    apply_perturbed,
    derivative_matrix,
    eigen_decompose,
    jacobian_perturbed,
    s0_pow_apply,
    trig_eval,
    wrap_angle,
)

angles = st.floats(-50, 50, allow_nan=False)


def test_fibonacci_eigenvalues(auto):
    assert auto.lambda_plus == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)
    assert auto.lambda_minus == pytest.approx((1 - math.sqrt(5)) / 2, abs=1e-12)
    assert auto.det == -1


def test_fibonacci_eigenvectors(auto):
    m = auto.matrix
    for s in (1, -1):
        v = auto.vec(s)
        assert np.linalg.norm(m @ v - auto.lam(s) * v) < 1e-12
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)
    assert abs(auto.vec(1) @ auto.vec(-1)) < 1e-15
    assert auto.v_plus[0] > 0 and auto.v_minus[0] > 0


def test_lambda_product_is_det_up_to_rounding(auto):
    # both candidate doubles miss -1 by one ulp, so this cannot be exact
    assert abs(auto.lambda_plus * auto.lambda_minus - auto.det) < 1e-15


def test_other_symmetric_hyperbolic_matrix():
    a = eigen_decompose([[2, 1], [1, 1]])
    assert a.det == 1
    assert a.lambda_plus == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-12)


@pytest.mark.parametrize("m, err", [
    ([[2, 0], [0, 1]], NotUnimodular),
    ([[1, 0], [0, 1]], NotHyperbolic),
    ([[0, 1], [-1, 0]], NotHyperbolic),
    ([[1, 1], [0, 1]], NotHyperbolic),
    ([[3, 1], [2, 1]], NonOrthogonalEigenbasis),
])
def test_eigen_decompose_rejects(m, err):
    with pytest.raises(err):
        eigen_decompose(m)


@given(angles)
def test_wrap_angle_range_and_congruence(x):
    w = wrap_angle(x)
    assert 0.0 <= w < TWO_PI
    k = (x - w) / TWO_PI
    assert abs(k - round(k)) < 1e-9


@given(angles, angles, angles, angles)
def test_distance_symmetric_and_bounded(a, b, c, d):
    p, q = TorusPoint(a, b), TorusPoint(c, d)
    assert p.distance(q) == pytest.approx(q.distance(p), abs=1e-12)
    assert p.distance(q) <= math.pi * math.sqrt(2) + 1e-12
    assert p.distance(p) == 0.0


def test_displacement_is_minimal_image():
    p, q = TorusPoint(0.1, 6.2), TorusPoint(6.2, 0.1)
    d = p.displacement_to(q)
    assert np.allclose(d, [6.2 - TWO_PI - 0.1, 0.1 + TWO_PI - 6.2], atol=1e-12)
    assert np.all(np.abs(d) <= math.pi)
    assert p.shifted(d).distance(q) < 1e-12


@given(st.integers(-12, 12), angles, angles)
def test_power_apply_matches_stepping(auto, p, a, b):
    psi = TorusPoint(a, b)
    step = psi
    inv = np.array(auto.inverse, dtype=float)
    for _ in range(abs(p)):
        step = TorusPoint.from_vector((auto.matrix if p > 0 else inv) @ step.as_array())
    assert s0_pow_apply(auto, p, psi).distance(step) < 1e-9 * (1 + auto.lambda_plus ** abs(p))


@given(st.integers(-40, 40))
def test_int_power_inverse(auto, p):
    a = np.array(auto.int_power(p), dtype=object)
    b = np.array(auto.int_power(-p), dtype=object)
    assert (a.dot(b) == np.array([[1, 0], [0, 1]], dtype=object)).all()


def test_int_power_guard(auto):
    auto.int_power(64)
    with pytest.raises(ExponentOverflow):
        auto.int_power(65)


def test_reality_violation():
    with pytest.raises(RealityViolation):
        TrigPoly({(1, 0): [1.0, 0.0]})
    with pytest.raises(RealityViolation):
        TrigPoly({(1, 0): [1.0, 0.0], (-1, 0): [1.0j, 0.0]})


def test_degree_bound_enforced():
    with pytest.raises(ValueError):
        TrigPoly({(1, 0): [1.0, 0.0], (-1, 0): [1.0, 0.0]}, degree_bound=1)


def test_records_round_trip(auto, f2):
    g = TrigPoly.from_records(f2.to_records())
    pts = np.array([[0.3, 1.1], [2.0, 5.0]])
    for alpha in (1, -1):
        assert np.allclose(g.evaluate(auto, alpha, [], pts), f2.evaluate(auto, alpha, [], pts), atol=1e-15)


@given(angles, angles)
def test_evaluate_matches_closed_form(auto, f1, a, b):
    # f = (cos x1, cos x1), so f_alpha = cos x1 * (v_alpha . (1, 1))
    for s in (1, -1):
        expected = math.cos(a) * auto.vec(s).sum()
        assert trig_eval(f1, auto, s, [], TorusPoint(a, b)) == pytest.approx(expected, abs=1e-12)


@given(angles, angles)
def test_directional_derivative_matches_difference(auto, f2, a, b):
    psi = TorusPoint(a, b)
    h = 1e-6
    for alpha in (1, -1):
        for beta in (1, -1):
            shift = h * auto.vec(beta)
            fd = (trig_eval(f2, auto, alpha, [], psi.shifted(shift))
                  - trig_eval(f2, auto, alpha, [], psi.shifted(-shift))) / (2 * h)
            assert trig_eval(f2, auto, alpha, [beta], psi) == pytest.approx(fd, abs=1e-8)


def test_derivatives_commute(auto, f2):
    psi = TorusPoint(0.4, 1.9)
    assert trig_eval(f2, auto, 1, [1, -1], psi) == pytest.approx(trig_eval(f2, auto, 1, [-1, 1], psi), abs=1e-14)


def test_sup_bound_dominates_grid(auto, f2):
    for alpha in (1, -1):
        for derivs in ([], [1], [-1, -1]):
            g = np.linspace(0, TWO_PI, 64, endpoint=False)
            pts = np.array([[x, y] for x in g for y in g])
            vals = f2.evaluate(auto, alpha, derivs, pts)
            assert np.abs(vals).max() <= f2.sup_bound(auto, alpha, derivs) + 1e-12


def test_zero_function(auto, zero):
    assert zero.is_zero()
    assert trig_eval(zero, auto, 1, [-1], TorusPoint(1.0, 2.0)) == 0.0
    assert zero.grid_sup(auto) == 0.0


def test_perturbed_map_radius_warning(auto, f1):
    with pytest.warns(RuntimeWarning):
        pm = PerturbedMap(auto, f1, 0.02)
    assert pm.radius_warning
    assert not PerturbedMap(auto, f1, 0.0).radius_warning


def test_jacobian_matches_difference(auto, f2):
    pm = PerturbedMap(auto, f2, 0.03)
    psi = TorusPoint(1.3, 4.4)
    h = 1e-6
    J = np.zeros((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        J[:, j] = (apply_perturbed(pm, psi.shifted(-e)).displacement_to(apply_perturbed(pm, psi.shifted(e)))) / (2 * h)
    assert np.allclose(J, jacobian_perturbed(pm, psi), atol=1e-7)


def test_derivative_matrix_of_cosine(auto, f1):
    psi = TorusPoint(0.8, 0.1)
    expected = np.array([[-math.sin(0.8), 0.0], [-math.sin(0.8), 0.0]])
    assert np.allclose(derivative_matrix(f1, auto, psi), expected, atol=1e-14)
