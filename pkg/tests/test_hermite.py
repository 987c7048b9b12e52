import math

import numpy as np
import pytest
from scipy.special import expit

from chaosco import hermite


def test_low_orders_closed_forms():
    assert hermite.eval_normalized(0, 3.7) == 1.0
    assert hermite.eval_normalized(1, 1.5) == pytest.approx(1.5, abs=1e-15)
    assert hermite.eval_normalized(2, 0.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    xs = np.linspace(-10, 10, 41)
    h2 = hermite.eval_normalized(2, xs)
    h3 = hermite.eval_normalized(3, xs)
    assert np.max(np.abs(h2 - (xs**2 - 1) / math.sqrt(2))) < 1e-13 * np.max(np.abs(h2))
    assert np.max(np.abs(h3 - (xs**3 - 3 * xs) / math.sqrt(6))) < 1e-12


def test_eval_all_consistent():
    xs = np.linspace(-4, 4, 17)
    table = hermite.eval_all(8, xs)
    for m in range(9):
        assert np.allclose(table[m], hermite.eval_normalized(m, xs), atol=1e-13)


def test_fourier_hermite_products():
    assert hermite.eval_fourier_hermite((), [1.0, 2.0]) == 1.0
    assert hermite.eval_fourier_hermite((1, 1), [2.0, 0.5]) == pytest.approx(1.0)
    assert hermite.eval_fourier_hermite((2,), [0.0]) == pytest.approx(-1 / math.sqrt(2))
    with pytest.raises(ValueError):
        hermite.eval_fourier_hermite((1, 1), [2.0])


def test_quadrature_small_rules():
    r1 = hermite.gauss_hermite_rule(1)
    assert np.allclose(r1.nodes, [0.0]) and np.allclose(r1.weights, [1.0])
    r2 = hermite.gauss_hermite_rule(2)
    assert np.allclose(r2.nodes, [-1.0, 1.0])
    assert np.allclose(r2.weights, [0.5, 0.5])
    assert r2.integrate(lambda x: x**2) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        hermite.gauss_hermite_rule(0)


def test_quadrature_properties():
    for q in (3, 7, 16):
        rule = hermite.gauss_hermite_rule(q)
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights > 0)
        assert abs(np.sum(rule.weights) - 1.0) < 1e-14
        # odd-degree moment at the exactness edge
        assert abs(rule.integrate(lambda x: x ** (2 * q - 1))) < 1e-10


def test_quadrature_normal_moments():
    rule = hermite.gauss_hermite_rule(10)
    # E[Z^{2k}] = (2k-1)!!
    for k, expect in [(1, 1.0), (2, 3.0), (3, 15.0), (4, 105.0)]:
        assert rule.integrate(lambda x: x ** (2 * k)) == pytest.approx(expect, rel=1e-13)


def test_orthonormality_via_quadrature():
    rule = hermite.gauss_hermite_rule(20)
    table = hermite.eval_all(10, rule.nodes)
    gram = table @ (table * rule.weights).T
    assert np.max(np.abs(gram - np.eye(11))) < 1e-12


def test_indicator_integral_examples():
    assert hermite.hermite_indicator_integral(0, 0.0) == pytest.approx(0.5)
    assert hermite.hermite_indicator_integral(1, 0.0) == pytest.approx(
        1 / math.sqrt(2 * math.pi)
    )
    assert hermite.hermite_indicator_integral(2, 0.0) == pytest.approx(0.0, abs=1e-16)


def test_indicator_integral_limits():
    for m in range(6):
        assert abs(hermite.hermite_indicator_integral(m, 40.0)) < 1e-300
        expect = 1.0 if m == 0 else 0.0
        assert hermite.hermite_indicator_integral(m, -12.0) == pytest.approx(
            expect, abs=1e-12
        )


def test_indicator_integral_against_mollified_quadrature():
    # smooth ramp approximation of the step, integrated by quadrature,
    # approaches the closed form as the ramp sharpens
    rule = hermite.gauss_hermite_rule(400)
    k_threshold = 0.3
    for m in range(5):
        closed = hermite.hermite_indicator_integral(m, k_threshold)
        for width, tol in [(0.1, 0.05), (0.02, 0.01)]:
            smooth = rule.integrate(
                lambda x: hermite.eval_normalized(m, x)
                * expit((x - k_threshold) / width)
            )
            assert abs(smooth - closed) < tol
