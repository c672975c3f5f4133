import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cbilliards import _poly

from conftest import cplx


def poly(terms, d):
    P = np.zeros((d + 1, d + 1), dtype=complex)
    for (i, j), c in terms.items():
        P[i, j] = c
    return P


CIRCLE = poly({(2, 0): 1, (0, 2): 1, (0, 0): -1}, 2)
PARAB = poly({(2, 0): 1, (0, 1): -1}, 2)


@given(cplx, cplx)
def test_mul_matches_pointwise_product(x, y):
    prod = _poly.mul(CIRCLE, PARAB)
    assert _poly.evaluate(prod, x, y) == pytest.approx(
        _poly.evaluate(CIRCLE, x, y) * _poly.evaluate(PARAB, x, y), rel=1e-9, abs=1e-9)


@given(cplx, cplx)
def test_derivatives_match_finite_differences(x, y):
    h = 1e-6
    fx = (_poly.evaluate(CIRCLE, x + h, y) - _poly.evaluate(CIRCLE, x - h, y)) / (2 * h)
    assert _poly.evaluate(_poly.deriv_x(CIRCLE), x, y) == pytest.approx(fx, rel=1e-6, abs=1e-6)
    assert _poly.evaluate(_poly.deriv_y(PARAB), x, y) == pytest.approx(-1)


@given(st.floats(-3, 3), cplx, cplx)
def test_compose_affine(theta, x, y):
    M = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    shift = np.array([0.5, -1.0])
    Q = _poly.compose_affine(PARAB, M, shift)
    u = M @ np.array([x, y]) + shift
    assert _poly.evaluate(Q, x, y) == pytest.approx(_poly.evaluate(PARAB, *u), rel=1e-9, abs=1e-8)


def test_resultant_of_circle_and_parabola():
    # eliminating y = x^2 gives x^4 + x^2 - 1
    r = _poly.resultant_y(CIRCLE, PARAB)
    r = r / r[np.nonzero(np.abs(r) > 1e-12)[0].max()]
    assert np.allclose(np.trim_zeros(r, "b"), [-1, 0, 1, 0, 1])


def test_solve_bivariate_circle_parabola():
    sols = _poly.solve_bivariate(CIRCLE, PARAB)
    assert len(sols) == 4
    for x, y in sols:
        assert abs(_poly.evaluate(CIRCLE, x, y)) < 1e-10
        assert abs(_poly.evaluate(PARAB, x, y)) < 1e-10
    xs2 = sorted(np.round((np.array(sols)[:, 0] ** 2).real, 9))
    golden = (np.sqrt(5) - 1) / 2
    assert np.allclose(xs2, sorted([-golden - 1, -golden - 1, golden, golden]))


def test_common_factor_rejected():
    with pytest.raises(_poly.EliminationError):
        _poly.solve_bivariate(CIRCLE, _poly.mul(CIRCLE, PARAB))
