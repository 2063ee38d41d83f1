import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qbohm import qcalc
from qbohm.errors import DomainError, GridSizeError, SingularityError
from qbohm.fields import RealField, SpatialGrid
from qbohm.qcalc import DeformationParams


# -- q-exponential algebra ---------------------------------------------------

def test_q_exp_examples():
    assert qcalc.q_exp(0.0, 0.3) == 1.0
    assert qcalc.q_exp(1.0, 1.0) == pytest.approx(math.e, rel=1e-15)
    assert qcalc.q_exp(1.0, 0.0) == pytest.approx(2.0, rel=1e-15)


def test_q_exp_cutoff_is_zero():
    # base 1 + (1-q) u <= 0
    assert qcalc.q_exp(-2.0, 0.0) == 0.0
    assert np.all(qcalc.q_exp(np.array([-1.0, -5.0]), 0.0) == 0.0)


def test_q_exp_limit_branch_matches_exp():
    u = np.linspace(-2, 2, 11)
    np.testing.assert_allclose(qcalc.q_exp(u, 1.0 - 1e-10), np.exp(u), rtol=1e-12)
    np.testing.assert_allclose(qcalc.q_exp(u, 1.0 - 1e-6), np.exp(u), rtol=1e-5)


def test_q_log_examples():
    assert qcalc.q_log(1.0, 0.4) == 0.0
    assert qcalc.q_log(math.e, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert qcalc.q_log(2.0, 0.0) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("y", [0.0, -1.0])
def test_q_log_rejects_non_positive(y):
    with pytest.raises(DomainError):
        qcalc.q_log(y, 0.5)


def test_q_add_sub_examples():
    assert qcalc.q_add(0.3, 0.4, 1.0) == pytest.approx(0.7)
    assert qcalc.q_add(1.0, 1.0, 0.0) == 3.0
    assert qcalc.q_sub(3.0, 1.0, 0.0) == 1.0


def test_q_sub_pole():
    with pytest.raises(DomainError):
        qcalc.q_sub(1.0, 1.0, 2.0)   # 1 + (1-2)*1 = 0


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-0.9, 3.0), b=st.floats(-0.9, 3.0), q=st.floats(0.0, 1.9))
def test_group_law(a, b, q):
    lhs = qcalc.q_exp(qcalc.q_add(a, b, q), q)
    rhs = qcalc.q_exp(a, q) * qcalc.q_exp(b, q)
    if rhs > 1e-300 and lhs > 1e-300:
        assert lhs == pytest.approx(rhs, rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-0.5, 0.5), q=st.floats(0.0, 1.9))
def test_q_sub_inverts_q_add(a, b, q):
    assert qcalc.q_sub(qcalc.q_add(a, b, q), b, q) == pytest.approx(a, rel=1e-10, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(y=st.floats(1e-3, 1e3), q=st.floats(0.0, 1.9))
def test_q_log_round_trip(y, q):
    assert qcalc.q_exp(qcalc.q_log(y, q), q) == pytest.approx(y, rel=1e-12)


# -- DeformationParams ---------------------------------------------------------

def test_params_from_q():
    p = DeformationParams.from_q(0.5, 2.0)
    assert p.gamma == 0.25
    assert p.gamma * p.xi == pytest.approx(1 - p.q, rel=1e-15)


def test_params_inconsistent():
    with pytest.raises(DomainError):
        DeformationParams(gamma=1.0, q=0.5, xi=2.0)


def test_params_reject_non_finite():
    with pytest.raises(DomainError):
        DeformationParams(gamma=float("nan"))


# -- coordinate map ------------------------------------------------------------

def test_coordinate_examples():
    x = np.linspace(0, 3, 7)
    np.testing.assert_array_equal(qcalc.deformed_coordinate(x, DeformationParams(0.0)), x)
    assert qcalc.deformed_coordinate(math.e - 1, DeformationParams(1.0)) == pytest.approx(1.0, rel=1e-15)
    g, L = 2.5, 1.0
    assert qcalc.deformed_coordinate(L, DeformationParams(g)) == pytest.approx(math.log1p(g * L) / g)


def test_coordinate_pole_named():
    with pytest.raises(SingularityError, match=r"-1/gamma = -0.5"):
        qcalc.deformed_coordinate(np.array([0.0, -0.6]), DeformationParams(2.0))


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-0.99, 50.0), g=st.floats(-1.0, 5.0))
def test_coordinate_round_trip(x, g):
    assume(1.0 + g * x > 1e-6)
    p = DeformationParams(g)
    u = qcalc.deformed_coordinate(x, p)
    assert qcalc.inverse_coordinate(u, p) == pytest.approx(x, rel=1e-12, abs=1e-14)


def test_coordinate_monotone():
    x = np.linspace(-0.9, 10, 500)
    u = qcalc.deformed_coordinate(x, DeformationParams(1.0))
    assert np.all(np.diff(u) > 0)


def test_coordinate_tiny_gamma_is_identity():
    x = np.linspace(0, 1, 5)
    np.testing.assert_array_equal(qcalc.deformed_coordinate(x, DeformationParams(1e-14)), x)


# -- derivative and integral ---------------------------------------------------

def _field(values, gamma=0.0, a=0.0, b=1.0, kind="physical_x"):
    g = SpatialGrid(a, b, len(values), kind, DeformationParams(gamma))
    return RealField(g, values)


def test_derivative_of_constant():
    f = _field(np.full(101, 3.0), gamma=1.0)
    np.testing.assert_allclose(qcalc.deformed_derivative(f).values, 0.0, atol=1e-12)


@pytest.mark.parametrize("order,tol", [(2, 1e-12), (4, 1e-12)])
def test_derivative_of_square(order, tol):
    x = np.linspace(0, 1, 101)
    d = qcalc.deformed_derivative(_field(x ** 2), order=order).values
    np.testing.assert_allclose(d, 2 * x, atol=tol)


def test_second_order_convergence():
    errs = []
    for n in (101, 201):
        x = np.linspace(0, 1, n)
        d = qcalc.deformed_derivative(_field(np.sin(3 * x)), order=2).values
        errs.append(np.max(np.abs(d - 3 * np.cos(3 * x))))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_deformed_derivative_of_q_exponential():
    # D exp_q(x/xi) = exp_q(x/xi)^q / xi, i.e. d/du exp(u/xi) in the deformed coordinate
    q, xi = 0.5, 2.0
    p = DeformationParams.from_q(q, xi)
    x = np.linspace(0, 3, 3001)
    f = qcalc.q_exp(x / xi, q)
    d = qcalc.deformed_derivative(_field(f, p.gamma, 0, 3)).values
    np.testing.assert_allclose(d, f / xi, rtol=1e-9)
    # same function on a u grid: exp(u/xi)
    u = qcalc.deformed_coordinate(x, p)
    np.testing.assert_allclose(np.exp(u / xi), f, rtol=1e-12)


def test_derivative_on_u_grid_matches_x_grid():
    p = DeformationParams(1.0)
    gx = SpatialGrid(0, 1, 2001, "physical_x", p)
    gu = gx.to_deformed()
    fx = RealField(gx, np.sin(2 * gx.x))
    fu = RealField(gu, np.sin(2 * gu.x))
    np.testing.assert_allclose(qcalc.x_derivative(fx).values, 2 * np.cos(2 * gx.x), atol=1e-9)
    np.testing.assert_allclose(qcalc.x_derivative(fu).values, 2 * np.cos(2 * gu.x), atol=1e-9)
    np.testing.assert_allclose(qcalc.deformed_derivative(fu).values,
                               (1 + gu.x) * 2 * np.cos(2 * gu.x), atol=1e-9)


def test_derivative_grid_too_small():
    g = SpatialGrid(0, 1, 3)
    with pytest.raises(GridSizeError):
        qcalc.deformed_derivative(RealField(g, [0.0, 1.0, 2.0]))
    assert np.allclose(qcalc.deformed_derivative(RealField(g, [0.0, 1.0, 2.0]), order=2).values, 2.0)


def test_q_integral_examples():
    assert qcalc.q_integral(_field(np.ones(101))) == pytest.approx(1.0, rel=1e-14)
    assert qcalc.q_integral(_field(np.ones(2001), gamma=1.0, b=2.0)) == pytest.approx(math.log(3.0), rel=1e-12)
    # even point count
    assert qcalc.q_integral(_field(np.ones(2000), gamma=1.0, b=2.0)) == pytest.approx(math.log(3.0), rel=1e-10)


def test_q_integral_of_well_density_is_one():
    from qbohm import well
    spec = well.WellSpec.from_gammaL(1.0)
    _, phi = well.sample_state(spec, 2, 2001)
    assert qcalc.q_integral(phi.density()) == pytest.approx(1.0, rel=1e-10)


def test_fundamental_theorem():
    p = DeformationParams(2.0)
    g = SpatialGrid(0, 1.5, 801, "physical_x", p)
    f = RealField(g, np.exp(-g.x) * np.cos(4 * g.x))
    total = qcalc.q_integral(qcalc.deformed_derivative(f))
    assert total == pytest.approx(f.values[-1] - f.values[0], abs=1e-8)


def test_q_integral_singular_domain():
    # a u grid whose factor is positive by construction; physical grids are validated at build time
    with pytest.raises(SingularityError):
        SpatialGrid(-2.0, 1.0, 11, "physical_x", DeformationParams(1.0))


def test_gamma_zero_matches_standard():
    x = np.linspace(0, 1, 301)
    f = _field(np.exp(x), gamma=0.0)
    assert qcalc.q_integral(f) == qcalc.integral(f)
    np.testing.assert_array_equal(qcalc.deformed_derivative(f).values, qcalc.x_derivative(f).values)
