import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from KerrFVR.errors import DomainError
from KerrFVR.kerr_dynamics import (Dynamics, TangentMap, arc_action, ehrenfest_time, flow,
                                   flow_tangent, fractional_revival_time, hamiltonian, omega,
                                   revival_time, tangent_matrices)
from KerrFVR.phase_space import PhasePoint

KERR = Dynamics.kerr()


def _kerr_rhs(_, z):
    r2 = z[0] ** 2 + z[1] ** 2
    return [4.0 * r2 * z[1], -4.0 * r2 * z[0]]


@pytest.mark.parametrize("z0,t", [((1.0, 0.5), 0.3), ((-2.0, 1.5), 0.05), ((5.0, 2.0), -0.071)])
def test_flow_matches_integrator(z0, t):
    """Closed-form flow against Hamilton's equations integrated numerically"""
    sol = solve_ivp(_kerr_rhs, (0.0, t), z0, method="DOP853", rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(flow(np.array(z0), t, KERR), sol.y[:, -1], atol=1e-8)


def test_flow_is_clockwise_and_conserves_energy():
    z = flow(PhasePoint(1.0, 0.0), 0.01, KERR)
    assert isinstance(z, PhasePoint)
    assert z.p < 0.0
    assert hamiltonian(z, KERR) == pytest.approx(1.0)


def test_flow_composition():
    z0 = np.array([1.2, -0.7])
    np.testing.assert_allclose(flow(flow(z0, 0.2, KERR), 0.3, KERR), flow(z0, 0.5, KERR), atol=1e-12)
    np.testing.assert_allclose(flow(flow(z0, 0.4, KERR), -0.4, KERR), z0, atol=1e-12)


def test_tangent_matches_finite_differences():
    z0 = np.array([1.5, -0.4])
    t = 0.23
    step = 1e-6
    columns = []
    for axis in range(2):
        offset = np.zeros(2)
        offset[axis] = step
        columns.append((flow(z0 + offset, t, KERR) - flow(z0 - offset, t, KERR)) / (2 * step))
    np.testing.assert_allclose(tangent_matrices(z0, t, KERR), np.column_stack(columns), atol=1e-6)


def test_tangent_is_symplectic():
    m = tangent_matrices(np.array([[3.0, 1.0], [0.2, -4.0]]), np.array([0.1, -0.7]), KERR)
    np.testing.assert_allclose(np.linalg.det(m), 1.0, atol=1e-10)


def test_flow_tangent_single_point():
    tangent = flow_tangent(PhasePoint(1.0, 1.0), 0.1, KERR)
    assert isinstance(tangent, TangentMap)
    assert tangent.det == pytest.approx(1.0)
    np.testing.assert_allclose(tangent.as_matrix(), tangent_matrices((1.0, 1.0), 0.1, KERR))


def test_harmonic_tangent_is_rotation():
    dyn = Dynamics.harmonic(1.0)
    m = tangent_matrices(np.array([2.0, 1.0]), 0.5, dyn)
    np.testing.assert_allclose(m, [[math.cos(0.5), math.sin(0.5)], [-math.sin(0.5), math.cos(0.5)]])


@pytest.mark.parametrize("z0,t", [((1.0, 0.0), 0.3), ((0.5, -1.2), -0.8), ((3.0, 2.0), 0.07)])
def test_arc_action_matches_quadrature(z0, t):
    """Integral of p dq along the orbit, with qdot = omega p"""
    w = omega(z0, KERR)
    expected, _ = quad(lambda s: w * flow(np.array(z0), s, KERR)[1] ** 2, 0.0, t,
                       limit=400, epsabs=1e-12, epsrel=1e-12)
    assert arc_action(z0, t, KERR) == pytest.approx(expected, abs=1e-9)


def test_arc_action_full_turn():
    """One clockwise period at radius 1 encloses area pi"""
    assert arc_action((1.0, 0.0), math.pi / 2.0, KERR) == pytest.approx(math.pi)
    assert arc_action((1.0, 0.0), 3 * math.pi / 2.0, KERR) == pytest.approx(3 * math.pi)


def test_arc_action_additive():
    z = np.array([0.8, 1.1])
    total = arc_action(z, 0.9, KERR)
    split = arc_action(z, 0.4, KERR) + arc_action(flow(z, 0.4, KERR), 0.5, KERR)
    assert total == pytest.approx(split, abs=1e-12)


def test_time_scales():
    assert revival_time() == pytest.approx(math.pi / 4.0)
    assert ehrenfest_time((5.0, 0.0)) == pytest.approx(2 * math.pi / 100.0)
    assert fractional_revival_time(1, 10) == pytest.approx(math.pi / 20.0)
    assert fractional_revival_time(1, 4) == pytest.approx(math.pi / 8.0)


def test_time_scale_errors():
    with pytest.raises(DomainError, match="origin"):
        ehrenfest_time((0.0, 0.0))
    with pytest.raises(ValueError, match="coprime"):
        fractional_revival_time(2, 4)
    with pytest.raises(ValueError):
        fractional_revival_time(1, 0)


def test_dynamics_validation():
    with pytest.raises(ValueError, match="omega0"):
        Dynamics("harmonic")
    with pytest.raises(ValueError, match="Unknown dynamics"):
        Dynamics("duffing")
