import math

import numpy as np
import pytest

from KerrFVR.diagnostics import autocorr_overlap, normalization
from KerrFVR.phase_space import Field, Grid2D
from KerrFVR.quantum_oracle import (MOMENTUM, POSITION, EvolvedState, autocorr_curve, autocorr_exact,
                                    evolve, kerr_energies, marginal, momentum_density,
                                    position_density, wigner_of_state)
from KerrFVR.states import StateSpec, fock_coefficients, wigner0

T_REV = math.pi / 4.0


@pytest.fixture(scope="module")
def coherent5():
    return fock_coefficients(StateSpec.coherent((5.0, 0.0)), 64)


def test_energies():
    np.testing.assert_array_equal(kerr_energies(3), [1.0, 9.0, 25.0, 49.0])


def test_full_revival(coherent5):
    """Every (2n+1)^2 T_rev differs from T_rev by a multiple of 2 pi"""
    assert autocorr_exact(coherent5, T_REV) == pytest.approx(1.0, abs=1e-10)
    revived = evolve(coherent5, T_REV).fock.coefficients
    np.testing.assert_allclose(revived, coherent5.coefficients * np.exp(-1j * T_REV), atol=1e-10)


def test_autocorr_periodic(coherent5):
    t = np.linspace(0.0, math.pi / 8.0, 9)
    np.testing.assert_allclose(autocorr_exact(coherent5, t + T_REV), autocorr_exact(coherent5, t), atol=1e-10)
    curve = autocorr_curve(coherent5, t)
    np.testing.assert_array_equal(curve.times, t)
    assert curve.a2[0] == pytest.approx(1.0)
    assert np.all(curve.a2 <= 1.0 + 1e-12)


@pytest.mark.parametrize("state", [StateSpec.coherent((2.0, 1.0)), StateSpec.displaced_fock(1, (-1.0, 1.5))])
def test_wigner_at_zero_time_is_initial(state):
    grid = Grid2D.square(6.0, 41)
    field = wigner_of_state(fock_coefficients(state, 48), grid)
    expected = Field.from_function(grid, lambda z: wigner0(state, z))
    np.testing.assert_allclose(field.values, expected.values, atol=1e-10)


@pytest.mark.parametrize("t", [math.pi / 20.0, math.pi / 8.0])
def test_wigner_normalization_and_purity(coherent5, t):
    grid = Grid2D.square(8.0, 161)
    field = wigner_of_state(evolve(coherent5, t), grid)
    assert normalization(field) == pytest.approx(1.0, abs=1e-3)
    assert autocorr_overlap(field, field) == pytest.approx(1.0, abs=2e-3)


def test_evolved_state_records_time(coherent5):
    state = evolve(coherent5, 0.3)
    assert isinstance(state, EvolvedState)
    assert state.time == 0.3
    assert state.fock.norm == pytest.approx(coherent5.norm)


def test_marginals_match_direct_densities():
    state = evolve(fock_coefficients(StateSpec.displaced_fock(1, (5.0, 0.0)), 64), math.pi / 12.0)
    field = wigner_of_state(state, Grid2D.square(10.0, 201))
    q, density = marginal(field, POSITION)
    np.testing.assert_allclose(density, position_density(state, q), atol=1e-5)
    p, density = marginal(field, MOMENTUM)
    assert np.all(np.diff(p) > 0)
    np.testing.assert_allclose(density, momentum_density(state, p), atol=1e-5)


def test_position_density_coherent():
    fock = fock_coefficients(StateSpec.coherent((2.0, 0.0)), 40)
    q = np.linspace(-3.0, 7.0, 11)
    np.testing.assert_allclose(position_density(fock, q), np.exp(-(q - 2.0) ** 2) / math.sqrt(math.pi), atol=1e-12)
    np.testing.assert_allclose(momentum_density(fock, q), np.exp(-q ** 2) / math.sqrt(math.pi), atol=1e-12)


def test_marginal_rejects_bad_input():
    grid = Grid2D.square(1.0, 3)
    with pytest.raises(ValueError, match="Unknown marginal axis"):
        marginal(Field(grid, np.zeros(9)), "energy")
    with pytest.raises(ValueError, match="real fields"):
        marginal(Field(grid, np.zeros(9) * 1j), POSITION)
