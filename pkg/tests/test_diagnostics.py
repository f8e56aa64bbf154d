import math
from fractions import Fraction

import numpy as np
import pytest

from KerrFVR.diagnostics import (ComparisonReport, autocorr_curve_from_fields, autocorr_overlap,
                                 compare, count_local_maxima, count_zero_contours, fractional_radii,
                                 husimi_smooth, normalization, post_normalize, revival_phase_parity,
                                 revival_radii, revival_ring_chords)
from KerrFVR.errors import DegenerateNormalizationError, GridMismatchError
from KerrFVR.kerr_dynamics import Dynamics, hamiltonian, omega, revival_time
from KerrFVR.phase_space import Field, Grid2D
from KerrFVR.quantum_oracle import autocorr_exact, evolve, wigner_of_state
from KerrFVR.states import StateSpec, fock_coefficients, wigner0

GRID = Grid2D.square(8.0, 161)


def _gaussian(center, grid=GRID):
    return Field.from_function(grid, lambda z: wigner0(StateSpec.coherent(center), z))


@pytest.fixture(scope="module")
def coherent5():
    return fock_coefficients(StateSpec.coherent((5.0, 0.0)), 64)


class TestNormalization:
    def test_unit_gaussian(self):
        assert normalization(_gaussian((1.0, 0.0))) == pytest.approx(1.0, abs=1e-8)

    def test_post_normalize(self):
        f = _gaussian((0.0, 2.0))
        scaled = post_normalize(f.with_values(0.8 * f.values))
        assert normalization(scaled) == pytest.approx(1.0)
        np.testing.assert_allclose(post_normalize(scaled).values, scaled.values)

    def test_post_normalize_keeps_diagnostics(self):
        f = _gaussian((0.0, 0.0))
        flagged = Field(f.grid, 2.0 * f.values, {"converged": np.ones(f.grid.shape, dtype=bool)})
        assert "converged" in post_normalize(flagged).diagnostics

    def test_degenerate(self):
        with pytest.raises(DegenerateNormalizationError):
            post_normalize(Field(GRID, np.zeros(GRID.shape)))

    def test_complex_rejected(self):
        with pytest.raises(ValueError, match="real field"):
            normalization(Field(GRID, np.zeros(GRID.shape, dtype=complex)))


class TestOverlap:
    def test_pure_state_purity(self):
        f = _gaussian((2.0, -1.0))
        assert autocorr_overlap(f, f) == pytest.approx(1.0, abs=1e-8)

    def test_disjoint_states(self):
        assert autocorr_overlap(_gaussian((5.0, 0.0)), _gaussian((-5.0, 0.0))) < 1e-20

    def test_symmetric(self):
        a = _gaussian((1.0, 0.0))
        b = _gaussian((0.0, 1.5))
        assert autocorr_overlap(a, b) == pytest.approx(autocorr_overlap(b, a))
        assert autocorr_overlap(a, b) == pytest.approx(math.exp(-(1.0 + 1.5 ** 2) / 2.0), abs=1e-8)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            autocorr_overlap(_gaussian((0.0, 0.0)), _gaussian((0.0, 0.0), Grid2D.square(8.0, 81)))

    def test_curve_matches_exact(self, coherent5):
        grid = Grid2D.square(9.0, 181)
        times = [0.0, math.pi / 80.0, math.pi / 40.0, math.pi / 20.0]
        fields = [wigner_of_state(evolve(coherent5, t), grid) for t in times]
        curve = autocorr_curve_from_fields(fields, fields[0])
        np.testing.assert_allclose(curve, autocorr_exact(coherent5, np.array(times)), atol=1e-3)
        normalized = autocorr_curve_from_fields(fields, fields[0], normalize=True)
        np.testing.assert_allclose(normalized, curve, atol=1e-3)


class TestCompare:
    def test_identical(self):
        f = _gaussian((0.0, 0.0))
        report = compare(f, f)
        assert isinstance(report, ComparisonReport)
        assert report.l2_error == 0.0
        assert report.max_abs_error == 0.0
        assert report.pearson == pytest.approx(1.0)
        assert report.norm_a == pytest.approx(1.0, abs=1e-8)

    def test_negated(self):
        f = _gaussian((0.0, 0.0))
        report = compare(f, f.with_values(-f.values))
        assert report.pearson == pytest.approx(-1.0)
        assert report.max_abs_error == pytest.approx(2.0 / math.pi)

    def test_constant_field(self):
        f = _gaussian((0.0, 0.0))
        assert math.isnan(compare(f, Field(GRID, np.zeros(GRID.shape))).pearson)

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            compare(_gaussian((0.0, 0.0)), _gaussian((0.0, 0.0), Grid2D.square(7.0, 161)))

    def test_report_range(self):
        with pytest.raises(ValueError, match="Pearson"):
            ComparisonReport(0.0, 0.0, 1.5, 1.0, 1.0)


class TestRevivalArithmetic:
    def test_revival_radii_complete_whole_turns(self):
        for j in range(1, 20):
            r2 = revival_radii(j)
            assert r2 == pytest.approx(2.0 * j)
            turns = omega((math.sqrt(r2), 0.0), Dynamics.kerr()) * revival_time() / (2.0 * math.pi)
            assert turns == pytest.approx(j)

    def test_fractional_radii(self):
        assert fractional_radii(3, Fraction(1, 2), 4) == pytest.approx(7.0)
        assert fractional_radii(0, 0.0, 10) == 0.0
        with pytest.raises(ValueError):
            fractional_radii(1, 0.5, 0)

    def test_parity_always_even(self):
        for j_plus in range(60):
            for j_minus in range(60):
                assert revival_phase_parity(j_plus, j_minus) % 2 == 0

    def test_parity_values(self):
        assert revival_phase_parity(3, 1) == 10
        assert revival_phase_parity(1, 0) == 2
        assert revival_phase_parity(4, 4) == 0
        with pytest.raises(ValueError):
            revival_phase_parity(-1, 2)

    def test_ring_chords(self):
        x, xi = revival_ring_chords(12, 13)
        eta_plus = x.as_array() + 0.5 * xi.as_array()
        eta_minus = x.as_array() - 0.5 * xi.as_array()
        assert hamiltonian(eta_plus, Dynamics.kerr()) == pytest.approx(24.0 ** 2)
        assert hamiltonian(eta_minus, Dynamics.kerr()) == pytest.approx(26.0 ** 2)
        assert eta_minus[0] < 0.0


class TestContours:
    def test_no_zero(self):
        assert count_zero_contours(Field(GRID, np.ones(GRID.shape))) == 0

    def test_circle(self):
        f = Field.from_function(GRID, lambda z: z[..., 0] ** 2 + z[..., 1] ** 2 - 4.0)
        assert count_zero_contours(f) == 1
        assert count_zero_contours(f, mask_radius=1.0) == 0

    def test_two_islands(self):
        def islands(z):
            return np.minimum((z[..., 0] - 3.0) ** 2 + z[..., 1] ** 2, (z[..., 0] + 3.0) ** 2 + z[..., 1] ** 2) - 1.0
        assert count_zero_contours(Field.from_function(GRID, islands)) == 2

    def test_stripes(self):
        f = Field.from_function(GRID, lambda z: np.sin(z[..., 0]))
        assert count_zero_contours(f) == 5


class TestLobes:
    def test_husimi_smooth_of_coherent_state(self):
        """Smoothing doubles the variance of a coherent Wigner function"""
        smoothed = husimi_smooth(_gaussian((0.0, 0.0)))
        assert normalization(smoothed) == pytest.approx(1.0, abs=1e-6)
        assert smoothed.values.max() == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-2)

    def test_gaussian_ring(self):
        angles = 2.0 * math.pi * np.arange(5) / 5.0
        values = sum(_gaussian((5.0 * math.cos(a), 5.0 * math.sin(a))).values for a in angles)
        f = Field(GRID, values)
        assert count_local_maxima(f, smooth=False) == 5
        assert count_local_maxima(f) == 5

    def test_negative_field(self):
        assert count_local_maxima(Field(GRID, -np.ones(GRID.shape))) == 0

    def test_fractional_revival_pentagon(self, coherent5):
        """At a fifth of the revival time a coherent state splits into five copies"""
        f = wigner_of_state(evolve(coherent5, revival_time() / 5.0), GRID)
        assert count_local_maxima(f) == 5
