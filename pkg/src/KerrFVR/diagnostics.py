import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy import ndimage, stats

from .errors import DegenerateNormalizationError, GridMismatchError
from .kerr_dynamics import revival_time
from .phase_space import Chord, Field, PhasePoint, integrate_field

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-9


@dataclass(frozen=True)
class ComparisonReport:
    l2_error: float
    max_abs_error: float
    pearson: float
    norm_a: float
    norm_b: float

    def __post_init__(self):
        if not (math.isnan(self.pearson) or -1.0 <= self.pearson <= 1.0):
            raise ValueError(f"Pearson correlation out of range: {self.pearson}")


def _require_real(f: Field):
    if f.is_complex:
        raise ValueError("Expected a real field.")


def _require_same_grid(a: Field, b: Field):
    if not a.grid.matches(b.grid):
        raise GridMismatchError(f"Fields sampled on different grids: {a.grid} vs {b.grid}")


def normalization(f: Field) -> float:
    _require_real(f)
    return integrate_field(f)


def post_normalize(f: Field) -> Field:
    """Copy of f rescaled to unit integral"""
    norm = normalization(f)
    if abs(norm) < DEGENERATE_NORM:
        raise DegenerateNormalizationError(f"Field integral {norm:.3e} is too small to normalize.")
    logger.debug("Post-normalizing field with integral %.6f (deficit %.6f)", norm, 1.0 - norm)
    return Field(f.grid, f.values / norm, f.diagnostics)


def autocorr_overlap(f_t: Field, f_0: Field) -> float:
    """A^2(t) = 2 pi times the integral of W(t) W(0)"""
    _require_same_grid(f_t, f_0)
    _require_real(f_t)
    _require_real(f_0)
    return 2.0 * math.pi * integrate_field(Field(f_t.grid, f_t.values * f_0.values))


def autocorr_curve_from_fields(fields: Iterable[Field], f_0: Field, normalize: bool = False) -> np.ndarray:
    """autocorr_overlap for a sequence of fields, each optionally post-normalized first"""
    return np.array([autocorr_overlap(post_normalize(f) if normalize else f, f_0) for f in fields])


def compare(f_a: Field, f_b: Field) -> ComparisonReport:
    _require_same_grid(f_a, f_b)
    _require_real(f_a)
    _require_real(f_b)
    diff = f_a.values - f_b.values
    l2 = math.sqrt(max(integrate_field(Field(f_a.grid, diff * diff)), 0.0))
    a = f_a.values.ravel()
    b = f_b.values.ravel()
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        pearson = math.nan
    else:
        pearson = float(np.clip(stats.pearsonr(a, b)[0], -1.0, 1.0))
    return ComparisonReport(l2, float(np.max(np.abs(diff))), pearson,
                            normalization(f_a), normalization(f_b))


def revival_radii(j: int) -> float:
    """Squared radius |eta|^2 = 2j of the orbits completing j turns in one revival time"""
    if j < 1:
        raise ValueError("Winding number must be at least 1.")
    return 2.0 * math.pi * j / (4.0 * revival_time())


def fractional_radii(j: int, alpha_frac: Union[Fraction, float], beta: int) -> float:
    """Squared radius solving 4 |eta|^2 pi / beta = 2 pi (j + alpha_frac)"""
    if beta < 1:
        raise ValueError("beta must be a positive integer.")
    return beta * (j + float(alpha_frac)) / 2.0


def revival_phase_parity(j_plus: int, j_minus: int) -> int:
    """Revival phase in units of pi, (j+ - j-)(1 + j+ + j-); always even"""
    if j_plus < 0 or j_minus < 0:
        raise ValueError("Winding numbers must be non-negative.")
    value = (j_plus - j_minus) * (1 + j_plus + j_minus)
    if value % 2:
        raise ArithmeticError(f"Odd revival phase {value} for j+={j_plus}, j-={j_minus}")
    return value


def revival_ring_chords(j_plus: int, j_minus: int, angle_plus: float = 0.0,
                        angle_minus: float = math.pi) -> Tuple[PhasePoint, Chord]:
    """Final center and chord whose endpoints lie on the full-revival rings j+ and j-"""
    r_plus = math.sqrt(revival_radii(j_plus))
    r_minus = math.sqrt(revival_radii(j_minus))
    eta_plus = np.array([r_plus * math.cos(angle_plus), r_plus * math.sin(angle_plus)])
    eta_minus = np.array([r_minus * math.cos(angle_minus), r_minus * math.sin(angle_minus)])
    return PhasePoint.from_array(0.5 * (eta_plus + eta_minus)), Chord.from_array(eta_plus - eta_minus)


def count_zero_contours(f: Field, mask_radius: Optional[float] = None) -> int:
    """Number of zero-level curves of a sampled function.

    Counted as connected sign regions minus one, restricted to the disk of
    mask_radius about the grid origin when given.
    """
    _require_real(f)
    inside = np.ones(f.grid.shape, dtype=bool)
    if mask_radius is not None:
        points = f.grid.points()
        inside = np.hypot(points[..., 0], points[..., 1]) <= mask_radius
    _, n_positive = ndimage.label((f.values > 0.0) & inside)
    _, n_negative = ndimage.label((f.values <= 0.0) & inside)
    return max(n_positive + n_negative - 1, 0)


def husimi_smooth(f: Field) -> Field:
    """Gaussian smoothing of a Wigner field by a coherent-state width (variance 1/2 per axis)"""
    _require_real(f)
    sigma = (math.sqrt(0.5) / f.grid.dp, math.sqrt(0.5) / f.grid.dq)
    return Field(f.grid, ndimage.gaussian_filter(f.values, sigma=sigma, mode="constant"))


def count_local_maxima(f: Field, threshold: float = 0.5, smooth: bool = True) -> int:
    """Lobes of a field: local maxima above threshold times the peak value.

    With smooth, the field is first passed through husimi_smooth so that
    interference fringes between lobes do not count.
    """
    values = (husimi_smooth(f) if smooth else f).values
    peak = float(values.max())
    if peak <= 0.0:
        return 0
    is_max = (values == ndimage.maximum_filter(values, size=3, mode="constant", cval=-np.inf))
    _, n_lobes = ndimage.label(is_max & (values >= threshold * peak))
    return n_lobes
