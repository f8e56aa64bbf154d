import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_laguerre

from .errors import TruncationError, UnsupportedStateError
from .phase_space import PhasePoint, PointLike, as_points, symplectic_product
from .special import laguerre_functions

logger = logging.getLogger(__name__)

COHERENT = "coherent"
DISPLACED_FOCK = "displaced_fock"

DEFAULT_TRUNCATION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class StateSpec:
    """Initial state: the Fock state |n> displaced to center (n = 0 is a coherent state)"""
    kind: str = COHERENT
    center: PhasePoint = field(default_factory=lambda: PhasePoint(0.0, 0.0))
    n: int = 0

    def __post_init__(self):
        if self.kind not in (COHERENT, DISPLACED_FOCK):
            raise UnsupportedStateError(
                f"Unknown state kind '{self.kind}'. Possible values are: {COHERENT}, {DISPLACED_FOCK}"
            )
        if not isinstance(self.center, PhasePoint):
            object.__setattr__(self, "center", PhasePoint.from_array(self.center))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise UnsupportedStateError(f"Fock excitation must be a nonnegative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.kind == COHERENT and self.n != 0:
            raise UnsupportedStateError("A coherent state has excitation n = 0.")

    @classmethod
    def coherent(cls, center: PointLike) -> 'StateSpec':
        return cls(COHERENT, PhasePoint.from_array(as_points(center)), 0)

    @classmethod
    def displaced_fock(cls, n: int, center: PointLike) -> 'StateSpec':
        return cls(DISPLACED_FOCK, PhasePoint.from_array(as_points(center)), n)

    @property
    def alpha(self) -> complex:
        """Displacement amplitude (<q> + i<p>)/sqrt(2)"""
        return complex(self.center.q, self.center.p) / np.sqrt(2.0)

    @property
    def extent(self) -> float:
        """Radius of the disk about the origin holding the bulk of the initial Wigner function"""
        return float(np.hypot(self.center.q, self.center.p) + np.sqrt(2 * self.n + 1))


@dataclass(frozen=True)
class FockVector:
    """Truncated Fock-basis coefficients c_0..c_N of a pure state"""
    coefficients: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def truncation(self) -> int:
        return len(self.coefficients) - 1

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.populations))


def _displaced(spec: StateSpec, z: PointLike):
    return as_points(z) - spec.center.as_array()


def wigner0(spec: StateSpec, z: PointLike):
    """Wigner function of the initial state, (-1)^n L_n(2|u|^2) exp(-|u|^2) / pi, u = z - center"""
    u = _displaced(spec, z)
    r2 = u[..., 0] ** 2 + u[..., 1] ** 2
    if spec.n == 0:
        shape = np.ones_like(r2)
    elif spec.n == 1:
        shape = 2.0 * r2 - 1.0
    else:
        shape = (-1.0) ** spec.n * eval_laguerre(spec.n, 2.0 * r2)
    value = shape * np.exp(-r2) / np.pi
    return float(value) if np.ndim(value) == 0 else value


def chord_fn(spec: StateSpec, xi: PointLike):
    """Chord function: the symplectic Fourier transform of wigner0.

    chi(xi) = L_n(|xi|^2/2) exp(-|xi|^2/4) exp(-i y0.J xi) / (2 pi)
    """
    xi = as_points(xi)
    r2 = xi[..., 0] ** 2 + xi[..., 1] ** 2
    if spec.n == 0:
        shape = np.ones_like(r2)
    elif spec.n == 1:
        shape = 1.0 - 0.5 * r2
    else:
        shape = eval_laguerre(spec.n, 0.5 * r2)
    phase = symplectic_product(spec.center.as_array(), xi)
    value = shape * np.exp(-0.25 * r2) * np.exp(-1j * np.asarray(phase)) / (2.0 * np.pi)
    return complex(value) if np.ndim(value) == 0 else value


def fock_coefficients(spec: StateSpec, N: int,
                      tolerance: float = DEFAULT_TRUNCATION_TOLERANCE) -> FockVector:
    """Coefficients <m|D(alpha)|n>, m = 0..N.

    For m >= n this is l_n^(m-n)(|alpha|^2) exp(i(m-n) arg alpha), for m < n
    l_m^(n-m)(|alpha|^2) (-1)^(n-m) exp(-i(n-m) arg alpha), with l the
    normalised Laguerre functions of KerrFVR.special.
    """
    if N < 1:
        raise ValueError("Fock truncation must be at least 1.")
    alpha = spec.alpha
    x = abs(alpha) ** 2
    phi = np.angle(alpha)
    n = spec.n
    coefficients = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        k = abs(m - n)
        low = min(m, n)
        magnitude = laguerre_functions(low, k, np.array(x))[low]
        if m >= n:
            coefficients[m] = magnitude * np.exp(1j * k * phi)
        else:
            coefficients[m] = magnitude * (-1.0) ** k * np.exp(-1j * k * phi)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(coefficients) ** 2)))
    logger.debug("Fock truncation N=%d for %s at (%g, %g): tail %.3e",
                 N, spec.kind, spec.center.q, spec.center.p, tail)
    if tail > tolerance:
        raise TruncationError(N, tail, tolerance)
    return FockVector(coefficients, tail)
