"""Exact quantum Kerr evolution in a truncated Fock basis.

H = (2n + 1)^2 is diagonal in the Fock basis, so evolution is a phase per
coefficient and the Wigner function follows from the cross-Wigner kernels of
|m><n|, built from normalised Laguerre functions.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .phase_space import Field, Grid2D
from .special import hermite_functions, laguerre_functions
from .states import FockVector

logger = logging.getLogger(__name__)

POSITION = "position"
MOMENTUM = "momentum"

IMAGINARY_RESIDUE_TOLERANCE = 1e-10

# rows per block when synthesising Wigner fields; bounds the Laguerre table in memory
_ROW_BLOCK = 32


@dataclass(frozen=True)
class EvolvedState:
    """Fock coefficients at a given time"""
    fock: FockVector
    time: float = 0.0


class Marginal(NamedTuple):
    abscissa: np.ndarray
    density: np.ndarray


class AutocorrCurve(NamedTuple):
    times: np.ndarray
    a2: np.ndarray


StateLike = Union[FockVector, EvolvedState]


def _fock(state: StateLike) -> FockVector:
    return state.fock if isinstance(state, EvolvedState) else state


def kerr_energies(N: int) -> np.ndarray:
    n = np.arange(N + 1)
    return (2.0 * n + 1.0) ** 2


def evolve(fock: FockVector, t: float) -> EvolvedState:
    """c_n(t) = c_n(0) exp(-i (2n+1)^2 t)"""
    phases = np.exp(-1j * kerr_energies(fock.truncation) * t)
    return EvolvedState(FockVector(fock.coefficients * phases, fock.tail), float(t))


def _wigner_block(c: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Complex Wigner sum over |m><n| kernels at an array of points"""
    N = len(c) - 1
    q = points[..., 0]
    p = points[..., 1]
    x = 2.0 * (q * q + p * p)
    phi = np.arctan2(p, q)
    total = np.zeros(x.shape, dtype=complex)
    for k in range(N + 1):
        ell = laguerre_functions(N - k, k, x)
        signs = (-1.0) ** np.arange(N - k + 1)
        upper = c[k:] * np.conj(c[:N - k + 1]) * signs
        a_k = np.tensordot(upper, ell, axes=(0, 0))
        if k == 0:
            total += a_k
            continue
        lower = c[:N - k + 1] * np.conj(c[k:]) * signs
        b_k = np.tensordot(lower, ell, axes=(0, 0))
        total += a_k * np.exp(-1j * k * phi) + b_k * np.exp(1j * k * phi)
    return total / np.pi


def wigner_of_state(state: StateLike, grid: Grid2D) -> Field:
    """Wigner function of a pure state sampled on grid"""
    c = _fock(state).coefficients
    values = np.empty(grid.shape, dtype=complex)
    points = grid.points()
    for start in range(0, grid.n_p, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, grid.n_p)
        values[start:stop] = _wigner_block(c, points[start:stop])
    residue = float(np.max(np.abs(values.imag)))
    if residue > IMAGINARY_RESIDUE_TOLERANCE:
        raise ArithmeticError(f"Wigner sum has imaginary residue {residue:.3e}")
    logger.debug("Wigner synthesis N=%d on %dx%d grid, imaginary residue %.2e",
                 len(c) - 1, grid.n_q, grid.n_p, residue)
    return Field(grid, values.real)


def autocorr_exact(state0: FockVector, t):
    """|<psi(0)|psi(t)>|^2 from the Fock populations"""
    populations = state0.populations
    energies = kerr_energies(state0.truncation)
    t = np.asarray(t, dtype=float)
    amplitude = np.exp(-1j * np.multiply.outer(t, energies)) @ populations
    value = np.abs(amplitude) ** 2
    return float(value) if value.ndim == 0 else value


def autocorr_curve(state0: FockVector, times) -> AutocorrCurve:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return AutocorrCurve(times, np.atleast_1d(autocorr_exact(state0, times)))


def marginal(field: Field, axis: str) -> Marginal:
    """Integrate the field over the conjugate variable.

    Position marginals are returned on the q axis; momentum marginals on the
    p axis in ascending order.
    """
    if field.is_complex:
        raise ValueError("Marginals are defined for real fields only.")
    grid = field.grid
    if axis == POSITION:
        return Marginal(grid.q_axis, trapezoid(field.values, dx=grid.dp, axis=0))
    if axis == MOMENTUM:
        density = trapezoid(field.values, dx=grid.dq, axis=1)
        return Marginal(grid.p_axis[::-1], density[::-1])
    raise ValueError(f"Unknown marginal axis '{axis}'. Possible values are: {POSITION}, {MOMENTUM}")


def position_density(state: StateLike, q: np.ndarray) -> np.ndarray:
    """|<q|psi>|^2 summed directly from Hermite functions"""
    c = _fock(state).coefficients
    psi = np.tensordot(c, hermite_functions(len(c) - 1, q), axes=(0, 0))
    return np.abs(psi) ** 2


def momentum_density(state: StateLike, p: np.ndarray) -> np.ndarray:
    """|<p|psi>|^2, using <p|n> = (-i)^n <x=p|n>"""
    c = _fock(state).coefficients
    phases = (-1j) ** np.arange(len(c))
    psi = np.tensordot(c * phases, hermite_functions(len(c) - 1, p), axes=(0, 0))
    return np.abs(psi) ** 2
