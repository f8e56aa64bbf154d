"""Semiclassical Wigner propagation in the final value representation.

For a final center x' every final chord xi' is split into its endpoints
eta'_+- = x' -+ xi'/2, which are run backward along the classical flow to form
an initial chord xi = eta_+ - eta_-. The Wigner function at x' is the integral
over xi' of

    (1/2pi) |det dxi/dxi'|^(1/2) exp{i [S + sigma pi/2]} chi(xi)

where S is the chord action of the closed circuit traced by the two
trajectories, sigma is the Maslov index of the pair and chi is the chord
function of the initial state. The determinant vanishes on caustics instead
of diverging, so the integrand stays bounded everywhere.

sigma defaults to the rotation index of N = T_-^-1 T_+, the relative tangent
map of the two endpoints: the integer nearest its accumulated rotation angle
over pi whose parity is the sign of the determinant. The angle has a closed
form for flows that rotate each orbit rigidly, so no time scan is needed.
Counting the zeros of the determinant along the way ("count", "signed") is
the alternative; zeros that come in pairs make it differ from the rotation
index by 2 on chords that wind many times.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .config import ROTATION, SIGNED, QuadratureSpec
from .kerr_dynamics import (Dynamics, arc_action, flow, hamiltonian, omega, omega_gradient,
                            tangent_matrices)
from .phase_space import Chord, Field, Grid2D, PhasePoint, PointLike, as_points, symplectic_product
from .states import StateSpec, chord_fn, wigner0

logger = logging.getLogger(__name__)

# |det| below this without a sign change is reported as a grazing caustic
GRAZING_THRESHOLD = 1e-9

# chords x time samples evaluated at once during the Maslov scan
_SCAN_BLOCK = 1 << 18

# chords evaluated at once in the midpoint sum
_CHORD_BLOCK = 1 << 16


@dataclass(frozen=True)
class ChordMapResult:
    """Backward propagation record of one final chord"""
    eta_plus_final: PhasePoint
    eta_minus_final: PhasePoint
    eta_plus_init: PhasePoint
    eta_minus_init: PhasePoint
    xi_init: Chord
    center_init: PhasePoint
    jac_det: float
    action: float
    maslov: int

    @property
    def center_final(self) -> PhasePoint:
        return PhasePoint(0.5 * (self.eta_plus_final.q + self.eta_minus_final.q),
                          0.5 * (self.eta_plus_final.p + self.eta_minus_final.p))

    @property
    def xi_final(self) -> Chord:
        return Chord(self.eta_plus_final.q - self.eta_minus_final.q,
                     self.eta_plus_final.p - self.eta_minus_final.p)


class CausticCrossing(NamedTuple):
    time: float
    direction: int  # +1 when the determinant turns negative, -1 when it turns positive


class WignerEstimate(NamedTuple):
    value: float
    imag_residue: float
    refinement_delta: float
    converged: bool


def _endpoints(x_final: PointLike, xi_final: PointLike, t, dyn: Dynamics):
    x = as_points(x_final)
    xi = as_points(xi_final)
    eta_fp = x + 0.5 * xi
    eta_fm = x - 0.5 * xi
    return eta_fp, eta_fm, flow(eta_fp, -t, dyn), flow(eta_fm, -t, dyn)


def _shear_entries(z: np.ndarray, tau, dyn: Dynamics):
    """Rotation angle omega tau and the entries of the shear factor I + tau (p, -q) grad(omega)^T"""
    theta = np.asarray(omega(z, dyn)) * tau
    grad = omega_gradient(z, dyn)
    u_q, u_p = z[..., 1], -z[..., 0]
    v_q, v_p = grad[..., 0], grad[..., 1]
    return theta, (1.0 + tau * u_q * v_q, tau * u_q * v_p, tau * u_p * v_q, 1.0 + tau * u_p * v_p)


def _tangent_entries(z: np.ndarray, tau, dyn: Dynamics):
    """Entries of tangent_matrices(z, tau) without building the 2x2 stacks"""
    theta, (a11, a12, a21, a22) = _shear_entries(z, tau, dyn)
    c = np.cos(theta)
    s = np.sin(theta)
    return (c * a11 + s * a21, c * a12 + s * a22,
            c * a21 - s * a11, c * a22 - s * a12)


def _average_det(eta_fp: np.ndarray, eta_fm: np.ndarray, tau, dyn: Dynamics):
    """det[(T_+ + T_-)/2] with T_+- the tangent maps of eta'_+- over time tau"""
    p11, p12, p21, p22 = _tangent_entries(eta_fp, tau, dyn)
    m11, m12, m21, m22 = _tangent_entries(eta_fm, tau, dyn)
    return 0.25 * ((p11 + m11) * (p22 + m22) - (p12 + m12) * (p21 + m21))


def _complex_parts(m11, m12, m21, m22):
    """(alpha, beta) with M(q + ip) = alpha (q + ip) + beta (q - ip); det M = |alpha|^2 - |beta|^2"""
    return (0.5 * ((m11 + m22) + 1j * (m21 - m12)),
            0.5 * ((m11 - m22) + 1j * (m21 + m12)))


def _relative_rotation(eta_fp: np.ndarray, eta_fm: np.ndarray, tau, dyn: Dynamics):
    """Accumulated rotation angle of N = T_-^-1 T_+ over [0, tau], and det[(T_+ + T_-)/2].

    T = R(theta) A with A a unit-determinant shear whose alpha has real part 1,
    and R(theta) has alpha = exp(-i theta). Composing the parts gives
    alpha_N = exp(-i dtheta) conj(alpha_-) alpha_+ (1 - w) with |w| < 1, so
    each principal argument below stays in (-pi/2, pi/2) at every time and
    their sum follows arg(alpha_N) continuously from 0.
    """
    theta_p, shear_p = _shear_entries(eta_fp, tau, dyn)
    theta_m, shear_m = _shear_entries(eta_fm, tau, dyn)
    alpha_p, beta_p = _complex_parts(*shear_p)
    alpha_m, beta_m = _complex_parts(*shear_m)
    delta = theta_p - theta_m
    lead = np.conj(alpha_m) * alpha_p
    mixing = 1.0 - beta_m * np.conj(beta_p) * np.exp(2j * delta) / lead
    angle = -delta + np.angle(np.conj(alpha_m)) + np.angle(alpha_p) + np.angle(mixing)
    det = 0.5 * (1.0 + (np.exp(-1j * delta) * lead * mixing).real)
    return angle, det


def _rotation_index(angle, det) -> np.ndarray:
    """Integer nearest angle / pi that is odd where det < 0 and even elsewhere"""
    turns = np.asarray(angle) / (2.0 * math.pi)
    return np.where(np.asarray(det) < 0.0, 2.0 * np.floor(turns) + 1.0, 2.0 * np.round(turns)).astype(int)


def relative_rotation(x_final: PointLike, xi_final: PointLike, t: float, dyn: Optional[Dynamics] = None):
    """Rotation angle of T_-^-1 T_+ accumulated along the backward flow from 0 to t"""
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    x = as_points(x_final)
    xi = as_points(xi_final)
    angle, _ = _relative_rotation(x + 0.5 * xi, x - 0.5 * xi, -t, dyn or Dynamics.kerr())
    return float(angle) if np.ndim(angle) == 0 else angle


def chord_jacobian(x_final: PointLike, xi_final: PointLike, t, dyn: Dynamics):
    """det dxi/dxi' at fixed x', broadcast over chords"""
    eta_fp, eta_fm, _, _ = _endpoints(x_final, xi_final, t, dyn)
    average = 0.5 * (tangent_matrices(eta_fp, -t, dyn) + tangent_matrices(eta_fm, -t, dyn))
    det = np.linalg.det(average)
    return float(det) if np.ndim(det) == 0 else det


def _segment_action(a: np.ndarray, b: np.ndarray):
    """Integral of p dq along the straight segment a -> b"""
    return 0.5 * (a[..., 1] + b[..., 1]) * (b[..., 0] - a[..., 0])


def _chord_action(eta_fp, eta_fm, eta_p, eta_m, t, dyn: Dynamics):
    center = 0.5 * (eta_p + eta_m)
    xi = eta_p - eta_m
    energy = np.asarray(hamiltonian(eta_fp, dyn)) - np.asarray(hamiltonian(eta_fm, dyn))
    circuit = (np.asarray(arc_action(eta_fm, -t, dyn))
               + _segment_action(eta_m, eta_p)
               - np.asarray(arc_action(eta_fp, -t, dyn))
               + _segment_action(eta_fp, eta_fm))
    return np.asarray(symplectic_product(center, xi)) - t * energy + circuit


def action(result: ChordMapResult, t: float, dyn: Dynamics) -> float:
    """Chord action S of the circuit eta'_- -> eta_- -> eta_+ -> eta'_+ -> eta'_-.

    S = x.J xi - t dH + (integral of p dq around the circuit), with x, xi the
    initial center and chord. The two trajectory legs keep their full winding;
    at t = 0 the circuit collapses and S = x'.J xi'.
    """
    return float(_chord_action(result.eta_plus_final.as_array(), result.eta_minus_final.as_array(),
                               result.eta_plus_init.as_array(), result.eta_minus_init.as_array(),
                               t, dyn))


def _required_samples(eta_fp: np.ndarray, eta_fm: np.ndarray, t: float,
                      spec: QuadratureSpec, dyn: Dynamics) -> np.ndarray:
    """Time samples per chord: powers-of-two multiples of the base count,
    enough for spec.samples_per_turn samples per relative turn of the endpoints"""
    relative = np.abs(np.asarray(omega(eta_fp, dyn)) - np.asarray(omega(eta_fm, dyn))) * t
    needed = np.ceil(spec.samples_per_turn * relative / (2.0 * math.pi))
    base = spec.maslov_time_samples
    with np.errstate(divide="ignore"):
        doublings = np.ceil(np.log2(np.maximum(needed, base) / base))
    samples = base * 2.0 ** np.maximum(doublings, 0.0)
    capped = samples > spec.max_time_samples
    if np.any(capped):
        logger.debug("%d chords need more than %d Maslov time samples; capped",
                     int(np.count_nonzero(capped)), spec.max_time_samples)
    return np.minimum(samples, spec.max_time_samples).astype(int)


def _scan(eta_fp: np.ndarray, eta_fm: np.ndarray, t: float, n: int, dyn: Dynamics) -> np.ndarray:
    """Determinant at s = 0, t/n, ..., t for each chord, shape (K, n + 1)"""
    s = t * np.arange(n + 1) / n
    return _average_det(eta_fp[:, None, :], eta_fm[:, None, :], -s[None, :], dyn)


def _count_crossings(dets: np.ndarray, convention: str) -> Tuple[np.ndarray, np.ndarray]:
    positive = dets > 0.0
    down = positive[:, :-1] & ~positive[:, 1:]
    up = ~positive[:, :-1] & positive[:, 1:]
    if convention == SIGNED:
        counts = down.sum(axis=1) - up.sum(axis=1)
    else:
        counts = down.sum(axis=1) + up.sum(axis=1)
    changed = np.zeros(dets.shape, dtype=bool)
    changed[:, :-1] |= down | up
    changed[:, 1:] |= down | up
    grazing = np.any((np.abs(dets) < GRAZING_THRESHOLD) & ~changed, axis=1)
    return counts, grazing


def _maslov_counts(eta_fp: np.ndarray, eta_fm: np.ndarray, t: float,
                   spec: QuadratureSpec, dyn: Dynamics) -> np.ndarray:
    """Zero-counting Maslov counter for many chords at once; no root refinement"""
    counts = np.zeros(len(eta_fp), dtype=int)
    if t == 0.0 or len(eta_fp) == 0:
        return counts
    samples = _required_samples(eta_fp, eta_fm, t, spec, dyn)
    n_grazing = 0
    for n in np.unique(samples):
        idx = np.flatnonzero(samples == n)
        block = max(1, _SCAN_BLOCK // (int(n) + 1))
        for start in range(0, len(idx), block):
            chunk = idx[start:start + block]
            dets = _scan(eta_fp[chunk], eta_fm[chunk], t, int(n), dyn)
            chunk_counts, grazing = _count_crossings(dets, spec.maslov_convention)
            counts[chunk] = chunk_counts
            n_grazing += int(np.count_nonzero(grazing))
    if n_grazing:
        logger.debug("%d chords graze a caustic without a sign change", n_grazing)
    return counts


def _maslov_indices(eta_fp: np.ndarray, eta_fm: np.ndarray, t: float,
                    spec: QuadratureSpec, dyn: Dynamics) -> Tuple[np.ndarray, np.ndarray]:
    """sigma and det[(T_+ + T_-)/2] for many chords under spec.maslov_convention"""
    if spec.maslov_convention == ROTATION:
        angle, det = _relative_rotation(eta_fp, eta_fm, -t, dyn)
        return _rotation_index(angle, det), det
    return _maslov_counts(eta_fp, eta_fm, t, spec, dyn), _average_det(eta_fp, eta_fm, -t, dyn)


def _bisect(eta_fp: np.ndarray, eta_fm: np.ndarray, lo: float, hi: float,
            d_lo: float, tol: float, dyn: Dynamics) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        d_mid = float(_average_det(eta_fp, eta_fm, -mid, dyn))
        if (d_mid > 0.0) == (d_lo > 0.0):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def caustic_times(x_final: PointLike, xi_final: PointLike, t: float,
                  spec: Optional[QuadratureSpec] = None, dyn: Optional[Dynamics] = None) -> List[CausticCrossing]:
    """Times s in (0, t] at which det dxi/dxi'(s) changes sign, refined by bisection"""
    spec = spec or QuadratureSpec()
    dyn = dyn or Dynamics.kerr()
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    if t == 0.0:
        return []
    x = as_points(x_final)
    xi = as_points(xi_final)
    eta_fp = (x + 0.5 * xi)[None, :]
    eta_fm = (x - 0.5 * xi)[None, :]
    n = int(_required_samples(eta_fp, eta_fm, t, spec, dyn)[0])
    dets = _scan(eta_fp, eta_fm, t, n, dyn)[0]
    s = t * np.arange(n + 1) / n
    crossings = []
    for k in range(n):
        if (dets[k] > 0.0) == (dets[k + 1] > 0.0):
            if abs(dets[k + 1]) < GRAZING_THRESHOLD:
                logger.debug("Grazing caustic near s=%.6g for x'=%s, xi'=%s", s[k + 1], x, xi)
            continue
        time = _bisect(eta_fp[0], eta_fm[0], s[k], s[k + 1], dets[k], spec.refine_bisection_tol, dyn)
        crossings.append(CausticCrossing(time, 1 if dets[k] > 0.0 else -1))
    return crossings


def maslov_count(x_final: PointLike, xi_final: PointLike, t: float,
                 spec: Optional[QuadratureSpec] = None, dyn: Optional[Dynamics] = None) -> int:
    """Maslov index sigma of the chord over (0, t].

    "rotation" (the default) is the closed-form rotation index; "count" is the
    number of zeros of the chord determinant and "signed" sums their directions.
    """
    spec = spec or QuadratureSpec()
    if spec.maslov_convention == ROTATION:
        if t < 0:
            raise ValueError("Propagation time must be non-negative.")
        x = as_points(x_final)
        xi = as_points(xi_final)
        angle, det = _relative_rotation(x + 0.5 * xi, x - 0.5 * xi, -t, dyn or Dynamics.kerr())
        return int(_rotation_index(angle, det))
    crossings = caustic_times(x_final, xi_final, t, spec, dyn)
    if spec.maslov_convention == SIGNED:
        return sum(c.direction for c in crossings)
    return len(crossings)


def backward_chord_map(x_final: PointLike, xi_final: PointLike, t: float, dyn: Dynamics,
                       spec: Optional[QuadratureSpec] = None) -> ChordMapResult:
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    eta_fp, eta_fm, eta_p, eta_m = _endpoints(x_final, xi_final, t, dyn)
    result = ChordMapResult(
        eta_plus_final=PhasePoint.from_array(eta_fp),
        eta_minus_final=PhasePoint.from_array(eta_fm),
        eta_plus_init=PhasePoint.from_array(eta_p),
        eta_minus_init=PhasePoint.from_array(eta_m),
        xi_init=Chord.from_array(eta_p - eta_m),
        center_init=PhasePoint.from_array(0.5 * (eta_p + eta_m)),
        jac_det=chord_jacobian(x_final, xi_final, t, dyn),
        action=0.0,
        maslov=0,
    )
    return ChordMapResult(**{**result.__dict__,
                             "action": action(result, t, dyn),
                             "maslov": maslov_count(x_final, xi_final, t, spec, dyn)})


def _integrand_values(x_final: np.ndarray, xi_final: np.ndarray, t: float, state: StateSpec,
                      spec: QuadratureSpec, dyn: Dynamics) -> np.ndarray:
    """FVR integrand at one final center over an array of final chords (K, 2).

    Chords with an endpoint outside spec.support_radius are dropped before
    the backward flow, then those whose chord function falls below the cutoff.
    """
    x = as_points(x_final)
    eta_fp = x + 0.5 * xi_final
    eta_fm = x - 0.5 * xi_final
    values = np.zeros(len(xi_final), dtype=complex)
    keep = np.arange(len(xi_final))
    support = spec.support_radius(state, float(np.hypot(x[0], x[1])))
    if support is not None:
        outer = np.maximum(np.sum(eta_fp ** 2, axis=-1), np.sum(eta_fm ** 2, axis=-1))
        keep = np.flatnonzero(outer <= support ** 2)
    if len(keep) == 0:
        return values
    eta_fp, eta_fm = eta_fp[keep], eta_fm[keep]
    eta_p = flow(eta_fp, -t, dyn)
    eta_m = flow(eta_fm, -t, dyn)
    chi = np.atleast_1d(chord_fn(state, eta_p - eta_m))
    live = np.flatnonzero(np.abs(chi) >= spec.chi_cutoff / (2.0 * math.pi))
    if len(live) == 0:
        return values
    eta_fp, eta_fm = eta_fp[live], eta_fm[live]
    sigma, det = _maslov_indices(eta_fp, eta_fm, t, spec, dyn)
    phase = _chord_action(eta_fp, eta_fm, eta_p[live], eta_m[live], t, dyn) + 0.5 * math.pi * sigma
    values[keep[live]] = np.sqrt(np.abs(det)) / (2.0 * math.pi) * np.exp(1j * phase) * chi[live]
    return values


def fvr_integrand(x_final: PointLike, xi_final: PointLike, t: float, state: StateSpec,
                  spec: Optional[QuadratureSpec] = None, dyn: Optional[Dynamics] = None) -> complex:
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    xi = as_points(xi_final).reshape(1, 2)
    return complex(_integrand_values(as_points(x_final), xi, t, state,
                                     spec or QuadratureSpec(), dyn or Dynamics.kerr())[0])


def chord_samples(halfwidth: float, n: int) -> Tuple[np.ndarray, float]:
    """Midpoints of an n x n partition of [-L, L]^2 as (n*n, 2) chords, and the cell area"""
    h = 2.0 * halfwidth / n
    axis = -halfwidth + h * (np.arange(n) + 0.5)
    Q, P = np.meshgrid(axis, axis)
    return np.stack([Q.ravel(), P.ravel()], axis=-1), h * h


def _midpoint_sum(x: np.ndarray, t: float, state: StateSpec, spec: QuadratureSpec,
                  dyn: Dynamics, halfwidth: float, n: int) -> complex:
    chords, area = chord_samples(halfwidth, n)
    total = 0j
    for start in range(0, len(chords), _CHORD_BLOCK):
        block = chords[start:start + _CHORD_BLOCK]
        total += complex(np.sum(_integrand_values(x, block, t, state, spec, dyn)))
    return total * area


def fvr_wigner(x_final: PointLike, t: float, state: StateSpec, spec: Optional[QuadratureSpec] = None,
               dyn: Optional[Dynamics] = None, halfwidth: Optional[float] = None) -> WignerEstimate:
    """Semiclassical Wigner function at one final point.

    The real part of the midpoint sum is the estimate; the imaginary part is
    reported as a residue. The chord domain is the square enclosing every
    chord whose endpoints lie within spec.support_radius of the origin,
    unless spec.chord_halfwidth or halfwidth fixes it. The node is flagged
    when the residue exceeds spec.convergence_tol, and with
    spec.check_convergence also when the sum on the M/2 partition differs by
    more than that.
    """
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    spec = spec or QuadratureSpec()
    dyn = dyn or Dynamics.kerr()
    x = as_points(x_final)
    if halfwidth is None:
        radius = float(np.hypot(x[0], x[1]))
        halfwidth = spec.halfwidth_for(radius, spec.support_radius(state, radius))
    total = _midpoint_sum(x, t, state, spec, dyn, halfwidth, spec.chord_samples)
    delta = math.nan
    converged = abs(total.imag) <= spec.convergence_tol
    if spec.check_convergence:
        coarse = _midpoint_sum(x, t, state, spec, dyn, halfwidth, spec.chord_samples // 2)
        delta = abs(total.real - coarse.real)
        converged = converged and delta <= spec.convergence_tol
    return WignerEstimate(total.real, abs(total.imag), delta, converged)


def _fill_rows(args) -> Tuple[int, np.ndarray]:
    grid, rows, t, state, spec, dyn = args
    out = np.empty((len(rows), grid.n_q, 4))
    for i, row in enumerate(rows):
        for j, x in enumerate(grid.row_points(row)):
            out[i, j] = fvr_wigner(x, t, state, spec, dyn)
    return rows[0], out


def fvr_field(grid: Grid2D, t: float, state: StateSpec, spec: Optional[QuadratureSpec] = None,
              dyn: Optional[Dynamics] = None, workers: int = 1) -> Field:
    """fvr_wigner on every node of grid.

    Rows are filled independently, in separate processes when workers > 1;
    each node has its own chord domain and is summed in a fixed order, so the
    result does not depend on the worker count. Diagnostics: imag_residue,
    refinement_delta, converged.
    """
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    spec = spec or QuadratureSpec()
    spec.validate()
    dyn = dyn or Dynamics.kerr()
    tasks = [(grid, [row], t, state, spec, dyn) for row in range(grid.n_p)]
    data = np.empty(grid.shape + (4,))
    logger.info("FVR field at t=%.6g: %dx%d nodes, M=%d, L=%s, %s Maslov index, %d worker(s)",
                t, grid.n_q, grid.n_p, spec.chord_samples,
                "per node" if spec.chord_halfwidth is None else f"{spec.chord_halfwidth:.3g}",
                spec.maslov_convention, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for first, block in executor.map(_fill_rows, tasks):
                data[first:first + len(block)] = block
    else:
        for task in tasks:
            first, block = _fill_rows(task)
            data[first:first + len(block)] = block
    diagnostics = {
        "imag_residue": data[..., 1],
        "refinement_delta": data[..., 2],
        "converged": data[..., 3].astype(bool),
    }
    n_failed = int(np.count_nonzero(~diagnostics["converged"]))
    if n_failed:
        logger.warning("%d of %d nodes did not converge at t=%.6g", n_failed, grid.size, t)
    logger.debug("Largest imaginary residue %.3e", float(np.max(diagnostics["imag_residue"])))
    return Field(grid, data[..., 0], diagnostics)


def liouville_field(grid: Grid2D, t: float, state: StateSpec, dyn: Optional[Dynamics] = None) -> Field:
    """Classical transport: W(x', t) = W0(flow(x', -t))"""
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    dyn = dyn or Dynamics.kerr()
    return Field.from_function(grid, lambda points: wigner0(state, flow(points, -t, dyn)))


def caustic_det_map(x_final: PointLike, t: float, chord_grid: Grid2D,
                    dyn: Optional[Dynamics] = None) -> Field:
    """det dxi/dxi' over a grid of final chords; its zero contours are the caustics"""
    if t < 0:
        raise ValueError("Propagation time must be non-negative.")
    dyn = dyn or Dynamics.kerr()
    return Field(chord_grid, chord_jacobian(x_final, chord_grid.points(), t, dyn))
