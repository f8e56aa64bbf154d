"""Acceptance suite for the propagators.

Each check returns a CheckResult with the measured quantities; `quick` runs
the same protocol at reduced resolution so the suite finishes in minutes.
The independent oracles used by the checks (numerical symplectic Fourier
transform, finite-difference chord Jacobian, quadrature of the chord action,
time-sampled relative rotation) are exposed for the test-suite as well.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import quad

from .config import QuadratureSpec
from .diagnostics import (autocorr_overlap, compare, count_local_maxima, count_zero_contours,
                          normalization, post_normalize, revival_phase_parity, revival_radii)
from .fvr_propagator import (_chord_action, _endpoints, backward_chord_map, caustic_det_map,
                             chord_jacobian, fvr_field, relative_rotation)
from .kerr_dynamics import Dynamics, flow, hamiltonian, omega, revival_time, tangent_matrices
from .phase_space import Field, Grid2D, PhasePoint, integrate_field
from .quantum_oracle import (POSITION, autocorr_exact, evolve, marginal, position_density,
                             wigner_of_state)
from .states import StateSpec, chord_fn, fock_coefficients, wigner0

logger = logging.getLogger(__name__)

COHERENT_5 = StateSpec.coherent((5.0, 0.0))


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: Dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def summary(self) -> str:
        values = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in self.measured.items())
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} ({self.seconds:.1f}s): {values}"


def numerical_chord_fn(state: StateSpec, xi: np.ndarray, halfwidth: float = 8.0, n: int = 256) -> np.ndarray:
    """chi(xi) = (1/2pi) integral of W0(x) exp(-i x.J xi), by the trapezoid rule about the state center"""
    grid = Grid2D.square(halfwidth, n, state.center.as_array())
    points = grid.points()
    w = wigner0(state, points)
    xi = np.atleast_2d(xi)
    out = np.empty(len(xi), dtype=complex)
    for k, (xq, xp) in enumerate(xi):
        phase = points[..., 0] * xp - points[..., 1] * xq
        out[k] = integrate_field(Field(grid, w * np.exp(-1j * phase))) / (2.0 * math.pi)
    return out


def finite_difference_jacobian(x_final, xi_final, t: float, dyn: Dynamics, step: float = 1e-6) -> float:
    """det d xi / d xi' at fixed x' by central differences of the backward chord map"""
    columns = []
    for axis in range(2):
        offset = np.zeros(2)
        offset[axis] = step
        xi_up = _initial_chord(x_final, np.asarray(xi_final) + offset, t, dyn)
        xi_down = _initial_chord(x_final, np.asarray(xi_final) - offset, t, dyn)
        columns.append((xi_up - xi_down) / (2.0 * step))
    return float(np.linalg.det(np.column_stack(columns)))


def _initial_chord(x_final, xi_final, t, dyn):
    _, _, eta_p, eta_m = _endpoints(x_final, xi_final, t, dyn)
    return eta_p - eta_m


def quadrature_action(x_final, xi_final, t: float, dyn: Dynamics) -> float:
    """Chord action with the two trajectory legs of p dq integrated by adaptive quadrature"""
    eta_fp, eta_fm, eta_p, eta_m = _endpoints(x_final, xi_final, t, dyn)

    def leg(z0, duration):
        w = float(omega(z0, dyn))

        def integrand(s):
            q, p = flow(z0, s, dyn)
            return p * w * p  # p dq with qdot = omega p
        value, _ = quad(integrand, 0.0, duration, limit=500, epsabs=1e-12, epsrel=1e-13)
        return value

    def segment(a, b):
        value, _ = quad(lambda u: (a[1] + u * (b[1] - a[1])) * (b[0] - a[0]), 0.0, 1.0)
        return value

    circuit = leg(eta_fm, -t) + segment(eta_m, eta_p) + leg(eta_p, t) + segment(eta_fp, eta_fm)
    center = 0.5 * (eta_p + eta_m)
    xi = eta_p - eta_m
    energy = hamiltonian(eta_fp, dyn) - hamiltonian(eta_fm, dyn)
    return float(center[0] * xi[1] - center[1] * xi[0] - t * energy + circuit)


def sampled_rotation(x_final, xi_final, t: float, dyn: Dynamics, step: float = 0.05) -> float:
    """Rotation angle of T_-^-1 T_+ by unwrapping arg(alpha) over a fine time grid, alpha = (tr N + i (n21 - n12)) / 2"""
    x = np.asarray(x_final, dtype=float)
    xi = np.asarray(xi_final, dtype=float)
    eta_fp, eta_fm = x + 0.5 * xi, x - 0.5 * xi
    rate = abs(float(omega(eta_fp, dyn)) - float(omega(eta_fm, dyn))) + float(omega(eta_fp, dyn)) + 1.0
    s = -np.linspace(0.0, t, max(2000, int(math.ceil(rate * t / step)) + 1))
    n = np.linalg.inv(tangent_matrices(eta_fm, s, dyn)) @ tangent_matrices(eta_fp, s, dyn)
    alpha = 0.5 * ((n[:, 0, 0] + n[:, 1, 1]) + 1j * (n[:, 1, 0] - n[:, 0, 1]))
    return float(np.unwrap(np.angle(alpha))[-1])


def _timed(name: str, check: Callable[[], Dict[str, Any]], passed: Callable[[Dict[str, Any]], bool]) -> CheckResult:
    start = time.perf_counter()
    measured = check()
    result = CheckResult(name, bool(passed(measured)), measured, time.perf_counter() - start)
    logger.info(result.summary())
    return result


def check_full_revival(quick: bool = False) -> CheckResult:
    def run():
        fock = fock_coefficients(COHERENT_5, 64)
        return {"a2_at_revival": autocorr_exact(fock, revival_time())}
    return _timed("full_revival", run, lambda m: abs(m["a2_at_revival"] - 1.0) <= 1e-10)


def check_quantum_normalization(quick: bool = False) -> CheckResult:
    grid = Grid2D.square(8.0, 256 if quick else 512)

    def run():
        fock = fock_coefficients(COHERENT_5, 64)
        norm_err = purity_err = 0.0
        for t in (0.0, math.pi / 20.0, math.pi / 8.0):
            w = wigner_of_state(evolve(fock, t), grid)
            norm_err = max(norm_err, abs(normalization(w) - 1.0))
            purity_err = max(purity_err, abs(autocorr_overlap(w, w) - 1.0))
        return {"norm_error": norm_err, "purity_error": purity_err}
    return _timed("quantum_normalization", run,
                  lambda m: m["norm_error"] <= 1e-3 and m["purity_error"] <= 2e-3)


def check_marginals(quick: bool = False) -> CheckResult:
    grid = Grid2D.square(10.0, 256 if quick else 512)

    def run():
        state = evolve(fock_coefficients(StateSpec.displaced_fock(1, (5.0, 0.0)), 64), math.pi / 12.0)
        q, density = marginal(wigner_of_state(state, grid), POSITION)
        return {"max_abs_diff": float(np.max(np.abs(density - position_density(state, q))))}
    return _timed("marginals", run, lambda m: m["max_abs_diff"] <= 1e-5)


def _quadrature(quick: bool, check_convergence: bool = False) -> QuadratureSpec:
    return QuadratureSpec(chord_samples=256 if quick else 512, check_convergence=check_convergence)


def check_harmonic_exactness(quick: bool = False, workers: int = 1) -> CheckResult:
    grid = Grid2D.square(6.0, 16 if quick else 128)
    dyn = Dynamics.harmonic(1.0)
    state = StateSpec.coherent((3.0, 0.0))
    times = (1.7,) if quick else (0.3, 1.7, 4.0)

    def run():
        error = 0.0
        for t in times:
            exact = Field.from_function(grid, lambda z: wigner0(state, flow(z, -t, dyn)))
            approx = fvr_field(grid, t, state, _quadrature(quick), dyn, workers)
            error = max(error, float(np.max(np.abs(approx.values - exact.values))))
        return {"max_abs_error": error}
    return _timed("harmonic_exactness", run, lambda m: m["max_abs_error"] <= 1e-3)


def check_identity(quick: bool = False, workers: int = 1) -> CheckResult:
    grid = Grid2D.square(8.0, 12 if quick else 32)

    def run():
        exact = Field.from_function(grid, lambda z: wigner0(COHERENT_5, z))
        errors = []
        for m in (256, 512) if quick else (512, 1024):
            spec = QuadratureSpec(chord_samples=m, check_convergence=False)
            approx = fvr_field(grid, 0.0, COHERENT_5, spec, Dynamics.kerr(), workers)
            errors.append(float(np.max(np.abs(approx.values - exact.values))))
        return {"error_coarse": errors[0], "error_fine": errors[1]}
    return _timed("identity", run, lambda m: m["error_coarse"] <= 1e-3
                  and m["error_fine"] <= max(0.5 * m["error_coarse"], 1e-9))


def check_caustics(quick: bool = False) -> CheckResult:
    chords = Grid2D.square(2.0, 101 if quick else 201)
    x = PhasePoint(5.0, 2.0)

    def run():
        early = count_zero_contours(caustic_det_map(x, 0.013, chords), mask_radius=2.0)
        late = count_zero_contours(caustic_det_map(x, 0.071, chords), mask_radius=2.0)
        return {"contours_t0.013": early, "contours_t0.071": late}
    return _timed("caustics", run, lambda m: m["contours_t0.013"] == 0 and m["contours_t0.071"] > 0)


def _revival_comparison(t: float, quick: bool, workers: int):
    """FVR against the quantum field; M-doubling runs on every node and is reported, not gated"""
    grid = Grid2D.square(8.0, 32 if quick else 128)
    quantum = wigner_of_state(evolve(fock_coefficients(COHERENT_5, 64), t), grid)
    semiclassical = fvr_field(grid, t, COHERENT_5, _quadrature(quick, check_convergence=True),
                              Dynamics.kerr(), workers)
    report = compare(post_normalize(semiclassical), quantum)
    return semiclassical, report


def _unconverged(field: Field) -> int:
    return int(np.count_nonzero(~field.diagnostics["converged"]))


def check_cat_state(quick: bool = False, workers: int = 1) -> CheckResult:
    def run():
        semiclassical, report = _revival_comparison(math.pi / 8.0, quick, workers)
        return {"pearson": report.pearson, "deficit": 1.0 - normalization(semiclassical),
                "unconverged": _unconverged(semiclassical)}
    return _timed("cat_state", run, lambda m: m["pearson"] >= 0.9 and 0.0 < m["deficit"] < 0.5)


def check_pentagon(quick: bool = False, workers: int = 1) -> CheckResult:
    def run():
        semiclassical, report = _revival_comparison(math.pi / 20.0, quick, workers)
        return {"pearson": report.pearson, "lobes": count_local_maxima(post_normalize(semiclassical)),
                "unconverged": _unconverged(semiclassical)}
    return _timed("pentagon", run, lambda m: m["pearson"] >= 0.85 and m["lobes"] == 5)


def autocorr_times(n: int = 40) -> np.ndarray:
    """n equally spaced times in [0, pi/8) plus pi/8 itself"""
    return np.append(np.arange(n) * math.pi / 8.0 / n, math.pi / 8.0)


def check_autocorrelation(quick: bool = False, workers: int = 1) -> CheckResult:
    grid = Grid2D.square(8.0, 32 if quick else 128)
    times = autocorr_times(5 if quick else 40)

    def run():
        fock = fock_coefficients(COHERENT_5, 64)
        initial = Field.from_function(grid, lambda z: wigner0(COHERENT_5, z))
        quantum = autocorr_exact(fock, times)
        semiclassical = np.array([
            autocorr_overlap(post_normalize(fvr_field(grid, t, COHERENT_5, _quadrature(quick),
                                                      Dynamics.kerr(), workers)), initial)
            for t in times
        ])
        shifted = autocorr_exact(fock, times + revival_time())
        return {"max_abs_diff": float(np.max(np.abs(semiclassical - quantum))),
                "periodicity_error": float(np.max(np.abs(shifted - quantum)))}
    return _timed("autocorrelation", run,
                  lambda m: m["max_abs_diff"] <= 0.05 and m["periodicity_error"] <= 1e-10)


def check_phase_parity(quick: bool = False) -> CheckResult:
    def run():
        odd = [(a, b) for a in range(51) for b in range(51) if revival_phase_parity(a, b) % 2]
        dyn = Dynamics.kerr()
        error = 0.0
        mismatches = 0
        rng = np.random.default_rng(7)
        for j_plus, j_minus in [(12, 13), (3, 1), (2, 1), (7, 7), (1, 5)]:
            r_plus, r_minus = math.sqrt(revival_radii(j_plus)), math.sqrt(revival_radii(j_minus))
            a, b = rng.uniform(0, 2 * math.pi, 2)
            eta_plus = r_plus * np.array([math.cos(a), math.sin(a)])
            eta_minus = r_minus * np.array([math.cos(b), math.sin(b)])
            result = backward_chord_map(0.5 * (eta_plus + eta_minus), eta_plus - eta_minus, revival_time(), dyn)
            reference = result.center_init.q * result.xi_init.xi_p - result.center_init.p * result.xi_init.xi_q
            error = max(error, abs(result.action - reference - math.pi * (j_plus ** 2 - j_minus ** 2)))
            # the winding numbers are the Maslov contributions: sigma = 2 (j+ - j-)
            mismatches += int(result.maslov != 2 * (j_plus - j_minus))
        return {"odd_pairs": len(odd), "action_error": error, "maslov_mismatches": mismatches}
    return _timed("phase_parity", run, lambda m: m["odd_pairs"] == 0 and m["action_error"] <= 1e-8
                  and m["maslov_mismatches"] == 0)


def check_oracle_triangle(quick: bool = False) -> CheckResult:
    n = 20 if quick else 100
    rng = np.random.default_rng(11)
    dyn = Dynamics.kerr()

    def run():
        state = StateSpec.coherent((1.0, -0.5))
        radius = 6.0 * np.sqrt(rng.uniform(0, 1, n))
        angle = rng.uniform(0, 2 * math.pi, n)
        xi = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        chi_error = float(np.max(np.abs(numerical_chord_fn(state, xi) - chord_fn(state, xi))))

        det_error = action_error = rotation_error = 0.0
        for k in range(n):
            x = rng.uniform(-3, 3, 2)
            xi_f = rng.uniform(-2, 2, 2)
            t = rng.uniform(0.0, 0.05 if k % 2 else math.pi / 8.0)
            exact = chord_jacobian(x, xi_f, t, dyn)
            fd = finite_difference_jacobian(x, xi_f, t, dyn)
            det_error = max(det_error, abs(fd - exact) / max(abs(exact), 1.0))
            closed = float(_chord_action(*_endpoints(x, xi_f, t, dyn), t, dyn))
            action_error = max(action_error,
                               abs(closed - quadrature_action(x, xi_f, t, dyn)) / max(abs(closed), 1.0))
            rotation_error = max(rotation_error,
                                 abs(relative_rotation(x, xi_f, t, dyn) - sampled_rotation(x, xi_f, t, dyn)))
        return {"chi_error": chi_error, "det_rel_error": det_error, "action_rel_error": action_error,
                "rotation_error": rotation_error}
    return _timed("oracle_triangle", run, lambda m: m["chi_error"] <= 1e-6 and m["det_rel_error"] <= 1e-5
                  and m["action_rel_error"] <= 1e-8 and m["rotation_error"] <= 1e-8)


CHECKS = {
    "full_revival": check_full_revival,
    "quantum_normalization": check_quantum_normalization,
    "marginals": check_marginals,
    "harmonic_exactness": check_harmonic_exactness,
    "identity": check_identity,
    "caustics": check_caustics,
    "cat_state": check_cat_state,
    "pentagon": check_pentagon,
    "autocorrelation": check_autocorrelation,
    "phase_parity": check_phase_parity,
    "oracle_triangle": check_oracle_triangle,
}

_PARALLEL = {"harmonic_exactness", "identity", "cat_state", "pentagon", "autocorrelation"}


def run_checks(names: Optional[List[str]] = None, quick: bool = False, workers: int = 1) -> List[CheckResult]:
    results = []
    for name in names or list(CHECKS):
        if name not in CHECKS:
            raise ValueError(f"Unknown check '{name}'. Possible values are: {', '.join(CHECKS)}")
        kwargs = {"quick": quick}
        if name in _PARALLEL:
            kwargs["workers"] = workers
        results.append(CHECKS[name](**kwargs))
    return results
