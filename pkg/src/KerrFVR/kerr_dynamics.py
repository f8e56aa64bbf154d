"""Exact classical flow of the Kerr Hamiltonian H = (q^2 + p^2)^2.

Every orbit is a circle about the origin travelled clockwise at the conserved
angular frequency omega = 4(q^2 + p^2), so the flow, its tangent map and the
action along an arc all have closed forms. A harmonic variant with fixed
frequency shares the same rotation and serves as an exactness check for the
semiclassical propagator.
"""
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError
from .phase_space import PhasePoint, PointLike, as_points

KERR = "kerr"
HARMONIC = "harmonic"


@dataclass(frozen=True)
class Dynamics:
    """Which Hamiltonian generates the flow"""
    kind: str = KERR
    omega0: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (KERR, HARMONIC):
            raise ValueError(f"Unknown dynamics kind '{self.kind}'. Possible values are: {KERR}, {HARMONIC}")
        if self.kind == HARMONIC and (self.omega0 is None or not self.omega0 > 0):
            raise ValueError("Harmonic dynamics requires a frequency omega0 > 0.")

    @classmethod
    def kerr(cls) -> 'Dynamics':
        return cls(KERR)

    @classmethod
    def harmonic(cls, omega0: float) -> 'Dynamics':
        return cls(HARMONIC, float(omega0))

    @property
    def is_kerr(self) -> bool:
        return self.kind == KERR


@dataclass(frozen=True)
class TangentMap:
    """Derivative of the flow with respect to the initial point"""
    m_qq: float
    m_qp: float
    m_pq: float
    m_pp: float

    @property
    def det(self) -> float:
        return self.m_qq * self.m_pp - self.m_qp * self.m_pq

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.m_qq, self.m_qp], [self.m_pq, self.m_pp]])


def _radius2(z: np.ndarray) -> np.ndarray:
    return z[..., 0] ** 2 + z[..., 1] ** 2


def _like_input(z_in: PointLike, z_out: np.ndarray):
    return PhasePoint.from_array(z_out) if isinstance(z_in, PhasePoint) else z_out


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def hamiltonian(z: PointLike, dyn: Dynamics):
    r2 = _radius2(as_points(z))
    if dyn.is_kerr:
        return _scalar(r2 ** 2)
    return _scalar(0.5 * dyn.omega0 * r2)


def omega(z: PointLike, dyn: Dynamics):
    """Angular frequency of the orbit through z; conserved along the flow"""
    z = as_points(z)
    if dyn.is_kerr:
        return _scalar(4.0 * _radius2(z))
    return _scalar(np.full(z.shape[:-1], dyn.omega0) if z.ndim > 1 else dyn.omega0)


def omega_gradient(z: PointLike, dyn: Dynamics) -> np.ndarray:
    z = as_points(z)
    if dyn.is_kerr:
        return 8.0 * z
    return np.zeros_like(z)


def rotate(z: np.ndarray, theta) -> np.ndarray:
    """Clockwise rotation by theta, q + ip -> (q + ip) exp(-i theta).

    This is the sense fixed by qdot = dH/dp, pdot = -dH/dq for any H that
    increases with the radius; every other routine rotates through here.
    """
    c = np.cos(theta)
    s = np.sin(theta)
    q = z[..., 0]
    p = z[..., 1]
    return np.stack([c * q + s * p, c * p - s * q], axis=-1)


def flow(z0: PointLike, t, dyn: Dynamics):
    """Exact flow for time t (negative t runs backward)"""
    z = as_points(z0)
    theta = np.asarray(omega(z, dyn)) * t
    return _like_input(z0, rotate(z, theta))


def tangent_matrices(z0: PointLike, t, dyn: Dynamics) -> np.ndarray:
    """Flow derivative R(theta) (I + t G z0 grad(omega)^T), shape (..., 2, 2)

    G = R^{-1} dR/dtheta = [[0, 1], [-1, 0]], so G z0 = (p0, -q0).
    """
    z = as_points(z0)
    theta = np.asarray(omega(z, dyn)) * t
    grad = omega_gradient(z, dyn)
    gz = np.stack([z[..., 1], -z[..., 0]], axis=-1)
    tt = np.asarray(t, dtype=float)[..., None, None]
    shear = np.eye(2) + tt * gz[..., :, None] * grad[..., None, :]
    c = np.cos(theta)
    s = np.sin(theta)
    rot = np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)
    return rot @ shear


def flow_tangent(z0: PointLike, t, dyn: Dynamics) -> Union[TangentMap, np.ndarray]:
    m = tangent_matrices(z0, t, dyn)
    if m.ndim == 2:
        return TangentMap(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))
    return m


def arc_action(z0: PointLike, t, dyn: Dynamics):
    """Integral of p dq along the path z0 -> flow(z0, t).

    For negative t the path is the backward arc, traversed from z0 towards
    flow(z0, t), so arc_action(z, s + t) == arc_action(z, s) + arc_action(flow(z, s), t).
    The rotation angle is kept unreduced so complete windings contribute.
    """
    z = as_points(z0)
    r2 = _radius2(z)
    phi = np.arctan2(z[..., 1], z[..., 0])
    theta = np.asarray(omega(z, dyn)) * t
    value = r2 * (0.5 * theta - 0.25 * (np.sin(2.0 * phi) - np.sin(2.0 * (phi - theta))))
    return _scalar(value)


def delta_H(eta_plus: PointLike, eta_minus: PointLike, dyn: Dynamics):
    return _scalar(np.asarray(hamiltonian(eta_plus, dyn)) - np.asarray(hamiltonian(eta_minus, dyn)))


def revival_time() -> float:
    """Period of the quantum Kerr evolution, pi/4"""
    return math.pi / 4.0


def ehrenfest_time(center: PointLike, dyn: Optional[Dynamics] = None) -> float:
    """Time for the orbit through center to complete one revolution"""
    w = omega(center, dyn or Dynamics.kerr())
    if w == 0.0:
        raise DomainError("Ehrenfest time is undefined at the origin: the orbit does not rotate.")
    return 2.0 * math.pi / w


def fractional_revival_time(a: int, b: int) -> float:
    """t = (2a/b) T_rev, the times at which the Kerr state splits into copies"""
    if b <= 0:
        raise ValueError("b must be a positive integer.")
    if math.gcd(a, b) != 1:
        raise ValueError(f"a={a} and b={b} must be coprime.")
    return 2.0 * a / b * revival_time()
