from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid


@dataclass(frozen=True)
class PhasePoint:
    """A point (q, p) of the phase plane, hbar = 1"""
    q: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.q) and np.isfinite(self.p)):
            raise ValueError(f"Phase point components must be finite, got ({self.q}, {self.p})")

    def as_array(self) -> np.ndarray:
        return np.array([self.q, self.p], dtype=float)

    @classmethod
    def from_array(cls, z) -> 'PhasePoint':
        z = np.asarray(z, dtype=float)
        return cls(float(z[0]), float(z[1]))


@dataclass(frozen=True)
class Chord:
    """Displacement (xi_q, xi_p) between two phase points"""
    xi_q: float
    xi_p: float

    def __post_init__(self):
        if not (np.isfinite(self.xi_q) and np.isfinite(self.xi_p)):
            raise ValueError(f"Chord components must be finite, got ({self.xi_q}, {self.xi_p})")

    def as_array(self) -> np.ndarray:
        return np.array([self.xi_q, self.xi_p], dtype=float)

    @classmethod
    def from_array(cls, xi) -> 'Chord':
        xi = np.asarray(xi, dtype=float)
        return cls(float(xi[0]), float(xi[1]))


PointLike = Union[PhasePoint, Chord, np.ndarray, Tuple[float, float]]


def as_points(z: PointLike) -> np.ndarray:
    """Return z as a float array whose last axis holds the (q, p) pair"""
    if isinstance(z, (PhasePoint, Chord)):
        return z.as_array()
    arr = np.asarray(z, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"Expected a trailing axis of length 2, got shape {arr.shape}")
    return arr


def symplectic_product(a: PointLike, b: PointLike):
    """a.Jb = a_q b_p - a_p b_q, broadcast over leading axes"""
    a = as_points(a)
    b = as_points(b)
    result = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class Grid2D:
    """Rectangular sampling of the phase plane.

    Samples are stored row-major with p as the outer index running from p_max
    down to p_min, so that a raw dump reads like an image of the plane.
    """
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int
    n_p: int

    def __post_init__(self):
        if not self.q_min < self.q_max:
            raise ValueError(f"q_min must be below q_max, got {self.q_min} >= {self.q_max}")
        if not self.p_min < self.p_max:
            raise ValueError(f"p_min must be below p_max, got {self.p_min} >= {self.p_max}")
        if int(self.n_q) != self.n_q or int(self.n_p) != self.n_p:
            raise TypeError("Sample counts must be integers.")
        if self.n_q < 2 or self.n_p < 2:
            raise ValueError("A grid needs at least 2 samples per axis.")

    @classmethod
    def square(cls, halfwidth: float, n: int, center: PointLike = (0.0, 0.0)) -> 'Grid2D':
        q0, p0 = as_points(center)
        return cls(q0 - halfwidth, q0 + halfwidth, p0 - halfwidth, p0 + halfwidth, n, n)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_p, self.n_q)

    @property
    def size(self) -> int:
        return self.n_p * self.n_q

    @property
    def q_axis(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p_axis(self) -> np.ndarray:
        return np.linspace(self.p_max, self.p_min, self.n_p)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(q_min, q_max, p_min, p_max), the matplotlib imshow order"""
        return (self.q_min, self.q_max, self.p_min, self.p_max)

    def points(self) -> np.ndarray:
        """Node coordinates, shape (n_p, n_q, 2)"""
        Q, P = np.meshgrid(self.q_axis, self.p_axis)
        return np.stack([Q, P], axis=-1)

    def row_points(self, row: int) -> np.ndarray:
        """Node coordinates of one p-row, shape (n_q, 2)"""
        p = self.p_axis[row]
        return np.stack([self.q_axis, np.full(self.n_q, p)], axis=-1)

    def matches(self, other: 'Grid2D') -> bool:
        return (self.n_q == other.n_q and self.n_p == other.n_p
                and np.allclose([self.q_min, self.q_max, self.p_min, self.p_max],
                                [other.q_min, other.q_max, other.p_min, other.p_max],
                                rtol=0.0, atol=1e-12))


@dataclass(eq=False)
class Field:
    """Samples of a real or complex function on a Grid2D.

    `values` has shape (n_p, n_q). `diagnostics` carries optional per-node
    arrays of the same shape produced alongside the samples (quadrature
    residues, convergence flags).
    """
    grid: Grid2D
    values: np.ndarray
    diagnostics: Optional[Dict[str, np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.size != self.grid.size:
            raise ValueError(
                f"Field has {values.size} samples but its grid has {self.grid.size} nodes"
            )
        values = values.reshape(self.grid.shape)
        if not np.issubdtype(values.dtype, np.complexfloating):
            values = values.astype(float)
        if not np.all(np.isfinite(values)):
            raise ValueError("Field samples must be finite.")
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid2D, fn: Callable[[np.ndarray], np.ndarray]) -> 'Field':
        """Sample fn, which takes an array of (q, p) points, on every node"""
        return cls(grid, fn(grid.points()))

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.values))

    def with_values(self, values: np.ndarray) -> 'Field':
        return Field(self.grid, values)


def integrate_field(f: Field):
    """Trapezoidal estimate of the integral of f over the grid extents"""
    inner = trapezoid(f.values, dx=f.grid.dq, axis=1)
    total = trapezoid(inner, dx=f.grid.dp, axis=0)
    return complex(total) if f.is_complex else float(total)
