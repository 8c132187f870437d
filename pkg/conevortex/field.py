"""Tangent fields on the polar sector grid: seam access, degrees and the GL energy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, NamedTuple

import numpy as np

from .errors import ConfigError, DegreeUndefinedError, NonIntegerWindingError
from .geometry import TWO_PI, ConeParams

_MIN_NODES = 16
_MODULUS_FLOOR = 1e-9
_ROUNDING_TOL = 0.1


@dataclass(frozen=True)
class SectorGrid:
    """Uniform polar grid over [r_min, r_max] x [0, alpha) with the seam identified."""

    cone: ConeParams
    n_r: int
    n_theta: int
    r_min: float = 1e-3
    r_max: float = 1.0

    def __post_init__(self) -> None:
        if self.n_r < _MIN_NODES or self.n_theta < _MIN_NODES:
            raise ConfigError(f"Grid too coarse: n_r={self.n_r}, n_theta={self.n_theta} (need >= {_MIN_NODES})")
        if not (0.0 < self.r_min < self.r_max <= 1.0):
            raise ConfigError(f"Unsupported radial range: [{self.r_min!r}, {self.r_max!r}]")

    @cached_property
    def radii(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r)

    @cached_property
    def angles(self) -> np.ndarray:
        return self.cone.alpha * np.arange(self.n_theta) / self.n_theta

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.n_r - 1)

    @property
    def dtheta(self) -> float:
        return self.cone.alpha / self.n_theta

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_theta)

    @cached_property
    def points(self) -> np.ndarray:
        """Node positions r e^{i theta} in the sector plane."""
        return self.radii[:, None] * np.exp(1j * self.angles[None, :])

    @property
    def seam_factor(self) -> complex:
        return complex(np.exp(1j * self.cone.alpha))


@dataclass(frozen=True, eq=False)
class TangentField:
    """Complex field û on a SectorGrid, stored in the fixed Cartesian frame."""

    grid: SectorGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex, copy=True)
        if values.shape != self.grid.shape:
            raise ConfigError(f"Field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ConfigError("Field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Dirichlet and potential parts of the GL energy."""

    dirichlet: float
    potential: float
    total: float
    epsilon: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "dirichlet": self.dirichlet,
            "potential": self.potential,
            "total": self.total,
            "epsilon": self.epsilon,
        }


class _Weights(NamedTuple):
    radial: np.ndarray  # per radial edge, length n_r - 1
    angular: np.ndarray  # per ring, length n_r
    area: np.ndarray  # per ring, length n_r
    dtheta: float
    seam: complex


@lru_cache(maxsize=32)
def _weights(grid: SectorGrid) -> _Weights:
    r = grid.radii
    mids = 0.5 * (r[:-1] + r[1:])
    lo = np.concatenate([[r[0]], mids])
    hi = np.concatenate([mids, [r[-1]]])
    # cell integrals of r dr and dr / r taken exactly
    radial = (r[1:] ** 2 - r[:-1] ** 2) / (2.0 * grid.dr**2)
    angular = np.log(hi / lo) / grid.dtheta**2
    area = (hi**2 - lo**2) / 2.0
    return _Weights(radial, angular, area, grid.dtheta, grid.seam_factor)


def _angular_difference(u: np.ndarray, seam: complex) -> np.ndarray:
    shifted = np.roll(u, -1, axis=1)
    shifted[:, -1] *= seam
    return shifted - u


def energy_and_gradient(
    values: np.ndarray, grid: SectorGrid, epsilon: float, *, with_gradient: bool = True
) -> tuple[float, float, np.ndarray | None]:
    """Return (dirichlet, potential, gradient) of the discrete GL energy.

    The gradient is dE/dRe + i dE/dIm at every node.
    """
    w = _weights(grid)
    u = values
    d_r = u[1:] - u[:-1]
    d_t = _angular_difference(u, w.seam)
    defect = 1.0 - (u.real**2 + u.imag**2)

    dirichlet = 0.5 * w.dtheta * (
        np.sum(w.radial[:, None] * (d_r.real**2 + d_r.imag**2))
        + np.sum(w.angular[:, None] * (d_t.real**2 + d_t.imag**2))
    )
    potential = w.dtheta / (4.0 * epsilon**2) * np.sum(w.area[:, None] * defect**2)
    if not with_gradient:
        return float(dirichlet), float(potential), None

    grad = np.zeros_like(u)
    flux_r = w.dtheta * w.radial[:, None] * d_r
    grad[1:] += flux_r
    grad[:-1] -= flux_r
    flux_t = w.dtheta * w.angular[:, None] * d_t
    grad -= flux_t
    back = flux_t.copy()
    back[:, -1] *= np.conj(w.seam)
    grad += np.roll(back, 1, axis=1)
    grad -= (w.dtheta / epsilon**2) * w.area[:, None] * defect * u
    return float(dirichlet), float(potential), grad


def diagonal_preconditioner(grid: SectorGrid, epsilon: float) -> np.ndarray:
    """Positive diagonal approximation of the energy Hessian."""
    w = _weights(grid)
    diag = 2.0 * w.angular + w.area / epsilon**2
    diag[1:] += w.radial
    diag[:-1] += w.radial
    return np.repeat((w.dtheta * diag)[:, None], grid.n_theta, axis=1)


def gl_energy(field: TangentField, epsilon: float) -> EnergyBreakdown:
    """Discrete GL energy of ``field``."""
    if not epsilon > 0.0:
        raise ConfigError(f"epsilon must be positive, got {epsilon!r}")
    dirichlet, potential, _ = energy_and_gradient(field.values, field.grid, epsilon, with_gradient=False)
    return EnergyBreakdown(dirichlet, potential, dirichlet + potential, epsilon)


def energy_density(field: TangentField, epsilon: float, *, include_potential: bool = True) -> np.ndarray:
    """Per-node share of the energy; edge terms are split between their endpoints."""
    grid = field.grid
    w = _weights(grid)
    u = field.values
    d_r = u[1:] - u[:-1]
    d_t = _angular_difference(u, w.seam)
    edge_r = 0.5 * w.dtheta * w.radial[:, None] * np.abs(d_r) ** 2
    edge_t = 0.5 * w.dtheta * w.angular[:, None] * np.abs(d_t) ** 2
    if include_potential:
        density = w.dtheta / (4.0 * epsilon**2) * w.area[:, None] * (1.0 - np.abs(u) ** 2) ** 2
    else:
        density = np.zeros(grid.shape)
    density[1:] += 0.5 * edge_r
    density[:-1] += 0.5 * edge_r
    density += 0.5 * edge_t + 0.5 * np.roll(edge_t, 1, axis=1)
    return density


def region_energy(field: TangentField, epsilon: float, mask: np.ndarray, *, include_potential: bool = True) -> float:
    """Energy carried by the nodes selected by ``mask``; Dirichlet part only without the potential."""
    if mask.shape != field.grid.shape:
        raise ConfigError("Mask shape does not match the grid")
    return float(np.sum(energy_density(field, epsilon, include_potential=include_potential)[mask]))



def sample(field: TangentField, i_r: int, k_theta: int) -> complex:
    """Seam-aware accessor: index k_theta may lie outside [0, n_theta)."""
    n = field.grid.n_theta
    wraps, k = divmod(int(k_theta), n)
    return complex(field.values[i_r, k] * np.exp(1j * field.grid.cone.alpha * wraps))


def sample_many(field: TangentField, i_r: np.ndarray, k_theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`sample`."""
    n = field.grid.n_theta
    k_theta = np.asarray(k_theta, dtype=int)
    wraps, k = np.divmod(k_theta, n)
    return field.values[np.asarray(i_r, dtype=int), k] * np.exp(1j * field.grid.cone.alpha * wraps)


def winding_along(values: np.ndarray) -> float:
    """Accumulated principal phase increments along a closed sequence.

    The sequence must repeat its first point (after any seam factor) at the end.
    """
    values = np.asarray(values, dtype=complex)
    if np.any(np.abs(values) < _MODULUS_FLOOR):
        raise DegreeUndefinedError("Loop passes through a zero of the field")
    steps = np.angle(values[1:] * np.conj(values[:-1]))
    if np.any(np.abs(steps) >= math.pi):
        raise DegreeUndefinedError("Phase step of pi or more along the loop; refine the grid")
    return float(np.sum(steps))


def _ring(field: TangentField, i_r: int) -> np.ndarray:
    row = field.values[i_r]
    return np.concatenate([row, [row[0] * field.grid.seam_factor]])


def loop_current(field: TangentField, i_r: int) -> float:
    """Winding of û around the ring at radius r_i, seam factor included."""
    return winding_along(_ring(field, i_r))


def degree_from_current(current: float, alpha: float) -> int:
    raw = 1.0 + (current - alpha) / TWO_PI
    rounded = int(round(raw))
    if abs(raw - rounded) >= _ROUNDING_TOL:
        raise NonIntegerWindingError(f"Winding residual {abs(raw - rounded):.3f} is too large")
    return rounded


def degree(field: TangentField, i_r: int) -> int:
    """Cone degree on the tip-enclosing ring at radius r_i."""
    return degree_from_current(loop_current(field, i_r), field.grid.cone.alpha)


def current_density(field: TangentField) -> np.ndarray:
    """Angular current j(û)/|û|^2 = Im(conj(û) d_theta û)/|û|^2 by centered differences."""
    grid = field.grid
    u = field.values
    forward = np.roll(u, -1, axis=1)
    forward[:, -1] *= grid.seam_factor
    backward = np.roll(u, 1, axis=1)
    backward[:, 0] *= np.conj(grid.seam_factor)
    steps = np.angle(forward * np.conj(u)) + np.angle(u * np.conj(backward))
    return steps / (2.0 * grid.dtheta)


def circle_dirichlet(field: TangentField, i_r: int) -> float:
    """½ of the loop integral of |Dv|^2 for the unit field v = û/|û| on ring i_r."""
    ring = _ring(field, i_r)
    if np.any(np.abs(ring) < _MODULUS_FLOOR):
        raise DegreeUndefinedError("Ring passes through a zero of the field")
    v = ring / np.abs(ring)
    r = field.grid.radii[i_r]
    ds = r * field.grid.dtheta
    return float(0.5 * np.sum(np.abs(np.diff(v)) ** 2) / ds)


def circle_lower_bound(degree_value: int, r: float, cone: ConeParams, *, encloses_tip: bool = True) -> float:
    """Sharp lower bound for ½∮|Dv|^2 over a circle of radius ``r``."""
    if encloses_tip:
        return (TWO_PI * (degree_value - 1) + cone.alpha) ** 2 / (2.0 * r * cone.alpha)
    return math.pi * degree_value**2 / r
