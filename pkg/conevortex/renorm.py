"""Neumann Green's functions on the disc, the renormalized energy W and the upper-bound test field.

Vortex configurations live in the unit disc; the cone is reached through
P(z) = z^(alpha/2pi). Positions carry disc degrees: every point of a Case 1 or
Case 2 configuration has degree sgn(dbar - 1), and in Case 2 the first point is
the tip z0 = 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as poly

from .errors import (
    CoincidentVorticesError,
    ConfigError,
    NoInteriorMinimumError,
    OverlappingExcisionsError,
    SingularPointError,
)
from .field import SectorGrid, TangentField
from .geometry import TWO_PI, ConeParams, ConePoint, disc_to_sector, geodesic_distance
from .minimizer import (
    SolverOptions,
    canonical_boundary,
    core_winding,
    gamma0,
    gamma_radial,
    radial_core_profile,
    solve_core_mu,
    tip_core_branch,
)
from .optimize import descend

logger = logging.getLogger(__name__)

DEFAULT_MODES = 128
_COINCIDENT_TOL = 1e-9
_SINGULAR_TOL = 1e-12
_STATIONARY_TOL = 1e-8


def _unit(x: np.ndarray) -> np.ndarray:
    mod = np.abs(x)
    return np.where(mod > 0.0, x / np.where(mod > 0.0, mod, 1.0), 1.0)


# Boundary flux and Green's function


@dataclass(frozen=True, eq=False)
class BoundaryFlux:
    """Fourier data of the boundary flux phi = 1 + 2 Re sum_n c_n e^{in psi}.

    ``phase`` holds the coefficients p_n (n >= 1) of the periodic part of the boundary
    phase; Case 3 uses them directly since there the flux is undefined.
    """

    coefficients: np.ndarray
    phase: np.ndarray
    mean: float = 1.0

    def __post_init__(self) -> None:
        if self.mean != 1.0:
            raise ConfigError(f"Flux mean must be 1, got {self.mean!r}")
        for name in ("coefficients", "phase"):
            values = np.array(getattr(self, name), dtype=complex, copy=True).ravel()
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        if self.coefficients.size != self.phase.size:
            raise ConfigError("Flux and phase coefficients must have the same number of modes")

    @classmethod
    def canonical(cls, n_modes: int = DEFAULT_MODES) -> "BoundaryFlux":
        zeros = np.zeros(n_modes, dtype=complex)
        return cls(zeros, zeros)

    @classmethod
    def from_boundary(
        cls, profile: np.ndarray, dbar: int, cone: ConeParams, n_modes: int = DEFAULT_MODES
    ) -> "BoundaryFlux":
        """Pull a sector boundary datum sampled at theta_k = alpha k / n back to the disc."""
        profile = np.asarray(profile, dtype=complex)
        n = profile.size
        theta = cone.alpha * np.arange(n) / n
        psi = TWO_PI * np.arange(n) / n
        lifted = profile * np.exp(-1j * theta) * np.exp(-1j * (dbar - 1) * psi)
        periodic = np.unwrap(np.angle(lifted))
        if abs(periodic[-1] - periodic[0]) > math.pi:
            raise ConfigError(f"Boundary profile does not have degree {dbar}")
        spectrum = np.fft.rfft(periodic) / n
        phase = np.zeros(n_modes, dtype=complex)
        usable = min(n_modes, spectrum.size - 2)
        phase[:usable] = spectrum[1 : usable + 1]
        orders = np.arange(1, n_modes + 1)
        coefficients = 1j * orders * phase / (dbar - 1) if dbar != 1 else np.zeros(n_modes, dtype=complex)
        return cls(coefficients, phase)

    @property
    def n_modes(self) -> int:
        return self.coefficients.size

    @property
    def is_canonical(self) -> bool:
        return bool(np.allclose(self.coefficients, 0.0, atol=1e-12) and np.allclose(self.phase, 0.0, atol=1e-12))

    def density(self, psi: np.ndarray) -> np.ndarray:
        orders = np.arange(1, self.n_modes + 1)
        waves = np.exp(1j * np.multiply.outer(np.asarray(psi, dtype=float), orders))
        return self.mean + 2.0 * np.real(waves @ self.coefficients)


class GreensFunction:
    """G(z, p) = log|z-p| + log|1 - z conj(p)| + Re H(z) + Re H(p) - kappa.

    H(z) = 2 sum_n (c_n/n) z^n carries the non-constant flux; the constant kappa makes
    the flux-weighted boundary mean of G(., p) vanish.
    """

    def __init__(self, flux: BoundaryFlux) -> None:
        self.flux = flux
        orders = np.arange(1, flux.n_modes + 1)
        self._h = np.concatenate([[0.0], 2.0 * flux.coefficients / orders])
        self._dh = 2.0 * flux.coefficients
        self._phase = np.concatenate([[0.0], 2.0 * flux.phase])
        self._dphase = 2.0 * orders * flux.phase
        self.kappa = float(2.0 * np.sum(np.abs(flux.coefficients) ** 2 / orders))

    def h(self, z):
        return poly.polyval(np.asarray(z, dtype=complex), self._h)

    def dh(self, z):
        return poly.polyval(np.asarray(z, dtype=complex), self._dh)

    def phase(self, z):
        """Holomorphic extension 2 sum_n p_n z^n of the periodic boundary phase."""
        return poly.polyval(np.asarray(z, dtype=complex), self._phase)

    def dphase(self, z):
        return poly.polyval(np.asarray(z, dtype=complex), self._dphase)

    def regular(self, z, p):
        z = np.asarray(z, dtype=complex)
        p = np.asarray(p, dtype=complex)
        return np.log(np.abs(1.0 - z * np.conj(p))) + np.real(self.h(z)) + np.real(self.h(p)) - self.kappa

    def regular_diagonal(self, p):
        p = np.asarray(p, dtype=complex)
        return np.log(1.0 - np.abs(p) ** 2) + 2.0 * np.real(self.h(p)) - self.kappa

    def __call__(self, z, p):
        z = np.asarray(z, dtype=complex)
        p = np.asarray(p, dtype=complex)
        if np.any(np.abs(z - p) < _SINGULAR_TOL):
            raise SingularPointError("Green's function evaluated at its pole")
        return np.log(np.abs(z - p)) + self.regular(z, p)

    def holomorphic_derivative(self, z, p):
        """Derivative in z of the holomorphic function whose real part is G(., p)."""
        z = np.asarray(z, dtype=complex)
        p = np.asarray(p, dtype=complex)
        return 1.0 / (z - p) - np.conj(p) / (1.0 - z * np.conj(p)) + self.dh(z)

    def normal_derivative(self, p: complex, n_quad: int = 1024) -> np.ndarray:
        """d_nu G(., p) sampled at e^{i 2pi k / n_quad}."""
        z = np.exp(1j * TWO_PI * np.arange(n_quad) / n_quad)
        return np.real(z * self.holomorphic_derivative(z, p))


def neumann_green(flux: BoundaryFlux, z, p):
    return GreensFunction(flux)(z, p)


def regular_part(flux: BoundaryFlux, z, p):
    """R(z, p) = G(z, p) - log|z - p|; the diagonal is evaluated without cancellation."""
    green = GreensFunction(flux)
    z_arr = np.asarray(z, dtype=complex)
    p_arr = np.asarray(p, dtype=complex)
    if z_arr.shape == p_arr.shape and np.array_equal(z_arr, p_arr):
        value = green.regular_diagonal(p_arr)
    else:
        value = green.regular(z_arr, p_arr)
    return float(value) if np.ndim(value) == 0 else value


def normal_derivative(flux: BoundaryFlux, p: complex, n_quad: int = 1024) -> np.ndarray:
    return GreensFunction(flux).normal_derivative(p, n_quad)


# Vortex configurations


def select_case(dbar: int, cone: ConeParams) -> int:
    """3 if dbar = 1; 2 if dbar < 1 and alpha > 2pi/3; 1 otherwise."""
    if dbar == 1:
        return 3
    if dbar < 1 and cone.alpha > TWO_PI / 3.0:
        return 2
    return 1


def off_tip_count(dbar: int, cone: ConeParams) -> int:
    case = select_case(dbar, cone)
    if case == 3:
        return 0
    return abs(dbar) if case == 2 else abs(dbar - 1)


@dataclass(frozen=True)
class VortexConfig:
    disc_positions: Tuple[complex, ...]
    degrees: Tuple[int, ...]
    case: int
    energy: float | None = None

    def __post_init__(self) -> None:
        positions = tuple(complex(z) for z in self.disc_positions)
        degrees = tuple(int(d) for d in self.degrees)
        object.__setattr__(self, "disc_positions", positions)
        object.__setattr__(self, "degrees", degrees)
        if self.case not in (1, 2, 3):
            raise ConfigError(f"Unsupported case: {self.case!r}")
        if len(positions) != len(degrees):
            raise ConfigError("Positions and degrees differ in length")
        if any(abs(z) >= 1.0 for z in positions):
            raise ConfigError("Vortex positions must lie inside the unit disc")
        if self.case == 3 and positions:
            raise ConfigError("Case 3 places no vortices")
        if self.case == 2 and (not positions or positions[0] != 0.0):
            raise ConfigError("Case 2 configurations start with the tip z0 = 0")
        if self.case == 1 and any(z == 0.0 for z in positions):
            raise ConfigError("Case 1 vortices must stay away from the tip")

    @property
    def has_tip(self) -> bool:
        return self.case == 2

    @property
    def sign(self) -> int:
        return self.degrees[0] if self.degrees else 0

    @property
    def off_tip(self) -> Tuple[complex, ...]:
        return self.disc_positions[1:] if self.has_tip else self.disc_positions

    @property
    def dbar(self) -> int:
        return 1 + sum(self.degrees)

    def sector_points(self, cone: ConeParams) -> List[ConePoint]:
        points = []
        for z in self.off_tip:
            w = disc_to_sector(z, cone)
            points.append(ConePoint.from_polar(abs(w), math.atan2(w.imag, w.real), cone))
        return points

    def with_energy(self, energy: float) -> "VortexConfig":
        return VortexConfig(self.disc_positions, self.degrees, self.case, float(energy))

    def to_record(self, cone: ConeParams) -> Dict[str, object]:
        return {
            "case": self.case,
            "dbar": self.dbar,
            "W": self.energy,
            "disc_positions": [[z.real, z.imag] for z in self.disc_positions],
            "degrees": list(self.degrees),
            "sector_points": [{"r": p.r, "theta": p.theta} for p in self.sector_points(cone)],
        }


def vortex_config(dbar: int, cone: ConeParams, off_positions: Sequence[complex] = ()) -> VortexConfig:
    """Configuration with the case, tip point and degrees that belong to ``dbar``."""
    case = select_case(dbar, cone)
    expected = off_tip_count(dbar, cone)
    if len(off_positions) != expected:
        raise ConfigError(f"dbar={dbar} needs {expected} off-tip vortices, got {len(off_positions)}")
    if case == 3:
        return VortexConfig((), (), 3)
    sign = 1 if dbar > 1 else -1
    positions = ((0j,) if case == 2 else ()) + tuple(complex(z) for z in off_positions)
    return VortexConfig(positions, (sign,) * len(positions), case)


# Renormalized energy


def _w_value(z: np.ndarray, sign: int, has_tip: bool, cone: ConeParams, green: GreensFunction) -> float:
    off = z[1:] if has_tip else z
    a = cone.exponent
    n = z.size
    value = -cone.alpha * sign * float(np.sum(np.log(np.abs(off))))
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        value -= 2.0 * math.pi * float(np.sum(green(z[iu], z[ju])))
    value -= math.pi * float(np.sum(green.regular_diagonal(z)))
    value += math.pi * float(np.sum(np.log(a) + (a - 1.0) * np.log(np.abs(off))))
    return value


def _w_gradient(z: np.ndarray, sign: int, has_tip: bool, cone: ConeParams, green: GreensFunction) -> np.ndarray:
    """Gradient packed as dW/dx + i dW/dy; zero at the fixed tip."""
    a = cone.exponent
    grad = np.zeros_like(z)
    start = 1 if has_tip else 0
    for j in range(start, z.size):
        zj = z[j]
        others = np.delete(z, j)
        g = -cone.alpha * sign * np.conj(1.0 / zj)
        if others.size:
            g += -2.0 * math.pi * np.sum(np.conj(green.holomorphic_derivative(zj, others)))
        g += -math.pi * (-2.0 * zj / (1.0 - abs(zj) ** 2) + 2.0 * np.conj(green.dh(zj)))
        g += math.pi * (a - 1.0) * np.conj(1.0 / zj)
        grad[j] = g
    return grad


def _check_distinct(z: np.ndarray) -> None:
    if z.size < 2:
        return
    gaps = np.abs(z[:, None] - z[None, :]) + np.eye(z.size)
    if np.min(gaps) < _COINCIDENT_TOL:
        raise CoincidentVorticesError("Two vortices coincide")


def renormalized_energy(config: VortexConfig, cone: ConeParams, flux: BoundaryFlux) -> float:
    """W for the configuration; Case 3 is the Dirichlet energy of the harmonic boundary phase."""
    if config.case == 3:
        orders = np.arange(1, flux.n_modes + 1)
        return float(TWO_PI * np.sum(orders * np.abs(flux.phase) ** 2))
    z = np.array(config.disc_positions, dtype=complex)
    _check_distinct(z)
    if any(abs(p) < _SINGULAR_TOL for p in config.off_tip):
        raise SingularPointError("Off-tip vortex at the tip")
    return _w_value(z, config.sign, config.has_tip, cone, GreensFunction(flux))


def _objective(config: VortexConfig, cone: ConeParams, green: GreensFunction):
    sign, has_tip = config.sign, config.has_tip

    def fun(z: np.ndarray) -> tuple[float, np.ndarray]:
        off = z[1:] if has_tip else z
        if np.any(np.abs(z) >= 1.0) or np.any(np.abs(off) < _SINGULAR_TOL):
            return math.inf, np.zeros_like(z)
        try:
            _check_distinct(z)
        except CoincidentVorticesError:
            return math.inf, np.zeros_like(z)
        return _w_value(z, sign, has_tip, cone, green), _w_gradient(z, sign, has_tip, cone, green)

    return fun


def _newton_polish(fun, z: np.ndarray, free: np.ndarray, max_steps: int = 30, h: float = 1e-6) -> np.ndarray:
    """Newton steps on the gradient with a central-difference Hessian and a least-squares solve.

    The least-squares solve drops flat directions such as rotations of the whole configuration.
    """
    idx = np.nonzero(free)[0]

    def grad_vec(x: np.ndarray) -> np.ndarray:
        trial = z.copy()
        trial[idx] = x[: idx.size] + 1j * x[idx.size :]
        value, g = fun(trial)
        if not math.isfinite(value):
            raise ValueError("left the admissible set")
        return np.concatenate([g[idx].real, g[idx].imag])

    x = np.concatenate([z[idx].real, z[idx].imag])
    try:
        g = grad_vec(x)
        for _ in range(max_steps):
            if np.linalg.norm(g) < 1e-12:
                break
            hess = np.empty((x.size, x.size))
            for k in range(x.size):
                step = np.zeros_like(x)
                step[k] = h
                hess[:, k] = (grad_vec(x + step) - grad_vec(x - step)) / (2.0 * h)
            hess = 0.5 * (hess + hess.T)
            delta = np.linalg.lstsq(hess, g, rcond=1e-8)[0]
            candidate = x - delta
            g_new = grad_vec(candidate)
            if np.linalg.norm(g_new) >= np.linalg.norm(g):
                break
            x, g = candidate, g_new
    except ValueError:
        pass
    out = z.copy()
    out[idx] = x[: idx.size] + 1j * x[idx.size :]
    return out


def minimize_W(
    dbar: int,
    cone: ConeParams,
    flux: BoundaryFlux,
    K: int | None = None,
    *,
    n_starts: int = 16,
    seed: int = 0,
    max_iters: int = 5000,
) -> VortexConfig:
    """Multi-start descent over off-tip disc positions; the best stationary point wins."""
    expected = off_tip_count(dbar, cone)
    if K is not None and K != expected:
        raise ConfigError(f"K={K} is inconsistent with dbar={dbar} (expected {expected})")
    if n_starts < 1:
        raise ConfigError("n_starts must be >= 1")
    if expected == 0:
        config = vortex_config(dbar, cone)
        return config.with_energy(renormalized_energy(config, cone, flux))

    green = GreensFunction(flux)
    rng = np.random.default_rng(seed)
    template = vortex_config(dbar, cone, [0.5] * expected)
    fun = _objective(template, cone, green)
    free = np.ones(len(template.disc_positions), dtype=bool)
    if template.has_tip:
        free[0] = False

    best: VortexConfig | None = None
    for start in range(n_starts):
        radii = rng.uniform(0.1, 0.9, expected)
        angles = rng.uniform(0.0, TWO_PI, expected)
        off = radii * np.exp(1j * angles)
        z0 = np.concatenate([[0j], off]) if template.has_tip else off
        if not math.isfinite(fun(z0)[0]):
            logger.warning("minimize_W start %d is not admissible; skipped", start)
            continue
        result = descend(fun, z0, free=free, max_iters=max_iters, grad_tol=1e-7, relative=False)
        z = _newton_polish(fun, result.x, free)
        value, grad = fun(z)
        grad_norm = float(np.linalg.norm(grad))
        if not math.isfinite(value) or grad_norm >= _STATIONARY_TOL:
            logger.warning("minimize_W start %d ended off an interior stationary point (|g|=%.3g)", start, grad_norm)
            continue
        logger.debug("minimize_W start %d: W=%.12g |g|=%.3g", start, value, grad_norm)
        if best is None or value < best.energy:
            best = VortexConfig(tuple(z), template.degrees, template.case, float(value))
    if best is None:
        raise NoInteriorMinimumError(f"No start converged to an interior minimum for dbar={dbar}")
    return best


def w_landscape(
    dbar: int, cone: ConeParams, flux: BoundaryFlux, n_radii: int = 40, n_angles: int = 72
) -> pd.DataFrame:
    """W over single free vortex positions on a polar grid of the disc."""
    if off_tip_count(dbar, cone) != 1:
        raise ConfigError("The landscape needs exactly one free vortex")
    rows = []
    for rho in np.linspace(0.0, 1.0, n_radii + 2)[1:-1]:
        for phi in TWO_PI * np.arange(n_angles) / n_angles:
            z = rho * complex(math.cos(phi), math.sin(phi))
            value = renormalized_energy(vortex_config(dbar, cone, [z]), cone, flux)
            rows.append({"x": z.real, "y": z.imag, "W": value})
    return pd.DataFrame(rows, columns=["x", "y", "W"])


# Direct evaluation through boundary integrals


def _potential(config: VortexConfig, cone: ConeParams, green: GreensFunction):
    """Holomorphic Q on the disc whose real part U has |grad U| equal to the phase gradient."""
    a = cone.exponent
    if config.case == 3:

        def real_part(z):
            return a * np.log(np.abs(z)) - np.imag(green.phase(z))

        def derivative(z):
            return a / z + 1j * green.dphase(z)

        return real_part, derivative

    points = np.array(config.disc_positions, dtype=complex)
    sign = config.sign

    def real_part(z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape)
        for p in points:
            total = total + green(z, p)
        return sign * total + a * np.log(np.abs(z))

    def derivative(z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        for p in points:
            total = total + green.holomorphic_derivative(z, p)
        return sign * total + a / z

    return real_part, derivative


def direct_log_coefficient(config: VortexConfig, cone: ConeParams) -> float:
    """Coefficient m of pi log(1/eta) for this configuration."""
    a = cone.exponent
    tip = a + (config.sign if config.has_tip else 0)
    return len(config.off_tip) + tip**2 / a


def _hole_energy(
    eta: float, config: VortexConfig, cone: ConeParams, green: GreensFunction, n_quad: int
) -> float:
    real_part, derivative = _potential(config, cone, green)
    a = cone.exponent
    t = TWO_PI * np.arange(n_quad) / n_quad
    circle = np.exp(1j * t)

    def ring(radius: float) -> float:
        z = radius * circle
        return TWO_PI * float(np.mean(real_part(z) * np.real(derivative(z) * z)))

    total = ring(1.0) - ring(eta ** (1.0 / a))
    for z_j in config.off_tip:
        b = disc_to_sector(z_j, cone)
        w = b + eta * circle
        psi = math.atan2(b.imag, b.real) + np.angle(w * np.conj(b))
        z = np.abs(w) ** (1.0 / a) * np.exp(1j * psi / a)
        f = real_part(z)
        df = derivative(z) * z / (a * w)
        total -= TWO_PI * eta * float(np.mean(f * np.real(df * circle)))
    return 0.5 * total


def direct_renormalized_energy(
    config: VortexConfig,
    cone: ConeParams,
    flux: BoundaryFlux,
    etas: Sequence[float] = (0.1, 0.05, 0.025),
    n_quad: int = 4096,
) -> float:
    """Hole-excised Dirichlet energy minus pi m log(1/eta), extrapolated as W0 + c eta^2."""
    etas = [float(e) for e in etas]
    if len(etas) < 2 or any(e <= 0.0 for e in etas):
        raise ConfigError("Need at least two positive eta values")
    green = GreensFunction(flux)
    m = direct_log_coefficient(config, cone)
    values = [_hole_energy(e, config, cone, green, n_quad) - math.pi * m * math.log(1.0 / e) for e in etas]
    design = np.column_stack([np.ones(len(etas)), np.square(etas)])
    (w0, _), *_ = np.linalg.lstsq(design, np.array(values), rcond=None)
    return float(w0)


# Upper-bound construction


@dataclass(frozen=True)
class UpperBoundOptions:
    core_factor: float = 1.0
    margin_factor: float = 2.0
    tip_core: Literal["sector", "radial"] = "sector"
    blend_cells: int = 4
    core_rows: int = 48

    def __post_init__(self) -> None:
        if self.core_factor <= 0.0 or self.margin_factor < 0.0:
            raise ConfigError("Excision factors must be positive")
        if self.tip_core not in ("sector", "radial"):
            raise ConfigError(f"Unsupported tip core: {self.tip_core!r}")
        if self.blend_cells < 1:
            raise ConfigError("blend_cells must be >= 1")

    def core_radius(self, epsilon: float) -> float:
        return self.core_factor * math.sqrt(epsilon)

    def hole_radius(self, epsilon: float) -> float:
        return self.core_radius(epsilon) + self.margin_factor * epsilon**0.75


@dataclass(frozen=True)
class Excision:
    center: ConePoint
    radius: float
    degree: int
    tip: bool = False


@dataclass(frozen=True, eq=False)
class UpperBoundConstruction:
    field: TangentField
    blend_mask: np.ndarray
    holes: List[Excision] = field(default_factory=list)


def _outer_field(config: VortexConfig, cone: ConeParams):
    """Canonical harmonic unit field on the sector, as a function of unwrapped (r, theta)."""
    a = cone.exponent
    points = np.array(config.disc_positions, dtype=complex)

    def evaluate(r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = r ** (1.0 / a) * np.exp(1j * theta / a)
        factor = np.ones(np.broadcast(r, theta).shape, dtype=complex)
        for p in points:
            factor = factor * _unit(z - p) * _unit(1.0 - z * np.conj(p))
        if config.sign < 0:
            factor = np.conj(factor)
        return factor * np.exp(1j * theta)

    return evaluate


def _blend(distance: np.ndarray, radius: float, width: float) -> np.ndarray:
    return np.clip((distance - (radius - width)) / width, 0.0, 1.0)


def _check_excisions(holes: List[Excision], grid: SectorGrid) -> None:
    cone = grid.cone
    for i, hole in enumerate(holes):
        if hole.center.r + hole.radius >= grid.r_max:
            raise OverlappingExcisionsError(f"Excision around {hole.center} reaches the boundary")
        if not hole.tip and cone.alpha <= math.pi and hole.radius >= hole.center.r * math.sin(cone.alpha / 2.0):
            raise OverlappingExcisionsError(f"Excision around {hole.center} wraps around the tip")
        for other in holes[i + 1 :]:
            if geodesic_distance(hole.center, other.center, cone) <= hole.radius + other.radius:
                raise OverlappingExcisionsError(f"Excisions around {hole.center} and {other.center} overlap")


def construct_upper_bound(
    dbar: int,
    cone: ConeParams,
    epsilon: float,
    config: VortexConfig,
    grid: SectorGrid,
    *,
    options: UpperBoundOptions | None = None,
    solver: SolverOptions | None = None,
) -> UpperBoundConstruction:
    """Canonical harmonic field with vortex cores glued into excised discs."""
    opts = options or UpperBoundOptions()
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"Unsupported epsilon: {epsilon!r}")
    if grid.cone != cone:
        raise ConfigError("Grid and cone disagree")
    if config.case != select_case(dbar, cone) or config.dbar != dbar:
        raise ConfigError(f"Configuration does not belong to dbar={dbar}")

    outer = _outer_field(config, cone)
    omega = 1.0 / complex(outer(1.0, 0.0))
    r_nodes = grid.radii[:, None] * np.ones(grid.shape)
    t_nodes = np.ones(grid.shape) * grid.angles[None, :]
    values = omega * outer(r_nodes, t_nodes)
    blend_mask = np.zeros(grid.shape, dtype=bool)
    width = opts.blend_cells * grid.dr

    tip_radius = opts.core_radius(epsilon)
    hole_radius = opts.hole_radius(epsilon)
    holes = [Excision(ConePoint(0.0), tip_radius, 1 + (config.sign if config.has_tip else 0), tip=True)]
    holes += [Excision(p, hole_radius, config.sign) for p in config.sector_points(cone)]
    _check_excisions(holes, grid)

    # tip core
    which = tip_core_branch(dbar, cone)
    k = core_winding(which, cone)
    inside = r_nodes < tip_radius
    near_r = min(1e-6, 0.5 * tip_radius)
    c0 = float(np.angle(omega * outer(near_r, 0.0)))
    if opts.tip_core == "radial":
        profile = radial_core_profile(epsilon / tip_radius, k)
        core = profile(r_nodes / tip_radius) * np.exp(1j * k * t_nodes)
    else:
        _, sector = solve_core_mu(which, epsilon, tip_radius, cone, solver, grid_shape=(opts.core_rows, grid.n_theta))
        core = np.empty(grid.shape, dtype=complex)
        for col in range(grid.n_theta):
            column = sector.values[:, col]
            core[:, col] = np.interp(grid.radii, sector.grid.radii, column.real) + 1j * np.interp(
                grid.radii, sector.grid.radii, column.imag
            )
    mismatch = np.angle(values * np.exp(-1j * k * t_nodes) * np.exp(-1j * c0))
    lam = _blend(r_nodes, tip_radius, width)
    values = np.where(inside, core * np.exp(1j * (c0 + lam * mismatch)), values)
    blend_mask |= inside & (lam > 0.0)

    # off-tip cores
    if len(holes) > 1:
        profile = radial_core_profile(epsilon / hole_radius, 1.0)
    for hole in holes[1:]:
        b = hole.center.complex
        s = hole.degree
        images = [r_nodes * np.exp(1j * (t_nodes + wrap * cone.alpha)) for wrap in (-1, 0, 1)]
        dists = np.stack([np.abs(img - b) for img in images])
        wrap = np.argmin(dists, axis=0) - 1
        dist = np.min(dists, axis=0)
        mask = dist < hole.radius
        if not np.any(mask):
            continue
        theta_img = t_nodes + wrap * cone.alpha
        w = r_nodes * np.exp(1j * theta_img)
        local = _unit(w - b)
        local = local if s > 0 else np.conj(local)
        # local factor is 1 along the positive real offset
        near_w = b + 1e-7 * hole.radius
        near_theta = hole.center.theta + float(np.angle(near_w * np.conj(b)))
        c_j = float(np.angle(omega * outer(abs(near_w), near_theta)))
        smooth = omega * outer(r_nodes, theta_img) * np.conj(local)
        mismatch = np.angle(smooth * np.exp(-1j * c_j))
        lam = _blend(dist, hole.radius, width)
        core = profile(dist / hole.radius) * local * np.exp(1j * (c_j + lam * mismatch))
        values = np.where(mask, core * np.exp(-1j * wrap * cone.alpha), values)
        blend_mask |= mask & (lam > 0.0)

    values[-1] = canonical_boundary(dbar, grid).profile
    blend_mask[-1] = False
    return UpperBoundConstruction(TangentField(grid, values), blend_mask, holes)


def build_test_field(
    dbar: int,
    cone: ConeParams,
    epsilon: float,
    config: VortexConfig,
    grid: SectorGrid,
    *,
    options: UpperBoundOptions | None = None,
    solver: SolverOptions | None = None,
) -> TangentField:
    return construct_upper_bound(dbar, cone, epsilon, config, grid, options=options, solver=solver).field


# Expansion bookkeeping


@dataclass(frozen=True)
class ExpansionPrediction:
    K: int
    gamma: float
    gamma0: float
    W: float
    config: VortexConfig

    @property
    def value(self) -> float:
        return self.K * self.gamma + self.gamma0 + self.W

    def to_dict(self) -> Dict[str, float]:
        return {"K": self.K, "gamma": self.gamma, "gamma0": self.gamma0, "W": self.W, "predicted": self.value}


def predicted_constant(
    dbar: int,
    cone: ConeParams,
    eps_for_cores: Sequence[float],
    *,
    flux: BoundaryFlux | None = None,
    n_starts: int = 16,
    seed: int = 0,
    tip_constant: float | None = None,
    solver: SolverOptions | None = None,
) -> ExpansionPrediction:
    """K gamma + gamma0 + W: the predicted constant of the energy expansion."""
    flux = flux or BoundaryFlux.canonical()
    config = minimize_W(dbar, cone, flux, n_starts=n_starts, seed=seed)
    K = len(config.off_tip)
    gamma = gamma_radial(min(eps_for_cores))
    if tip_constant is None:
        tip_constant = gamma0(dbar, cone, list(eps_for_cores), solver).value
    return ExpansionPrediction(K, float(gamma), float(tip_constant), float(config.energy), config)
