"""Cone geometry through the unrolled sector and the conformal disc map."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularPointError

TWO_PI = 2.0 * math.pi
_DISC_TOL = 1e-12


@dataclass(frozen=True)
class ConeParams:
    """Cone of generator length 1 unrolled into a sector of opening ``alpha``."""

    alpha: float
    generator_length: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < TWO_PI) or not math.isfinite(self.alpha):
            raise ConfigError(f"Unsupported cone angle: {self.alpha!r} (need 0 < alpha < 2*pi)")
        if self.generator_length != 1.0:
            raise ConfigError("Generator length is fixed at 1")

    @property
    def exponent(self) -> float:
        """Exponent a = alpha / 2pi of the conformal map z -> z^a."""
        return self.alpha / TWO_PI


@dataclass(frozen=True)
class ConePoint:
    """Polar point (r, theta) of the unrolled sector."""

    r: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.r <= 1.0 + _DISC_TOL):
            raise ConfigError(f"Radius out of range: {self.r!r}")
        if self.theta < 0.0:
            raise ConfigError(f"Angle out of range: {self.theta!r}")
        if self.r == 0.0 and self.theta != 0.0:
            object.__setattr__(self, "theta", 0.0)

    @classmethod
    def from_polar(cls, r: float, theta: float, cone: ConeParams) -> "ConePoint":
        """Build a point, wrapping ``theta`` into [0, alpha)."""
        theta = float(np.mod(theta, cone.alpha))
        if theta >= cone.alpha:
            theta = 0.0
        return cls(float(r), theta)

    def check(self, cone: ConeParams) -> "ConePoint":
        if self.theta >= cone.alpha:
            raise ConfigError(f"Angle {self.theta!r} outside [0, {cone.alpha!r})")
        return self

    @property
    def complex(self) -> complex:
        return self.r * complex(math.cos(self.theta), math.sin(self.theta))


def angular_gap(theta_p, theta_q, alpha: float):
    """Shortest angular separation on the cone, always <= alpha/2."""
    diff = np.abs(np.asarray(theta_p, dtype=float) - np.asarray(theta_q, dtype=float))
    diff = np.mod(diff, alpha)
    return np.minimum(diff, alpha - diff)


def geodesic_radial(r_p, theta_p, r_q, theta_q, alpha: float):
    """Vectorized geodesic distance on coordinate arrays."""
    delta = angular_gap(theta_p, theta_q, alpha)
    # delta <= alpha/2 < pi, so the unrolled segment never crosses the tip
    sq = np.asarray(r_p) ** 2 + np.asarray(r_q) ** 2 - 2.0 * np.asarray(r_p) * np.asarray(r_q) * np.cos(delta)
    return np.sqrt(np.maximum(sq, 0.0))


def geodesic_distance(p: ConePoint, q: ConePoint, cone: ConeParams) -> float:
    """Geodesic distance between two cone points."""
    if p == q:
        return 0.0
    return float(geodesic_radial(p.r, p.theta, q.r, q.theta, cone.alpha))


def disc_to_sector(z, cone: ConeParams):
    """Conformal map P(z) = z^(alpha/2pi) with arg z taken in [0, 2pi)."""
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(z_arr) > 1.0 + _DISC_TOL):
        raise ConfigError("Point outside the unit disc")
    a = cone.exponent
    arg = np.mod(np.angle(z_arr), TWO_PI)
    w = np.abs(z_arr) ** a * np.exp(1j * a * arg)
    return complex(w) if w.ndim == 0 else w


def sector_to_disc(w, cone: ConeParams):
    """Inverse of :func:`disc_to_sector` on the sector [0, alpha)."""
    w_arr = np.asarray(w, dtype=complex)
    if np.any(np.abs(w_arr) > 1.0 + _DISC_TOL):
        raise ConfigError("Point outside the unit sector")
    arg = np.mod(np.angle(w_arr), TWO_PI)
    arg = np.where(np.abs(w_arr) == 0.0, 0.0, arg)
    if np.any(arg >= cone.alpha):
        raise ConfigError(f"Sector argument outside [0, {cone.alpha!r})")
    scale = TWO_PI / cone.alpha
    z = np.abs(w_arr) ** scale * np.exp(1j * scale * arg)
    return complex(z) if z.ndim == 0 else z


def conformal_derivative_modulus(z, cone: ConeParams):
    """|P'(z)| = (alpha/2pi) |z|^(alpha/2pi - 1)."""
    mod = np.abs(np.asarray(z, dtype=complex))
    if np.any(mod == 0.0):
        raise SingularPointError("Conformal derivative is singular at the origin")
    a = cone.exponent
    value = a * mod ** (a - 1.0)
    return float(value) if np.ndim(value) == 0 else value
