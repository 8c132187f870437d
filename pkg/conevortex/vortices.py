"""Vortex detection on converged fields and the fit of the energy expansion."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .balls import BallFamily, contains, family_from_positions, grow, lower_bound_ledger
from .degree_cost import m_closed
from .errors import (
    ConfigError,
    DegenerateDesignError,
    DegreeUndefinedError,
    InconsistentDegreesError,
    NonIntegerWindingError,
    UnresolvedCoreError,
)
from .field import TangentField, degree, region_energy, sample_many, winding_along
from .geometry import ConeParams, ConePoint, geodesic_radial

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectionOptions:
    core_threshold: float = 0.5
    clean_threshold: float = 0.7
    merge_distance_factor: float = 4.0
    tip_radius_factor: float = 3.0
    tip_radius_cap: float = 0.5

    def tip_radius(self, epsilon: float) -> float:
        """Radius ``tip_radius_factor * sqrt(epsilon)`` of the tip region, clipped at ``tip_radius_cap``.

        With the defaults the cap binds once epsilon > 1/36; vortices between the cap and
        ``3 sqrt(epsilon)`` are then reported off the tip.
        """
        radius = self.tip_radius_factor * math.sqrt(epsilon)
        if radius > self.tip_radius_cap:
            logger.warning(
                "tip radius %.4g capped at %.4g for epsilon=%.4g", radius, self.tip_radius_cap, epsilon
            )
            return self.tip_radius_cap
        return radius


@dataclass
class VortexSet:
    tip_degree: int
    vortices: List[Tuple[ConePoint, int]] = field(default_factory=list)
    dbar: int = 0
    alpha: float = 0.0
    epsilon: float = 0.0

    @property
    def count(self) -> int:
        return len(self.vortices)

    def to_record(self) -> Dict[str, object]:
        return {
            "alpha": self.alpha,
            "dbar": self.dbar,
            "epsilon": self.epsilon,
            "tip_degree": self.tip_degree,
            "vortices": [{"r": p.r, "theta": p.theta, "degree": d} for p, d in self.vortices],
        }


@dataclass
class _Component:
    rows: np.ndarray
    cols: np.ndarray  # unwrapped around a reference column
    weight: np.ndarray
    centroid: ConePoint | None = None


def tip_modulus_min(field_: TangentField, epsilon: float) -> float:
    """Smallest |û| over the nodes with r < 3 sqrt(eps)."""
    rows = field_.grid.radii < 3.0 * math.sqrt(epsilon)
    if not np.any(rows):
        return float(np.min(np.abs(field_.values[0])))
    return float(np.min(np.abs(field_.values[rows])))


def _label_periodic(mask: np.ndarray) -> List[np.ndarray]:
    """Connected components of ``mask`` with the angular direction wrapped."""
    labels, count = ndimage.label(mask)
    parent = list(range(count + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for row in np.nonzero(mask[:, 0] & mask[:, -1])[0]:
        a, b = find(labels[row, 0]), find(labels[row, -1])
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = np.array([find(label) for label in range(count + 1)])
    merged = roots[labels]
    return [np.argwhere(merged == root) for root in np.unique(merged[mask])]


def _unwrap_columns(cols: np.ndarray, ref: int, n: int) -> np.ndarray:
    shift = np.round((cols - ref) / n).astype(int)
    return cols - shift * n


def _build_component(field_: TangentField, nodes: np.ndarray) -> _Component:
    grid = field_.grid
    rows, cols = nodes[:, 0], nodes[:, 1]
    modulus = np.abs(field_.values[rows, cols])
    ref = int(cols[np.argmin(modulus)])
    cols = _unwrap_columns(cols, ref, grid.n_theta)
    weight = np.maximum(1.0 - modulus**2, 1e-12)
    points = grid.radii[rows] * np.exp(1j * grid.dtheta * cols)
    center = np.sum(weight * points) / np.sum(weight)
    centroid = ConePoint.from_polar(abs(center), math.atan2(center.imag, center.real), grid.cone)
    return _Component(rows, cols, weight, centroid)


def _components_close(a: _Component, b: _Component, field_: TangentField, distance: float) -> bool:
    grid = field_.grid
    ra, ta = grid.radii[a.rows], grid.dtheta * a.cols
    rb, tb = grid.radii[b.rows], grid.dtheta * b.cols
    dist = geodesic_radial(ra[:, None], ta[:, None], rb[None, :], tb[None, :], grid.cone.alpha)
    return bool(np.min(dist) <= distance)


def _merge_nearby(field_: TangentField, comps: List[np.ndarray], distance: float) -> List[np.ndarray]:
    groups = [c for c in comps]
    merged = True
    while merged:
        merged = False
        built = [_build_component(field_, g) for g in groups]
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if _components_close(built[i], built[j], field_, distance):
                    groups[i] = np.vstack([groups[i], groups[j]])
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    return groups


def _box_loop(i0: int, i1: int, k0: int, k1: int) -> Tuple[np.ndarray, np.ndarray]:
    """Index loop around [i0, i1] x [k0, k1], counter-clockwise in the sector plane."""
    bottom = [(i0, k) for k in range(k0, k1 + 1)]
    right = [(i, k1) for i in range(i0 + 1, i1 + 1)]
    top = [(i1, k) for k in range(k1 - 1, k0 - 1, -1)]
    left = [(i, k0) for i in range(i1 - 1, i0, -1)]
    # (theta, r) -> plane reverses orientation
    loop = (bottom + right + top + left)[::-1]
    idx = np.array(loop, dtype=int)
    return idx[:, 0], idx[:, 1]


def _enclosing_degree(field_: TangentField, comp: _Component, clean: float) -> Tuple[int, int]:
    """Degree on the smallest clean box loop around ``comp``; returns (degree, top row)."""
    grid = field_.grid
    i_lo, i_hi = int(comp.rows.min()), int(comp.rows.max())
    k_lo, k_hi = int(comp.cols.min()), int(comp.cols.max())
    margin = 1
    while True:
        i0, i1 = i_lo - margin, i_hi + margin
        k0, k1 = k_lo - margin, k_hi + margin
        if i0 < 0 or i1 > grid.n_r - 1 or (k1 - k0 + 1) >= grid.n_theta:
            raise UnresolvedCoreError(f"No clean loop around the core near {comp.centroid}")
        rows, cols = _box_loop(i0, i1, k0, k1)
        values = sample_many(field_, rows, cols)
        if np.all(np.abs(values) > clean):
            closed = np.concatenate([values, values[:1]])
            winding = winding_along(closed) / (2.0 * math.pi)
            value = int(round(winding))
            if abs(winding - value) >= 0.1:
                raise NonIntegerWindingError(f"Core winding {winding:.3f} is not an integer")
            return value, i1
        margin += 1


def detect_vortices(field_: TangentField, epsilon: float, options: DetectionOptions | None = None) -> VortexSet:
    """Locate cores, assign degrees and check that they add up to the boundary degree."""
    opts = options or DetectionOptions()
    grid = field_.grid
    modulus = np.abs(field_.values)
    dbar = degree(field_, grid.n_r - 1)

    mask = modulus < opts.core_threshold
    groups = _merge_nearby(field_, _label_periodic(mask), opts.merge_distance_factor * epsilon)
    comps = [_build_component(field_, g) for g in groups]
    tip_radius = opts.tip_radius(epsilon)
    tip_comps = [c for c in comps if c.rows.min() == 0 or c.centroid.r <= tip_radius]
    off_comps = [c for c in comps if not (c.rows.min() == 0 or c.centroid.r <= tip_radius)]

    tip_extent = max((int(c.rows.max()) for c in tip_comps), default=-1)
    ring = next(
        (i for i in range(tip_extent + 1, grid.n_r) if np.min(modulus[i]) > opts.clean_threshold),
        None,
    )
    if ring is None:
        raise UnresolvedCoreError("No clean ring around the tip")
    try:
        ring_degree = degree(field_, ring)
    except DegreeUndefinedError as exc:
        raise UnresolvedCoreError(f"Tip ring at r={grid.radii[ring]:.4g} is not clean") from exc

    vortices: List[Tuple[ConePoint, int]] = []
    enclosed = 0
    for comp in off_comps:
        value, _ = _enclosing_degree(field_, comp, opts.clean_threshold)
        if value == 0:
            logger.debug("dropping degree-zero core at %s", comp.centroid)
            continue
        if comp.rows.max() < ring:
            enclosed += value
        vortices.append((comp.centroid, value))
    tip_degree = ring_degree - enclosed
    vortices.sort(key=lambda item: (item[0].r, item[0].theta))

    total = tip_degree + sum(d for _, d in vortices)
    if total != dbar:
        raise InconsistentDegreesError(f"Degrees add to {total}, boundary degree is {dbar}")
    return VortexSet(tip_degree, vortices, dbar, grid.cone.alpha, float(epsilon))


@dataclass(frozen=True)
class ExpansionFit:
    slope: float
    intercept: float
    residual: float


def fit_expansion(runs: Sequence[Tuple[float, float]]) -> ExpansionFit:
    """Least squares of total energy against log(1/eps)."""
    if len(runs) < 3:
        raise DegenerateDesignError("Need at least three runs")
    eps = np.array([r[0] for r in runs], dtype=float)
    energy = np.array([r[1] for r in runs], dtype=float)
    if np.any(eps <= 0.0):
        raise DegenerateDesignError("epsilon values must be positive")
    if np.unique(eps).size < 2:
        raise DegenerateDesignError("All runs share the same epsilon")
    x = np.log(1.0 / eps)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, energy, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([slope, intercept]) - energy)))
    return ExpansionFit(float(slope), float(intercept), residual)


def family_from_vortices(vset: VortexSet, radius: float) -> BallFamily:
    """Initial ball family of ``radius`` around the tip and every detected vortex."""
    return family_from_positions(vset.tip_degree, vset.vortices, radius, ConeParams(vset.alpha))


@dataclass(frozen=True)
class LedgerCheck:
    """Growth ledger of the bad set against the Dirichlet energy around the final balls."""

    ledger: float
    inside_dirichlet: float
    outside_dirichlet: float
    slack: float
    eta: float

    @property
    def holds(self) -> bool:
        return self.ledger <= self.outside_dirichlet + self.slack

    def to_dict(self) -> Dict[str, object]:
        return {
            "ledger": self.ledger,
            "inside_dirichlet": self.inside_dirichlet,
            "outside_dirichlet": self.outside_dirichlet,
            "slack": self.slack,
            "eta": self.eta,
            "holds": self.holds,
        }


def ledger_check(field_: TangentField, epsilon: float, vset: VortexSet, eta: float | None = None) -> LedgerCheck:
    """Grow epsilon-balls around the detected cores to radius ``eta`` (default sqrt(epsilon)).

    The ledger of that growth is compared with the Dirichlet energy left outside the final
    balls plus the slack pi m(dbar, alpha) log(1/eta).
    """
    eta = math.sqrt(epsilon) if eta is None else float(eta)
    if not 0.0 < epsilon < eta <= 1.0:
        raise ConfigError(f"Need 0 < epsilon < eta <= 1, got epsilon={epsilon!r}, eta={eta!r}")
    cone = ConeParams(vset.alpha)
    traj = grow(family_from_vortices(vset, epsilon), math.log(eta / epsilon))
    grid = field_.grid
    r, theta = np.meshgrid(grid.radii, grid.angles, indexing="ij")
    inside = contains(traj.final, r, theta)
    check = LedgerCheck(
        ledger=lower_bound_ledger(traj, cone),
        inside_dirichlet=region_energy(field_, epsilon, inside, include_potential=False),
        outside_dirichlet=region_energy(field_, epsilon, ~inside, include_potential=False),
        slack=math.pi * m_closed(vset.dbar, cone) * math.log(1.0 / eta),
        eta=eta,
    )
    logger.debug("ledger check eps=%g eta=%g: %s", epsilon, eta, check.to_dict())
    return check
