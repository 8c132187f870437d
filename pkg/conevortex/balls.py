"""Admissible ball families on the cone, their exponential growth and the energy ledger."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Literal, Sequence, Tuple

import numpy as np
import pandas as pd

from .degree_cost import m_closed
from .errors import ConfigError, NumericalError
from .geometry import ConeParams, ConePoint, geodesic_distance, geodesic_radial

logger = logging.getLogger(__name__)

MergeRule = Literal["exact", "worst_case"]
_TOL = 1e-10
TIP = ConePoint(0.0, 0.0)


@dataclass(frozen=True)
class Ball:
    center: ConePoint
    radius: float
    degree: int = 0

    def __post_init__(self) -> None:
        if not self.radius > 0.0:
            raise ConfigError(f"Ball radius must be positive, got {self.radius!r}")

    @property
    def is_tip(self) -> bool:
        return self.center.r == 0.0

    def scaled(self, factor: float) -> "Ball":
        return replace(self, radius=self.radius * factor)


@dataclass(frozen=True)
class BallFamily:
    """Balls on the cone with exactly one centered at the tip (kept first)."""

    balls: Tuple[Ball, ...]
    alpha: float

    def __post_init__(self) -> None:
        balls = tuple(self.balls)
        tips = [b for b in balls if b.is_tip]
        if len(tips) != 1:
            raise ConfigError(f"A family needs exactly one tip ball, got {len(tips)}")
        object.__setattr__(self, "balls", tuple(tips) + tuple(b for b in balls if not b.is_tip))

    @property
    def cone(self) -> ConeParams:
        return ConeParams(self.alpha)

    @property
    def tip(self) -> Ball:
        return self.balls[0]

    @property
    def total_radius(self) -> float:
        return float(sum(b.radius for b in self.balls))

    @property
    def total_degree(self) -> int:
        return int(sum(b.degree for b in self.balls))

    def scaled(self, factor: float) -> "BallFamily":
        return BallFamily(tuple(b.scaled(factor) for b in self.balls), self.alpha)


def center_distance(b1: Ball, b2: Ball, cone: ConeParams) -> float:
    return geodesic_distance(b1.center, b2.center, cone)


def balls_intersect(b1: Ball, b2: Ball, cone: ConeParams, tol: float = 0.0) -> bool:
    """Closed balls meet."""
    return center_distance(b1, b2, cone) <= (b1.radius + b2.radius) * (1.0 + tol)


def is_self_intersecting(b: Ball, cone: ConeParams, tol: float = 0.0) -> bool:
    """The ball meets every ray from the tip."""
    if b.is_tip:
        return True
    ratio = b.radius / b.center.r
    if ratio >= 1.0 - tol:
        return True
    return 2.0 * math.asin(ratio) >= cone.alpha * (1.0 - tol)


def is_admissible(family: BallFamily) -> bool:
    """Pairwise disjoint with no self-intersecting off-tip ball."""
    cone = family.cone
    balls = family.balls
    for i, b in enumerate(balls):
        if i > 0 and is_self_intersecting(b, cone):
            return False
        for other in balls[i + 1 :]:
            if balls_intersect(b, other, cone):
                return False
    return True


def contains(family: BallFamily, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Mask of sample points lying in the union of the family."""
    inside = np.zeros(np.shape(r), dtype=bool)
    for b in family.balls:
        dist = geodesic_radial(b.center.r, b.center.theta, r, theta, family.alpha)
        inside |= dist <= b.radius * (1.0 + 1e-12)
    return inside


def _signed_gap(theta_from: float, theta_to: float, alpha: float) -> float:
    gap = math.fmod(theta_to - theta_from, alpha)
    if gap < 0.0:
        gap += alpha
    if gap > alpha / 2.0:
        gap -= alpha
    return gap


def _merge_off_tip(b1: Ball, b2: Ball, cone: ConeParams) -> Ball:
    """Ball of radius r1 + r2 around the minimal enclosing disc of two off-tip balls."""
    p = b1.center.complex
    q_theta = b1.center.theta + _signed_gap(b1.center.theta, b2.center.theta, cone.alpha)
    q = b2.center.r * complex(math.cos(q_theta), math.sin(q_theta))
    d = abs(q - p)
    if d + b2.radius <= b1.radius or d == 0.0:
        center = p
    elif d + b1.radius <= b2.radius:
        center = q
    else:
        enclosing = 0.5 * (d + b1.radius + b2.radius)
        center = p + (enclosing - b1.radius) * (q - p) / d
    point = ConePoint.from_polar(abs(center), math.atan2(center.imag, center.real), cone)
    return Ball(point, b1.radius + b2.radius, b1.degree + b2.degree)


def _absorb_into_tip(tip: Ball, b: Ball, cone: ConeParams, rule: MergeRule, touching_tip: bool) -> Ball:
    s = b.radius
    if rule == "worst_case":
        if touching_tip or b.center.r <= s:
            radius = tip.radius + 2.0 * s
        else:
            radius = tip.radius + (1.0 + 2.0 * math.pi / cone.alpha) * s
    else:
        radius = max(tip.radius + s, b.center.r + s)
    return Ball(TIP, radius, tip.degree + b.degree)


def merge(family: BallFamily, rule: MergeRule = "exact", tol: float = _TOL) -> BallFamily:
    """Merge intersecting and self-intersecting balls until the family is admissible.

    ``rule="exact"`` uses enclosing geometry, never shrinking the total radius;
    ``rule="worst_case"`` uses the worst-case constants r + r', r' + 2r and (1 + 2pi/alpha) r.
    """
    if rule not in ("exact", "worst_case"):
        raise ConfigError(f"Unsupported merge rule: {rule!r}")
    cone = family.cone
    tip = family.tip
    others: List[Ball] = list(family.balls[1:])
    changed = True
    while changed:
        changed = False
        for i, b in enumerate(others):
            if balls_intersect(tip, b, cone, tol):
                tip = _absorb_into_tip(tip, b, cone, rule, touching_tip=True)
                del others[i]
                changed = True
                break
            if is_self_intersecting(b, cone, tol):
                tip = _absorb_into_tip(tip, b, cone, rule, touching_tip=False)
                del others[i]
                changed = True
                break
        if changed:
            continue
        for i in range(len(others)):
            for j in range(i + 1, len(others)):
                if balls_intersect(others[i], others[j], cone, tol):
                    merged = _merge_off_tip(others[i], others[j], cone)
                    others[i] = merged
                    del others[j]
                    changed = True
                    break
            if changed:
                break
    return BallFamily((tip, *others), family.alpha)


@dataclass
class GrowthTrajectory:
    snapshots: List[Tuple[float, BallFamily]] = field(default_factory=list)
    events: List[Tuple[float, str]] = field(default_factory=list)
    rule: MergeRule = "exact"

    @property
    def initial(self) -> BallFamily:
        return self.snapshots[0][1]

    @property
    def final(self) -> BallFamily:
        return self.snapshots[-1][1]

    @property
    def t_final(self) -> float:
        return self.snapshots[-1][0]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for t, family in self.snapshots:
            for index, b in enumerate(family.balls):
                rows.append(
                    {
                        "time": t,
                        "ball": index,
                        "r": b.center.r,
                        "theta": b.center.theta,
                        "radius": b.radius,
                        "degree": b.degree,
                        "tip": b.is_tip,
                    }
                )
        return pd.DataFrame(rows)


def _time_to_event(family: BallFamily) -> float:
    """Growth time until the next collision or self-intersection."""
    cone = family.cone
    balls = family.balls
    best = math.inf
    half = cone.alpha / 2.0
    for i, b in enumerate(balls):
        if i > 0:
            limit = b.center.r * (math.sin(half) if cone.alpha <= math.pi else 1.0)
            best = min(best, math.log(limit / b.radius))
        for other in balls[i + 1 :]:
            # centers never move, so the gap closes exactly at log(d / (r + r'))
            d = center_distance(b, other, cone)
            best = min(best, math.log(d / (b.radius + other.radius)))
    return max(best, 0.0)


def _describe(before: BallFamily, after: BallFamily) -> str:
    return (
        f"{len(before.balls)} balls -> {len(after.balls)} balls; "
        f"tip radius {before.tip.radius:.6g} -> {after.tip.radius:.6g}"
    )


def grow(family: BallFamily, t_final: float, rule: MergeRule = "exact") -> GrowthTrajectory:
    """Grow every radius as e^t, merging at each collision."""
    if t_final < 0.0:
        raise ConfigError("t_final must be non-negative")
    cone = family.cone
    for i, b in enumerate(family.balls):
        for other in family.balls[i + 1 :]:
            if balls_intersect(b, other, cone):
                raise ConfigError("Initial family is not disjoint")
    traj = GrowthTrajectory(rule=rule)
    t = 0.0
    current = family
    if not is_admissible(current):
        merged = merge(current, rule)
        traj.events.append((0.0, _describe(current, merged)))
        current = merged
    traj.snapshots.append((0.0, current))
    while True:
        dt = _time_to_event(current)
        if t + dt >= t_final or len(current.balls) == 1:
            current = current.scaled(math.exp(t_final - t))
            traj.snapshots.append((t_final, current))
            break
        t += dt
        grown = current.scaled(math.exp(dt))
        current = merge(grown, rule)
        if len(current.balls) == len(grown.balls):
            raise NumericalError(f"Growth event at t={t:.6g} merged nothing")
        traj.events.append((t, _describe(grown, current)))
        traj.snapshots.append((t, current))
        logger.debug("growth event at t=%.6g: %s", t, traj.events[-1][1])
    return traj


def ball_cost(b: Ball, cone: ConeParams) -> float:
    """Per-unit-log energy cost: m(d, alpha) for the tip ball, |d| otherwise."""
    return m_closed(b.degree, cone) if b.is_tip else float(abs(b.degree))


def ledger_terms(traj: GrowthTrajectory, cone: ConeParams) -> List[float]:
    """Per-ball lower bounds pi c_B (log(r(B(s))/r(B0)) - log 2) for the final balls."""
    log_ratio = math.log(traj.final.total_radius / traj.initial.total_radius)
    return [math.pi * ball_cost(b, cone) * (log_ratio - math.log(2.0)) for b in traj.final.balls]


def lower_bound_ledger(traj: GrowthTrajectory, cone: ConeParams) -> float:
    """Energy lower bound accumulated by the growth process."""
    return float(sum(ledger_terms(traj, cone)))


def ledger_integral(traj: GrowthTrajectory, cone: ConeParams) -> float:
    """Integral of pi sum_B c_B(t) dt over the trajectory."""
    total = 0.0
    for (t0, family), (t1, _) in zip(traj.snapshots, traj.snapshots[1:]):
        total += math.pi * sum(ball_cost(b, cone) for b in family.balls) * (t1 - t0)
    return total


def family_from_positions(
    tip_degree: int, vortices: Sequence[Tuple[ConePoint, int]], radius: float, cone: ConeParams
) -> BallFamily:
    """Admissible family with a ball of ``radius`` at the tip and at each vortex."""
    balls = [Ball(TIP, radius, tip_degree)] + [Ball(p, radius, d) for p, d in vortices]
    return merge(BallFamily(tuple(balls), cone.alpha))


def random_family(
    cone: ConeParams,
    n_balls: int,
    rng: np.random.Generator,
    *,
    radius_range: Tuple[float, float] = (0.002, 0.02),
    max_attempts: int = 10000,
) -> BallFamily:
    """Seeded admissible family: a tip ball plus ``n_balls`` disjoint off-tip balls of degree +-1."""
    tip = Ball(TIP, float(rng.uniform(*radius_range)), int(rng.integers(-1, 2)))
    balls = [tip]
    attempts = 0
    while len(balls) < n_balls + 1:
        attempts += 1
        if attempts > max_attempts:
            raise ConfigError("Could not place a disjoint random family")
        center = ConePoint.from_polar(rng.uniform(0.1, 0.9), rng.uniform(0.0, cone.alpha), cone)
        candidate = Ball(center, float(rng.uniform(*radius_range)), int(rng.choice([-1, 1])))
        if is_self_intersecting(candidate, cone):
            continue
        if any(balls_intersect(candidate, b, cone) for b in balls):
            continue
        balls.append(candidate)
    return BallFamily(tuple(balls), cone.alpha)
