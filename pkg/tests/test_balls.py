import math

import numpy as np
import pytest

from conevortex.balls import (
    TIP,
    Ball,
    BallFamily,
    contains,
    family_from_positions,
    grow,
    is_admissible,
    is_self_intersecting,
    ledger_integral,
    ledger_terms,
    lower_bound_ledger,
    merge,
    random_family,
)
from conevortex.degree_cost import m_closed
from conevortex.errors import ConfigError
from conevortex.geometry import ConeParams, ConePoint

ALPHAS = [math.pi / 3, math.pi / 2, math.pi, 1.5 * math.pi]


def _off(r: float, theta: float, radius: float, degree: int = 1) -> Ball:
    return Ball(ConePoint(r, theta), radius, degree)


def test_family_needs_one_tip_ball() -> None:
    with pytest.raises(ConfigError):
        BallFamily((_off(0.5, 0.1, 0.01),), math.pi)
    with pytest.raises(ConfigError):
        BallFamily((Ball(TIP, 0.1), Ball(TIP, 0.2)), math.pi)
    family = BallFamily((_off(0.5, 0.1, 0.01), Ball(TIP, 0.1, 2)), math.pi)
    assert family.tip.degree == 2


def test_self_intersection_criterion() -> None:
    assert not is_self_intersecting(_off(1.0, 0.0, 0.8), ConeParams(math.pi))
    assert not is_self_intersecting(_off(1.0, 0.0, 0.5), ConeParams(math.pi / 2))
    assert is_self_intersecting(_off(1.0, 0.0, 0.6), ConeParams(1.0))
    assert is_self_intersecting(_off(0.5, 0.0, 0.5), ConeParams(1.5 * math.pi))


def test_wide_cones_self_intersect_only_through_the_tip() -> None:
    rng = np.random.default_rng(0)
    for alpha in (math.pi, 1.2 * math.pi, 1.8 * math.pi):
        cone = ConeParams(alpha)
        for _ in range(200):
            r = rng.uniform(0.05, 1.0)
            b = _off(r, rng.uniform(0.0, alpha), rng.uniform(0.001, 1.2) * r)
            assert is_self_intersecting(b, cone) == (b.radius >= r)


def test_touching_off_tip_balls_merge_to_summed_radius() -> None:
    cone = ConeParams(math.pi)
    b1 = _off(0.5, 0.5, 0.03, 1)
    b2 = _off(0.5, 0.5 + 2 * math.asin(0.05), 0.02, -1)
    merged = merge(BallFamily((Ball(TIP, 0.01), b1, b2), cone.alpha))
    assert len(merged.balls) == 2
    assert merged.balls[1].radius == pytest.approx(0.05)
    assert merged.balls[1].degree == 0


def test_tip_absorption_respects_worst_case_constants() -> None:
    cone = ConeParams(math.pi)
    tip = Ball(TIP, 0.2, 1)
    near = _off(0.25, 1.0, 0.1, 1)
    for rule in ("exact", "worst_case"):
        merged = merge(BallFamily((tip, near), cone.alpha), rule)
        assert len(merged.balls) == 1
        assert merged.tip.degree == 2
        assert merged.tip.radius <= 0.2 + 2 * 0.1 + 1e-12
        assert merged.tip.radius >= 0.25 + 0.1
    worst = merge(BallFamily((tip, near), cone.alpha), "worst_case")
    assert worst.tip.radius == pytest.approx(0.4)


def test_self_intersecting_ball_moves_into_tip() -> None:
    cone = ConeParams(math.pi / 2)
    wide = _off(0.4, 0.3, 0.35, -1)
    merged = merge(BallFamily((Ball(TIP, 0.01), wide), cone.alpha), "worst_case")
    assert merged.tip.radius == pytest.approx(0.01 + (1 + 2 * math.pi / cone.alpha) * 0.35)
    exact = merge(BallFamily((Ball(TIP, 0.01), wide), cone.alpha))
    assert exact.tip.radius <= merged.tip.radius
    assert exact.tip.radius >= 0.4 + 0.35 - 1e-12


def test_merge_rejects_unknown_rule() -> None:
    with pytest.raises(ConfigError):
        merge(BallFamily((Ball(TIP, 0.1),), math.pi), "greedy")


def test_single_tip_ball_grows_exponentially() -> None:
    traj = grow(BallFamily((Ball(TIP, 0.01, 2),), math.pi), 1.0)
    assert traj.events == []
    assert traj.final.tip.radius == pytest.approx(math.e * 0.01)
    assert traj.t_final == 1.0


def test_two_balls_collide_and_merge() -> None:
    cone = ConeParams(math.pi)
    b0, b1 = _off(0.5, 0.5, 0.01), _off(0.5, 0.7, 0.01)
    traj = grow(BallFamily((Ball(TIP, 0.001), b0, b1), cone.alpha), 2.0)
    t0 = math.log(2 * 0.5 * math.sin(0.1) / 0.02)
    assert len(traj.events) == 1
    assert traj.events[0][0] == pytest.approx(t0)
    merged = traj.snapshots[1][1]
    assert len(merged.balls) == 2
    assert merged.balls[1].radius == pytest.approx(math.exp(t0) * 0.02)
    assert merged.balls[1].degree == 2


def test_grow_rejects_overlapping_start() -> None:
    family = BallFamily((Ball(TIP, 0.1), _off(0.15, 0.0, 0.1)), math.pi)
    with pytest.raises(ConfigError):
        grow(family, 1.0)
    with pytest.raises(ConfigError):
        grow(BallFamily((Ball(TIP, 0.1),), math.pi), -1.0)


def _check_radius_bounds(alpha: float, seeds: range) -> None:
    """e^t r0 <= r(t) <= (1 + 2pi/alpha) e^t r0 with degree conserved."""
    cone = ConeParams(alpha)
    for seed in seeds:
        family = random_family(cone, 5, np.random.default_rng(seed))
        r0 = family.total_radius
        traj = grow(family, 3.0)
        for t, snap in traj.snapshots:
            assert is_admissible(snap)
            assert snap.total_degree == family.total_degree
            assert snap.total_radius >= math.exp(t) * r0 * (1 - 1e-9)
            assert snap.total_radius <= (1 + 2 * math.pi / alpha) * math.exp(t) * r0 * (1 + 1e-9)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_growth_radius_bounds_and_degree(alpha: float) -> None:
    _check_radius_bounds(alpha, range(20))


@pytest.mark.slow
@pytest.mark.parametrize("alpha", ALPHAS)
def test_growth_radius_bounds_on_a_hundred_seeds(alpha: float) -> None:
    _check_radius_bounds(alpha, range(100))


@pytest.mark.parametrize("rule", ["exact", "worst_case"])
def test_chained_collision_merges_into_the_tip(rule: str) -> None:
    """Tip ball, a ball touching it and a ball touching that one, all meeting at t0 = log 2."""
    cone = ConeParams(math.pi)
    b0 = Ball(TIP, 0.05, 1)
    b1 = _off(0.15, 1.0, 0.025, 1)
    b2 = _off(0.23, 1.0, 0.015, -1)
    traj = grow(BallFamily((b0, b1, b2), cone.alpha), 1.0, rule)
    t0 = math.log(2.0)
    assert len(traj.events) == 1
    assert traj.events[0][0] == pytest.approx(t0)
    merged = traj.snapshots[1][1]
    assert len(merged.balls) == 1
    assert merged.tip.degree == 1
    bound = math.exp(t0) * (b0.radius + 2 * b1.radius + 2 * b2.radius)
    assert merged.tip.radius <= bound * (1 + 1e-9)
    if rule == "worst_case":
        assert merged.tip.radius == pytest.approx(bound)
    assert traj.final.tip.radius == pytest.approx(merged.tip.radius * math.exp(1.0 - t0))


def _points_inside(family: BallFamily, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    r_out, theta_out = [], []
    for _ in range(n):
        b = family.balls[rng.integers(len(family.balls))]
        rho = 0.99 * b.radius * math.sqrt(rng.uniform())
        if b.is_tip:
            r_out.append(rho)
            theta_out.append(rng.uniform(0.0, family.alpha))
            continue
        w = b.center.complex + rho * np.exp(1j * rng.uniform(0.0, 2 * math.pi))
        r_out.append(abs(w))
        theta_out.append(math.atan2(w.imag, w.real) % family.alpha)
    return np.array(r_out), np.array(theta_out)


@pytest.mark.parametrize("alpha", [math.pi / 2, math.pi])
def test_growth_unions_are_nested(alpha: float) -> None:
    rng = np.random.default_rng(5)
    traj = grow(random_family(ConeParams(alpha), 6, np.random.default_rng(3)), 3.0)
    for (_, before), (_, after) in zip(traj.snapshots, traj.snapshots[1:]):
        r, theta = _points_inside(before, rng, 300)
        assert contains(after, r, theta).all()


def test_ledger_for_single_tip_ball() -> None:
    cone = ConeParams(math.pi)
    traj = grow(BallFamily((Ball(TIP, 0.01, 2),), cone.alpha), 2.0)
    expected = math.pi * m_closed(2, cone) * (2.0 - math.log(2.0))
    assert lower_bound_ledger(traj, cone) == pytest.approx(expected)
    assert ledger_integral(traj, cone) == pytest.approx(math.pi * m_closed(2, cone) * 2.0)


def test_ledger_for_tip_and_one_vortex() -> None:
    cone = ConeParams(math.pi)
    family = BallFamily((Ball(TIP, 0.001, 1), _off(0.8, 1.0, 0.001, 1)), cone.alpha)
    traj = grow(family, 1.5)
    assert traj.events == []
    expected = math.pi * (m_closed(1, cone) + 1) * (1.5 - math.log(2.0))
    assert lower_bound_ledger(traj, cone) == pytest.approx(expected)
    assert len(ledger_terms(traj, cone)) == 2


def test_degree_zero_ball_costs_nothing() -> None:
    cone = ConeParams(math.pi)
    family = BallFamily((Ball(TIP, 0.001, 1), _off(0.8, 1.0, 0.001, 0)), cone.alpha)
    terms = ledger_terms(grow(family, 1.0), cone)
    assert terms[1] == 0.0


def test_family_from_positions_merges_close_vortices() -> None:
    cone = ConeParams(math.pi)
    family = family_from_positions(1, [(ConePoint(0.5, 1.0), 1), (ConePoint(0.5, 1.01), 1)], 0.02, cone)
    assert len(family.balls) == 2
    assert family.total_degree == 3
    assert is_admissible(family)
