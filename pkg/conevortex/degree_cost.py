"""Degree-cost function m(d, alpha) and the additivity inequality."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import pandas as pd

from .errors import ConfigError
from .geometry import TWO_PI, ConeParams

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class DegreeSplit:
    """Split of a total degree into a tip part d0 and an off-tip part d1."""

    d0: int
    d1: int
    cost: float

    @property
    def total(self) -> int:
        return self.d0 + self.d1


def split_cost(d0: int, d1: int, cone: ConeParams) -> float:
    """(2pi/alpha)(d0 - 1 + alpha/2pi)^2 + |d1|."""
    alpha = cone.alpha
    return (TWO_PI / alpha) * (d0 - 1 + alpha / TWO_PI) ** 2 + abs(d1)


def default_bound(d: int, cone: ConeParams) -> int:
    return max(abs(d) + 10, abs(d) + math.ceil(TWO_PI / cone.alpha) + 2)


def m_bruteforce(d: int, cone: ConeParams, bound: int | None = None) -> DegreeSplit:
    """Exhaustive minimum over tip degrees in [-bound, bound]; ties go to the smallest |d0|."""
    d = int(d)
    bound = default_bound(d, cone) if bound is None else int(bound)
    if bound < abs(d) + math.ceil(TWO_PI / cone.alpha) + 2:
        raise ConfigError(f"Search bound {bound} too small for d={d}")
    best: DegreeSplit | None = None
    for d0 in sorted(range(-bound, bound + 1), key=lambda v: (abs(v), v)):
        cost = split_cost(d0, d - d0, cone)
        if best is None or cost < best.cost - _TIE_TOL:
            best = DegreeSplit(d0, d - d0, cost)
    assert best is not None
    return best


def tip_vortex_branch(d: int, cone: ConeParams) -> bool:
    """True on the branch where the tip carries degree 0."""
    return d <= 0 and cone.alpha > TWO_PI / 3.0


def m_closed(d: int, cone: ConeParams) -> float:
    """Two-branch closed form of m(d, alpha)."""
    alpha = cone.alpha
    if tip_vortex_branch(d, cone):
        return abs(d) + (alpha - TWO_PI) ** 2 / (TWO_PI * alpha)
    return abs(d - 1) + alpha / TWO_PI


def additivity_check(dbar: int, split: Sequence[int], cone: ConeParams) -> bool:
    """m(dbar) <= m(split[0]) + sum_{j>=1} |split[j]|."""
    if not split:
        raise ConfigError("Split must contain at least the tip degree")
    if sum(split) != dbar:
        raise ConfigError(f"Split {list(split)} does not sum to {dbar}")
    rhs = m_closed(split[0], cone) + sum(abs(s) for s in split[1:])
    return m_closed(dbar, cone) <= rhs + _TIE_TOL


def m_table(degrees: Iterable[int], alphas: Iterable[float]) -> pd.DataFrame:
    """Closed form against brute force over a grid of (d, alpha)."""
    degrees = list(degrees)
    rows: List[dict] = []
    for alpha in alphas:
        cone = ConeParams(float(alpha))
        for d in degrees:
            brute = m_bruteforce(d, cone)
            closed = m_closed(d, cone)
            rows.append(
                {
                    "d": int(d),
                    "alpha": float(alpha),
                    "m_closed": closed,
                    "m_bruteforce": brute.cost,
                    "d0": brute.d0,
                    "d1": brute.d1,
                    "agree": abs(closed - brute.cost) <= _TIE_TOL,
                }
            )
    return pd.DataFrame(rows)
