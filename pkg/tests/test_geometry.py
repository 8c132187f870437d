import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conevortex.errors import ConfigError, SingularPointError
from conevortex.geometry import (
    ConeParams,
    ConePoint,
    conformal_derivative_modulus,
    disc_to_sector,
    geodesic_distance,
    sector_to_disc,
)


def test_cone_rejects_bad_angles() -> None:
    for alpha in (0.0, -1.0, 2 * math.pi, 7.0, math.inf):
        with pytest.raises(ConfigError):
            ConeParams(alpha)


def test_exponent_is_alpha_over_two_pi() -> None:
    assert ConeParams(math.pi).exponent == pytest.approx(0.5)


def test_from_polar_wraps_angle() -> None:
    cone = ConeParams(math.pi)
    p = ConePoint.from_polar(0.5, math.pi + 0.1, cone)
    assert p.theta == pytest.approx(0.1)
    assert ConePoint(0.0, 1.0).theta == 0.0


def test_geodesic_distance_examples() -> None:
    """Distances follow the shorter way around the seam."""
    cone = ConeParams(math.pi)
    assert geodesic_distance(ConePoint(1.0, 0.0), ConePoint(1.0, math.pi / 2), cone) == pytest.approx(math.sqrt(2))
    across = geodesic_distance(ConePoint(0.5, 0.1), ConePoint(0.5, math.pi - 0.1), cone)
    assert across == pytest.approx(2 * 0.5 * math.sin(0.1))
    assert geodesic_distance(ConePoint(0.0), ConePoint(0.3, 1.0), cone) == pytest.approx(0.3)


def test_disc_to_sector_maps_quarter_turn() -> None:
    cone = ConeParams(math.pi)
    w = disc_to_sector(1j, cone)
    assert w == pytest.approx(complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))


def test_sector_map_rejects_outside_points() -> None:
    cone = ConeParams(math.pi)
    with pytest.raises(ConfigError):
        disc_to_sector(1.5, cone)
    with pytest.raises(ConfigError):
        sector_to_disc(0.5 * complex(math.cos(4.0), math.sin(4.0)), cone)


def test_conformal_derivative_modulus() -> None:
    cone = ConeParams(math.pi)
    assert conformal_derivative_modulus(0.25, cone) == pytest.approx(1.0)
    with pytest.raises(SingularPointError):
        conformal_derivative_modulus(0.0, cone)


@pytest.mark.parametrize("alpha", [math.pi / 3, math.pi, 1.5 * math.pi])
@pytest.mark.parametrize("z", [0.5 * complex(math.cos(0.7), math.sin(0.7)), complex(-0.2, 0.6), complex(0.3, -0.1)])
def test_conformal_derivative_matches_finite_differences(alpha: float, z: complex) -> None:
    cone = ConeParams(alpha)
    h = 1e-6
    for direction in (1.0, 1j, complex(math.cos(1.0), math.sin(1.0))):
        step = h * direction
        numeric = abs(disc_to_sector(z + step, cone) - disc_to_sector(z - step, cone)) / (2 * h)
        assert numeric == pytest.approx(conformal_derivative_modulus(z, cone), rel=1e-6)


@given(
    st.floats(min_value=0.3, max_value=6.0),
    st.floats(min_value=0.01, max_value=0.99),
    st.floats(min_value=0.0, max_value=0.999),
)
def test_sector_disc_inverse(alpha: float, r: float, frac: float) -> None:
    cone = ConeParams(alpha)
    w = r * complex(math.cos(frac * alpha), math.sin(frac * alpha))
    assert disc_to_sector(sector_to_disc(w, cone), cone) == pytest.approx(w, abs=1e-9)


@given(
    st.floats(min_value=0.3, max_value=6.0),
    st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 0.999)), min_size=3, max_size=3),
)
def test_geodesic_triangle_inequality(alpha: float, raw) -> None:
    cone = ConeParams(alpha)
    p, q, s = (ConePoint.from_polar(r, f * alpha, cone) for r, f in raw)
    d = lambda a, b: geodesic_distance(a, b, cone)  # noqa: E731
    assert d(p, q) == pytest.approx(d(q, p))
    assert d(p, s) <= d(p, q) + d(q, s) + 1e-12
