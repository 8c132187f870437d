import math

import numpy as np
import pytest

from conevortex.errors import ConfigError, NonConvergenceError
from conevortex.field import SectorGrid, TangentField, degree, gl_energy
from conevortex.geometry import ConeParams
from conevortex.minimizer import (
    BoundaryData,
    SolverOptions,
    boundary_exponent,
    canonical_boundary,
    core_log_coefficient,
    core_winding,
    gamma0,
    gamma_radial,
    increments_shrink,
    initial_field,
    minimize,
    radial_core_profile,
    solve_core_mu,
    tip_core_branch,
)

PI = ConeParams(math.pi)


@pytest.mark.parametrize("dbar", [-2, 0, 1, 2, 3])
def test_canonical_boundary_has_requested_degree(dbar: int) -> None:
    grid = SectorGrid(PI, 16, 64)
    assert canonical_boundary(dbar, grid).degree(PI) == dbar
    assert boundary_exponent(1, PI) == 1.0


def test_boundary_data_validation() -> None:
    with pytest.raises(ConfigError):
        BoundaryData(2, 2.0 * np.ones(8))
    with pytest.raises(ConfigError):
        BoundaryData(2, np.ones((2, 4)))


def test_solver_options_validation() -> None:
    with pytest.raises(ConfigError):
        SolverOptions(max_iters=0)
    with pytest.raises(ConfigError):
        SolverOptions(grad_tol=0.0)
    with pytest.raises(ConfigError):
        SolverOptions(step_rule="newton")


def test_initial_field_matches_boundary() -> None:
    grid = SectorGrid(PI, 16, 32)
    bc = canonical_boundary(2, grid)
    init = initial_field(bc, grid, seed=3)
    assert np.array_equal(init.values[-1], bc.profile)
    assert np.array_equal(init.values, initial_field(bc, grid, seed=3).values)


@pytest.mark.parametrize("rule", ["bb", "ncg"])
def test_minimize_lowers_energy_and_keeps_boundary(rule: str) -> None:
    grid = SectorGrid(PI, 16, 32, r_min=1e-2)
    bc = canonical_boundary(2, grid)
    init = initial_field(bc, grid)
    opts = SolverOptions(max_iters=300, step_rule=rule, strict=False)
    field, energy, diag = minimize(init, bc, 0.2, opts)
    assert energy.total <= gl_energy(init, 0.2).total
    assert np.array_equal(field.values[-1], bc.profile)
    assert degree(field, grid.n_r - 1) == 2
    assert diag.to_frame().columns.tolist() == ["iteration", "energy", "grad_norm", "step"]


def test_minimize_overwrites_mismatched_boundary() -> None:
    grid = SectorGrid(PI, 16, 32, r_min=1e-2)
    bc = canonical_boundary(2, grid)
    init = TangentField(grid, np.ones(grid.shape))
    field, _, _ = minimize(init, bc, 0.2, SolverOptions(max_iters=5, strict=False))
    assert np.array_equal(field.values[-1], bc.profile)


def test_strict_minimize_raises_with_state() -> None:
    grid = SectorGrid(PI, 16, 32, r_min=1e-2)
    bc = canonical_boundary(2, grid)
    with pytest.raises(NonConvergenceError) as info:
        minimize(initial_field(bc, grid), bc, 0.2, SolverOptions(max_iters=2, grad_tol=1e-14))
    assert "field" in info.value.state


def test_minimize_rejects_bad_epsilon() -> None:
    grid = SectorGrid(PI, 16, 32)
    bc = canonical_boundary(2, grid)
    with pytest.raises(ConfigError):
        minimize(initial_field(bc, grid), bc, 0.0)


def test_core_windings_and_branches() -> None:
    assert core_winding(1, PI) == 1.0
    assert core_winding(2, PI) == pytest.approx(-1.0)
    assert core_log_coefficient(2, ConeParams(math.pi / 2)) == pytest.approx(0.25 * math.pi * 9)
    assert tip_core_branch(0, PI) == 2
    assert tip_core_branch(2, PI) == 1
    assert tip_core_branch(0, ConeParams(math.pi / 2)) == 1
    with pytest.raises(ConfigError):
        core_winding(3, PI)


def test_radial_profile_shape() -> None:
    profile = radial_core_profile(0.05)
    assert profile.f[0] == 0.0
    assert profile.f[-1] == 1.0
    assert np.all(profile.f >= 0.0)
    assert profile(np.array([0.8]))[0] > 0.98
    assert profile.disc_energy == pytest.approx(2 * math.pi * profile.per_radian)


def test_radial_profile_rejects_bad_input() -> None:
    with pytest.raises(ConfigError):
        radial_core_profile(0.6)
    with pytest.raises(ConfigError):
        radial_core_profile(0.05, 0.0)


def test_core_constant_settles() -> None:
    """gamma(eps) approaches its limit as eps shrinks."""
    coarse, fine = gamma_radial(0.02), gamma_radial(0.01)
    assert abs(coarse - fine) < 0.05


def test_core_problem_inputs_are_checked() -> None:
    with pytest.raises(ConfigError):
        solve_core_mu(1, 0.5, 0.4, PI)
    with pytest.raises(ConfigError):
        gamma0(2, PI, [0.1, 0.2, 0.05])


def test_core_energy_exceeds_log_term() -> None:
    opts = SolverOptions(max_iters=400, strict=False)
    mu, core = solve_core_mu(1, 0.2, 1.0, PI, opts, grid_shape=(16, 32))
    assert core.grid.r_max == 1.0
    assert mu > 0.0
    assert degree(core, core.grid.n_r - 1) == 1


def test_minimizer_modulus_stays_below_one() -> None:
    grid = SectorGrid(PI, 16, 32, r_min=1e-2)
    bc = canonical_boundary(2, grid)
    _, _, diag = minimize(initial_field(bc, grid), bc, 0.2, SolverOptions(max_iters=3000, strict=False))
    assert diag.max_modulus <= 1.0 + 1e-6


def test_core_energy_depends_on_eps_over_eta() -> None:
    opts = SolverOptions(max_iters=3000, strict=False)
    mu_unit, _ = solve_core_mu(1, 0.1, 1.0, PI, opts, grid_shape=(16, 32))
    mu_half, _ = solve_core_mu(1, 0.05, 0.5, PI, opts, grid_shape=(16, 32))
    assert mu_half == pytest.approx(mu_unit, rel=0.02)


@pytest.mark.parametrize("eps", [0.1, 0.05, 0.025])
def test_radial_profile_is_monotone_and_bounded(eps: float) -> None:
    profile = radial_core_profile(eps)
    assert np.all(np.diff(profile.f) >= -1e-9)
    assert np.all(profile.f <= 1.0 + 1e-9)
    assert gamma_radial(eps) > 0.0


def test_core_constant_increments_shrink() -> None:
    assert increments_shrink([gamma_radial(e) for e in (0.1, 0.05, 0.025, 0.0125)])


def test_increments_shrink_rejects_growing_steps() -> None:
    assert not increments_shrink([1.0, 1.1, 1.25])
    assert increments_shrink([1.0, 1.1, 1.15, 1.17])


@pytest.mark.parametrize(("dbar", "expected"), [(0, 2), (2, 1)])
def test_gamma0_picks_the_core_problem_and_extrapolates(
    monkeypatch: pytest.MonkeyPatch, dbar: int, expected: int
) -> None:
    requested = []

    def fake_core(which, epsilon, eta, cone, opts=None, **kwargs):
        requested.append(which)
        return core_log_coefficient(which, cone) * math.log(1 / epsilon) + 0.5 + epsilon, None

    monkeypatch.setattr("conevortex.minimizer.solve_core_mu", fake_core)
    tip = gamma0(dbar, PI, [0.2, 0.1, 0.05])
    assert tip.which == expected == tip_core_branch(dbar, PI)
    assert set(requested) == {expected}
    assert tip.value == pytest.approx(0.5)
    assert tip.error == pytest.approx(0.05)


def test_gamma0_rejects_a_diverging_sequence(monkeypatch: pytest.MonkeyPatch) -> None:
    steps = iter([0.0, 0.1, 0.25])

    def fake_core(which, epsilon, eta, cone, opts=None, **kwargs):
        return core_log_coefficient(which, cone) * math.log(1 / epsilon) + next(steps), None

    monkeypatch.setattr("conevortex.minimizer.solve_core_mu", fake_core)
    with pytest.raises(NonConvergenceError):
        gamma0(2, PI, [0.2, 0.1, 0.05])


@pytest.mark.slow
@pytest.mark.parametrize("dbar", [0, 2])
@pytest.mark.parametrize("alpha", [math.pi / 2, math.pi])
def test_gamma0_is_finite(dbar: int, alpha: float) -> None:
    cone = ConeParams(alpha)
    tip = gamma0(dbar, cone, [0.2, 0.1, 0.05], SolverOptions(max_iters=5000, strict=False))
    assert tip.which == tip_core_branch(dbar, cone)
    assert math.isfinite(tip.value)
    assert math.isfinite(tip.error)
