"""Command-line interface for conevortex."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np
import pandas as pd
import typer

from .balls import grow, ledger_integral, lower_bound_ledger, random_family
from .config import ExperimentConfig, apply_overrides, load_config
from .degree_cost import m_closed, m_table
from .errors import ConeVortexError, ConfigError, DegenerateDesignError, NumericalError, OverlappingExcisionsError
from .field import current_density, gl_energy, region_energy
from .fieldio import fieldio
from .minimizer import (
    canonical_boundary,
    gamma0,
    gamma_radial,
    increments_shrink,
    initial_field,
    minimize,
    radial_tip_value,
)
from .plotting import plot_growth, plot_landscape, plot_modulus, plot_phase
from .records import read_json, write_csv, write_json
from .renorm import (
    BoundaryFlux,
    UpperBoundOptions,
    construct_upper_bound,
    direct_renormalized_energy,
    minimize_W,
    off_tip_count,
    predicted_constant,
    w_landscape,
)
from .reporter import build_report, checks_passed
from .vortices import detect_vortices, fit_expansion, ledger_check, tip_modulus_min

app = typer.Typer(add_completion=False, help="Ginzburg-Landau vortices on a cone.")
logger = logging.getLogger("conevortex")

ConfigOption = typer.Option(None, "--config", exists=True, readable=True, help="JSON experiment config")
OutputOption = typer.Option(None, "--output", help="Output root (default $CONEVORTEX_OUTPUT or ./runs)")
VerboseOption = typer.Option(False, "--verbose", help="Log solver progress")


def _resolve(config: Path | None, verbose: bool, **overrides) -> ExperimentConfig:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)
    return apply_overrides(load_config(config), **overrides)


def _run(action: Callable[[], bool]) -> None:
    """Run a subcommand, mapping validation errors to 1 and numerical failures or failed checks to 2."""
    try:
        ok = action()
    except (ConfigError, DegenerateDesignError) as exc:
        typer.echo(f"Error: {exc}")
        raise typer.Exit(code=1)
    except (NumericalError, ConeVortexError) as exc:
        typer.echo(f"Numerical failure: {exc}")
        raise typer.Exit(code=2)
    if not ok:
        typer.echo("Some checks failed; see the report.")
        raise typer.Exit(code=2)


def _finish(run_dir: Path, command: str, record: Dict, cfg: ExperimentConfig, tables=None, warnings=None) -> bool:
    checks = record.get("checks", {})
    write_json(run_dir / f"{command}.json", record, cfg)
    summary = {k: v for k, v in record.items() if not isinstance(v, (dict, list))}
    report = build_report(command, summary, tables, checks, warnings)
    (run_dir / "report.md").write_text(report)
    typer.echo(f"Wrote {command} artifacts to {run_dir}")
    return checks_passed(checks)


def _eps_tag(epsilon: float) -> str:
    return f"eps{epsilon:g}"


def run_minimize(cfg: ExperimentConfig) -> bool:
    cone = cfg.cone
    grid = cfg.grid.build(cone)
    bc = canonical_boundary(cfg.dbar, grid)
    flux = BoundaryFlux.canonical(cfg.n_modes)
    root = cfg.output_root() / "minimize" / f"alpha{cfg.alpha:.6g}_d{cfg.dbar}"
    all_ok = True
    for epsilon in cfg.epsilons:
        warnings: List[str] = []
        run_dir = root / _eps_tag(epsilon)
        run_dir.mkdir(parents=True, exist_ok=True)
        init = None
        upper = None
        if cfg.init == "test":
            try:
                config = minimize_W(cfg.dbar, cone, flux, n_starts=cfg.n_starts, seed=cfg.seed)
                options = UpperBoundOptions(margin_factor=cfg.margin_factor, tip_core=cfg.tip_core)
                upper = construct_upper_bound(cfg.dbar, cone, epsilon, config, grid, options=options, solver=cfg.solver)
                init = upper.field
            except (OverlappingExcisionsError, NumericalError) as exc:
                warnings.append(f"Test field unavailable ({exc}); falling back to the ramp initialization")
                logger.warning("test field unavailable for eps=%g: %s", epsilon, exc)
        if init is None:
            init = initial_field(bc, grid, seed=cfg.seed)

        field, energy, diag = minimize(init, bc, epsilon, cfg.solver)
        vset = detect_vortices(field, epsilon)
        tip_min = tip_modulus_min(field, epsilon)
        m = m_closed(cfg.dbar, cone)
        balls = ledger_check(field, epsilon, vset)
        checks = {
            "energy_not_increased": energy.total <= diag.initial_energy + 1e-9,
            "boundary_degree": vset.dbar == cfg.dbar,
            "tip_vanishes": tip_min < 0.2,
            "unit_off_tip_degrees": all(abs(d) == 1 for _, d in vset.vortices),
            "ledger_below_energy": balls.ledger <= energy.total,
            "ledger_below_outside_energy": balls.holds,
        }
        record = {
            "energy": energy.to_dict(),
            "diagnostics": diag.summary(),
            "vortices": vset.to_record(),
            "tip_modulus_min": tip_min,
            "boundary_current": float(np.sum(current_density(field)[-1]) * grid.dtheta),
            "frame_current": cone.alpha,
            "m": m,
            "leading_term": math.pi * m * math.log(1.0 / epsilon),
            "ledger": balls.to_dict(),
            "checks": checks,
        }
        if upper is not None:
            checks["test_field_above_minimum"] = gl_energy(upper.field, epsilon).total >= energy.total - 1e-6
            record["test_field_energy"] = gl_energy(upper.field, epsilon).to_dict()
            record["blend_layer_energy"] = region_energy(upper.field, epsilon, upper.blend_mask)

        fieldio.write(field, run_dir / "field.txt", epsilon)
        write_json(run_dir / "energy.json", {"energy": energy.to_dict(), "epsilon": epsilon}, cfg)
        write_json(run_dir / "vortices.json", vset.to_record(), cfg)
        write_csv(diag.to_frame(), run_dir / "diagnostics.csv")
        plot_modulus(field, run_dir / "modulus.png", title=f"|u|, eps={epsilon:g}")
        plot_phase(field, run_dir / "phase.png")
        vortex_table = pd.DataFrame(
            [{"r": p.r, "theta": p.theta, "degree": d} for p, d in vset.vortices], columns=["r", "theta", "degree"]
        )
        summary_energy = pd.DataFrame([energy.to_dict()])
        all_ok &= _finish(
            run_dir,
            "minimize",
            record,
            cfg,
            {"Energy": summary_energy, "Vortices": vortex_table},
            warnings,
        )
    return all_ok


@app.command("minimize")
def minimize_command(
    config: Path | None = ConfigOption,
    output: Path | None = OutputOption,
    alpha: float | None = typer.Option(None, help="Cone angle in (0, 2pi)"),
    dbar: int | None = typer.Option(None, help="Boundary degree"),
    epsilon: List[float] | None = typer.Option(None, help="Core size; repeat for several runs"),
    n_r: int | None = typer.Option(None, help="Radial nodes"),
    n_theta: int | None = typer.Option(None, help="Angular nodes"),
    max_iters: int | None = typer.Option(None, help="Solver iteration cap"),
    init: str | None = typer.Option(None, help="test or ramp"),
    tip_core: str | None = typer.Option(None, help="sector or radial"),
    seed: int | None = typer.Option(None, help="Random seed"),
    verbose: bool = VerboseOption,
):
    """Minimize the GL energy for each epsilon and detect the vortices."""
    _run(
        lambda: run_minimize(
            _resolve(
                config,
                verbose,
                output=str(output) if output else None,
                alpha=alpha,
                dbar=dbar,
                epsilons=list(epsilon) if epsilon else None,
                n_r=n_r,
                n_theta=n_theta,
                max_iters=max_iters,
                init=init,
                tip_core=tip_core,
                seed=seed,
            )
        )
    )


def run_mtable(cfg: ExperimentConfig) -> bool:
    frame = m_table(cfg.degrees, cfg.alphas)
    run_dir = cfg.output_root() / "mtable"
    write_csv(frame, run_dir / "m_table.csv")
    record = {"rows": len(frame), "checks": {"closed_form_matches_bruteforce": bool(frame["agree"].all())}}
    return _finish(run_dir, "mtable", record, cfg, {"m(d, alpha)": frame})


@app.command("mtable")
def mtable_command(
    config: Path | None = ConfigOption,
    output: Path | None = OutputOption,
    d_min: int = typer.Option(-5, help="Smallest degree"),
    d_max: int = typer.Option(5, help="Largest degree"),
    verbose: bool = VerboseOption,
):
    """Tabulate m(d, alpha) in closed form against brute force."""
    _run(
        lambda: run_mtable(
            _resolve(config, verbose, output=str(output) if output else None, degrees=list(range(d_min, d_max + 1)))
        )
    )


def run_growth(cfg: ExperimentConfig) -> bool:
    cone = cfg.cone
    rng = np.random.default_rng(cfg.seed)
    family = random_family(cone, cfg.n_balls, rng)
    traj = grow(family, cfg.t_final, cfg.merge_rule)
    run_dir = cfg.output_root() / "growth" / f"alpha{cfg.alpha:.6g}_seed{cfg.seed}"
    frame = traj.to_frame()
    write_csv(frame, run_dir / "trajectory.csv")
    plot_growth(traj, run_dir / "growth.png")
    r0 = traj.initial.total_radius
    r_final = traj.final.total_radius
    scale = math.exp(traj.t_final)
    factor = 1.0 + 2.0 * math.pi / cone.alpha
    checks = {
        "radius_lower_bound": r_final >= scale * r0 * (1.0 - 1e-9),
        "radius_upper_bound": r_final <= factor * scale * r0 * (1.0 + 1e-9),
        "degree_conserved": traj.final.total_degree == traj.initial.total_degree,
    }
    record = {
        "rule": traj.rule,
        "t_final": traj.t_final,
        "initial_radius": r0,
        "final_radius": r_final,
        "events": [{"time": t, "event": text} for t, text in traj.events],
        "ledger": lower_bound_ledger(traj, cone),
        "ledger_integral": ledger_integral(traj, cone),
        "checks": checks,
    }
    events = pd.DataFrame(record["events"], columns=["time", "event"])
    return _finish(run_dir, "growth", record, cfg, {"Events": events})


@app.command("growth")
def growth_command(
    config: Path | None = ConfigOption,
    output: Path | None = OutputOption,
    alpha: float | None = typer.Option(None, help="Cone angle in (0, 2pi)"),
    n_balls: int | None = typer.Option(None, help="Off-tip balls in the random family"),
    t_final: float | None = typer.Option(None, help="Growth time"),
    rule: str | None = typer.Option(None, help="exact or worst_case merge rule"),
    seed: int | None = typer.Option(None, help="Random seed"),
    verbose: bool = VerboseOption,
):
    """Grow a seeded random admissible family and record the ledger."""
    _run(
        lambda: run_growth(
            _resolve(
                config,
                verbose,
                output=str(output) if output else None,
                alpha=alpha,
                n_balls=n_balls,
                t_final=t_final,
                merge_rule=rule,
                seed=seed,
            )
        )
    )


def run_renorm(cfg: ExperimentConfig) -> bool:
    cone = cfg.cone
    flux = BoundaryFlux.canonical(cfg.n_modes)
    config = minimize_W(cfg.dbar, cone, flux, n_starts=cfg.n_starts, seed=cfg.seed)
    direct = direct_renormalized_energy(config, cone, flux)
    run_dir = cfg.output_root() / "renorm" / f"alpha{cfg.alpha:.6g}_d{cfg.dbar}"
    run_dir.mkdir(parents=True, exist_ok=True)
    tables = {}
    if off_tip_count(cfg.dbar, cone) == 1:
        landscape = w_landscape(cfg.dbar, cone, flux, *cfg.landscape)
        write_csv(landscape, run_dir / "w_landscape.csv")
        plot_landscape(landscape, run_dir / "w_landscape.png")
    positions = pd.DataFrame(
        [
            {"x": z.real, "y": z.imag, "radius": abs(z), "degree": d}
            for z, d in zip(config.disc_positions, config.degrees)
        ],
        columns=["x", "y", "radius", "degree"],
    )
    tables["Vortex positions (disc)"] = positions
    record = {
        "case": config.case,
        "W": config.energy,
        "W_direct": direct,
        "configuration": config.to_record(cone),
        "checks": {"direct_definition_agrees": abs(direct - config.energy) <= 0.03 * max(abs(config.energy), 1.0)},
    }
    return _finish(run_dir, "renorm", record, cfg, tables)


@app.command("renorm")
def renorm_command(
    config: Path | None = ConfigOption,
    output: Path | None = OutputOption,
    alpha: float | None = typer.Option(None, help="Cone angle in (0, 2pi)"),
    dbar: int | None = typer.Option(None, help="Boundary degree"),
    n_starts: int | None = typer.Option(None, help="Multi-start count"),
    seed: int | None = typer.Option(None, help="Random seed"),
    verbose: bool = VerboseOption,
):
    """Minimize the renormalized energy and cross-check it against the direct definition."""
    _run(
        lambda: run_renorm(
            _resolve(
                config,
                verbose,
                output=str(output) if output else None,
                alpha=alpha,
                dbar=dbar,
                n_starts=n_starts,
                seed=seed,
            )
        )
    )


def run_core_energy(cfg: ExperimentConfig) -> bool:
    cone = cfg.cone
    tip = gamma0(cfg.dbar, cone, cfg.core_epsilons, cfg.solver, grid_shape=tuple(cfg.core_grid))
    rows = [
        {
            "epsilon": e,
            "gamma_radial": gamma_radial(e),
            "tip_constant": value,
            "radial_tip_value": radial_tip_value(tip.which, e, cone),
        }
        for e, value in zip(cfg.core_epsilons, tip.sequence)
    ]
    frame = pd.DataFrame(rows)
    run_dir = cfg.output_root() / "core-energy" / f"alpha{cfg.alpha:.6g}_d{cfg.dbar}"
    write_csv(frame, run_dir / "core_energy.csv")
    gammas = frame["gamma_radial"].to_numpy()
    record = {
        "which": tip.which,
        "gamma0": tip.value,
        "gamma0_error": tip.error,
        "gamma": float(gammas[-1]),
        "checks": {"gamma_stabilizes": increments_shrink(gammas)},
    }
    return _finish(run_dir, "core-energy", record, cfg, {"Core constants": frame})


@app.command("core-energy")
def core_energy_command(
    config: Path | None = ConfigOption,
    output: Path | None = OutputOption,
    alpha: float | None = typer.Option(None, help="Cone angle in (0, 2pi)"),
    dbar: int | None = typer.Option(None, help="Boundary degree"),
    verbose: bool = VerboseOption,
):
    """Core constants gamma and gamma0 along a decreasing epsilon sequence."""
    _run(
        lambda: run_core_energy(
            _resolve(config, verbose, output=str(output) if output else None, alpha=alpha, dbar=dbar)
        )
    )


def _find_tip_constant(cfg: ExperimentConfig, roots: List[Path]) -> float | None:
    for root in roots:
        for path in sorted(root.rglob("core-energy.json")):
            data = read_json(path)
            if math.isclose(data["config"]["alpha"], cfg.alpha) and data["config"]["dbar"] == cfg.dbar:
                return float(data["gamma0"])
    return None


def run_fit(cfg: ExperimentConfig, runs: Path) -> bool:
    records = sorted(runs.rglob("energy.json"))
    points = []
    for path in records:
        data = read_json(path)
        if math.isclose(data["config"]["alpha"], cfg.alpha) and data["config"]["dbar"] == cfg.dbar:
            points.append((float(data["epsilon"]), float(data["energy"]["total"])))
    if len(points) < 3:
        raise ConfigError(f"Found {len(points)} matching runs under {runs}; need at least 3")
    fit = fit_expansion(points)
    expected = math.pi * m_closed(cfg.dbar, cfg.cone)
    run_dir = cfg.output_root() / "fit" / f"alpha{cfg.alpha:.6g}_d{cfg.dbar}"
    frame = pd.DataFrame(points, columns=["epsilon", "energy"]).sort_values("epsilon")
    record = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "expected_slope": expected,
        "checks": {"slope_within_10_percent": abs(fit.slope - expected) <= 0.1 * expected},
    }
    warnings: List[str] = []
    tip_constant = _find_tip_constant(cfg, [runs, cfg.output_root() / "core-energy"])
    if tip_constant is None:
        warnings.append("No matching core-energy record; run core-energy first to compare the intercept")
        logger.warning("no core-energy record for alpha=%g dbar=%d", cfg.alpha, cfg.dbar)
    else:
        prediction = predicted_constant(
            cfg.dbar,
            cfg.cone,
            cfg.core_epsilons,
            flux=BoundaryFlux.canonical(cfg.n_modes),
            n_starts=cfg.n_starts,
            seed=cfg.seed,
            tip_constant=tip_constant,
        )
        record["prediction"] = prediction.to_dict()
        record["intercept_gap"] = fit.intercept - prediction.value
    return _finish(run_dir, "fit", record, cfg, {"Runs": frame}, warnings)


@app.command("fit")
def fit_command(
    runs: Path = typer.Option(..., exists=True, file_okay=False, help="Directory with minimize artifacts"),
    config: Path | None = ConfigOption,
    output: Path | None = OutputOption,
    alpha: float | None = typer.Option(None, help="Cone angle in (0, 2pi)"),
    dbar: int | None = typer.Option(None, help="Boundary degree"),
    verbose: bool = VerboseOption,
):
    """Fit E = slope log(1/eps) + intercept over earlier minimize runs."""
    _run(
        lambda: run_fit(
            _resolve(config, verbose, output=str(output) if output else None, alpha=alpha, dbar=dbar), runs
        )
    )


if __name__ == "__main__":  # pragma: no cover
    app()
