import json
import math
from pathlib import Path

import pandas as pd
import pytest
from typer.testing import CliRunner

from conevortex.__main__ import app
from conevortex.config import apply_overrides, load_config
from conevortex.records import write_json

runner = CliRunner()


def test_cli_mtable(tmp_path: Path) -> None:
    result = runner.invoke(app, ["mtable", "--output", str(tmp_path), "--d-min", "-2", "--d-max", "2"])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "mtable" / "m_table.csv")
    assert len(frame) == 5 * 5
    assert frame["agree"].all()
    assert "## Checks" in (tmp_path / "mtable" / "report.md").read_text()


def test_cli_rejects_bad_cone_angle(tmp_path: Path) -> None:
    result = runner.invoke(app, ["minimize", "--output", str(tmp_path), "--alpha", "7.0"])
    assert result.exit_code == 1
    assert "Error" in result.output


def test_cli_rejects_unknown_config_keys(tmp_path: Path) -> None:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"alpha": 1.0, "unknown": 3}))
    result = runner.invoke(app, ["growth", "--config", str(path), "--output", str(tmp_path)])
    assert result.exit_code == 1


def _growth_record(root: Path) -> dict:
    data = json.loads(next((root / "growth").rglob("growth.json")).read_text())
    data.pop("config")
    return data


def test_cli_growth_is_deterministic(tmp_path: Path) -> None:
    args = ["growth", "--alpha", "1.5", "--n-balls", "6", "--t-final", "3", "--seed", "11"]
    first = runner.invoke(app, args + ["--output", str(tmp_path / "a")])
    second = runner.invoke(app, args + ["--output", str(tmp_path / "b")])
    assert first.exit_code == 0, first.output
    assert second.exit_code == 0, second.output
    assert _growth_record(tmp_path / "a") == _growth_record(tmp_path / "b")
    assert next((tmp_path / "a").rglob("growth.png")).exists()


def test_cli_renorm_writes_landscape(tmp_path: Path) -> None:
    result = runner.invoke(
        app, ["renorm", "--output", str(tmp_path), "--alpha", str(math.pi), "--dbar", "2", "--n-starts", "2"]
    )
    assert result.exit_code == 0, result.output
    run_dir = next((tmp_path / "renorm").iterdir())
    record = json.loads((run_dir / "renorm.json").read_text())
    assert record["case"] == 1
    x, y = record["configuration"]["disc_positions"][0]
    assert math.hypot(x, y) == pytest.approx(math.sqrt(3 / 7), abs=1e-4)
    assert (run_dir / "w_landscape.csv").exists()
    assert record["checks"]["direct_definition_agrees"]


def test_cli_fit_reads_energy_records(tmp_path: Path) -> None:
    cfg = apply_overrides(load_config(None), alpha=math.pi, dbar=2)
    slope = 1.5 * math.pi
    for eps in (0.1, 0.07, 0.05):
        energy = {"total": slope * math.log(1 / eps) + 2.0}
        write_json(tmp_path / "runs" / f"eps{eps:g}" / "energy.json", {"energy": energy, "epsilon": eps}, cfg)
    result = runner.invoke(
        app, ["fit", "--runs", str(tmp_path / "runs"), "--output", str(tmp_path / "out"), "--dbar", "2"]
    )
    assert result.exit_code == 0, result.output
    record = json.loads(next((tmp_path / "out").rglob("fit.json")).read_text())
    assert record["slope"] == pytest.approx(slope)
    assert record["intercept"] == pytest.approx(2.0)
    assert "run core-energy first" in next((tmp_path / "out").rglob("report.md")).read_text()


def test_cli_fit_compares_intercept_with_prediction(tmp_path: Path) -> None:
    cfg = apply_overrides(load_config(None), alpha=math.pi, dbar=2)
    for eps in (0.1, 0.07, 0.05):
        energy = {"total": 1.5 * math.pi * math.log(1 / eps) + 2.0}
        write_json(tmp_path / "runs" / f"eps{eps:g}" / "energy.json", {"energy": energy, "epsilon": eps}, cfg)
    write_json(tmp_path / "runs" / "core-energy.json", {"gamma0": 0.25}, cfg)
    args = ["fit", "--runs", str(tmp_path / "runs"), "--output", str(tmp_path / "out"), "--alpha", str(math.pi)]
    result = runner.invoke(app, args + ["--dbar", "2"])
    assert result.exit_code == 0, result.output
    record = json.loads(next((tmp_path / "out").rglob("fit.json")).read_text())
    prediction = record["prediction"]
    assert prediction["K"] == 1
    assert prediction["gamma0"] == 0.25
    assert record["intercept_gap"] == pytest.approx(2.0 - prediction["predicted"])


def test_cli_fit_needs_three_runs(tmp_path: Path) -> None:
    (tmp_path / "runs").mkdir()
    result = runner.invoke(app, ["fit", "--runs", str(tmp_path / "runs"), "--output", str(tmp_path / "out")])
    assert result.exit_code == 1


@pytest.mark.slow
def test_cli_minimize_reproduces_leading_order(tmp_path: Path) -> None:
    """Tip vanishes and E ~ pi m log(1/eps) for dbar = 2 on the half-turn cone."""
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "alpha": math.pi,
                "dbar": 2,
                "epsilons": [0.1, 0.07, 0.05],
                "grid": {"n_r": 96, "n_theta": 192, "r_min": 1e-3},
                "solver": {"max_iters": 20000, "strict": False},
                "margin_factor": 0.5,
            }
        )
    )
    result = runner.invoke(app, ["minimize", "--config", str(cfg), "--output", str(tmp_path)])
    assert result.exit_code == 0, result.output
    for record in (tmp_path / "minimize").rglob("minimize.json"):
        payload = json.loads(record.read_text())
        assert payload["tip_modulus_min"] < 0.2
        assert payload["checks"]["ledger_below_outside_energy"]
    fit_args = ["fit", "--runs", str(tmp_path / "minimize"), "--config", str(cfg), "--output", str(tmp_path)]
    fit = runner.invoke(app, fit_args)
    assert fit.exit_code == 0, fit.output
