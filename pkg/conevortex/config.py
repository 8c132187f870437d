"""Experiment configuration: one JSON file, overridable from the command line."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List

from .errors import ConfigError
from .field import SectorGrid
from .geometry import ConeParams
from .minimizer import SolverOptions

OUTPUT_ENV = "CONEVORTEX_OUTPUT"
DEFAULT_OUTPUT = "runs"


@dataclass
class GridConfig:
    n_r: int = 128
    n_theta: int = 128
    r_min: float = 1e-3

    def build(self, cone: ConeParams) -> SectorGrid:
        return SectorGrid(cone, self.n_r, self.n_theta, r_min=self.r_min)


@dataclass
class ExperimentConfig:
    alpha: float = math.pi
    dbar: int = 2
    epsilons: List[float] = field(default_factory=lambda: [0.1, 0.05])
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    output: str | None = None
    # minimize
    init: str = "test"
    tip_core: str = "sector"
    margin_factor: float = 2.0
    # mtable
    degrees: List[int] = field(default_factory=lambda: list(range(-5, 6)))
    alphas: List[float] = field(
        default_factory=lambda: [math.pi / 3, math.pi / 2, 2 * math.pi / 3, math.pi, 1.5 * math.pi]
    )
    # growth
    n_balls: int = 5
    t_final: float = 3.0
    merge_rule: str = "exact"
    # renorm
    n_starts: int = 16
    n_modes: int = 128
    landscape: List[int] = field(default_factory=lambda: [40, 72])
    # core-energy
    core_epsilons: List[float] = field(default_factory=lambda: [0.2, 0.1, 0.05])
    core_grid: List[int] = field(default_factory=lambda: [48, 96])

    @property
    def cone(self) -> ConeParams:
        return ConeParams(self.alpha)

    def output_root(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)

    def validate(self) -> "ExperimentConfig":
        cone = self.cone
        self.grid.build(cone)
        if not self.epsilons or any(not 0.0 < e < 1.0 for e in self.epsilons):
            raise ConfigError(f"epsilons must lie in (0, 1): {self.epsilons!r}")
        if self.init not in ("test", "ramp"):
            raise ConfigError(f"Unsupported init: {self.init!r}")
        if self.tip_core not in ("sector", "radial"):
            raise ConfigError(f"Unsupported tip core: {self.tip_core!r}")
        if self.margin_factor < 0.0:
            raise ConfigError("margin_factor must be non-negative")
        if self.merge_rule not in ("exact", "worst_case"):
            raise ConfigError(f"Unsupported merge rule: {self.merge_rule!r}")
        if self.n_balls < 0 or self.t_final < 0.0:
            raise ConfigError("n_balls and t_final must be non-negative")
        if self.n_starts < 1 or self.n_modes < 1:
            raise ConfigError("n_starts and n_modes must be positive")
        if len(self.landscape) != 2 or min(self.landscape) < 1:
            raise ConfigError("landscape must be [n_radii, n_angles]")
        if len(self.core_grid) != 2 or min(self.core_grid) < 16:
            raise ConfigError("core_grid must be [n_r, n_theta] with at least 16 nodes each")
        if len(self.core_epsilons) < 3:
            raise ConfigError("core_epsilons needs at least three values")
        for alpha in self.alphas:
            ConeParams(float(alpha))
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        values = dict(data)
        try:
            if "grid" in values:
                values["grid"] = GridConfig(**values["grid"])
            if "solver" in values:
                values["solver"] = SolverOptions(**values["solver"])
            return cls(**values).validate()
        except TypeError as exc:
            raise ConfigError(f"Invalid config: {exc}") from exc


def load_config(path: Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig().validate()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object")
    return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path: Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))


def apply_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Return a validated copy with every non-None override applied."""
    data = config.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("n_r", "n_theta", "r_min"):
            data["grid"][key] = value
        elif key in ("max_iters", "grad_tol", "step_rule"):
            data["solver"][key] = value
        else:
            data[key] = value
    if overrides.get("seed") is not None:
        data["solver"]["seed"] = overrides["seed"]
    return ExperimentConfig.from_dict(data)
