"""Reading and writing tangent fields, dispatching on the file suffix.

Textual layout (``.txt``)::

    # conevortex-field 1
    # alpha = 3.1415926535897931
    # n_r = 192
    # n_theta = 384
    # r_min = 0.001
    # r_max = 1
    # epsilon = 0.050000000000000003      (or "none")
    re im                                 one line per node, row-major (radius outer)

Floats are written with 17 significant digits, so a text round trip is bit-exact.
Binary layout (``.npz``) stores the same header keys as scalar arrays plus ``values``.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd

from .errors import ConfigError
from .field import SectorGrid, TangentField
from .geometry import ConeParams

FORMAT_TAG = "conevortex-field"
FORMAT_VERSION = 1
_FLOAT = "%.17g"


class fieldio:
    """Namespace for field serialization helpers."""

    @staticmethod
    def read(path: Path) -> tuple[TangentField, float | None]:
        """Read a field dump; returns the field and the stored epsilon."""
        suffix = path.suffix.lower()
        if suffix == ".txt":
            return _read_text(path)
        if suffix == ".npz":
            return _read_binary(path)
        raise ConfigError(f"Unsupported field format: {path.suffix}")

    @staticmethod
    def write(field: TangentField, path: Path, epsilon: float | None = None) -> None:
        """Write a field dump, choosing the layout from the suffix."""
        suffix = path.suffix.lower()
        if suffix == ".txt":
            _write_text(field, path, epsilon)
        elif suffix == ".npz":
            _write_binary(field, path, epsilon)
        else:
            raise ConfigError(f"Unsupported field format: {path.suffix}")


def _header(field: TangentField, epsilon: float | None) -> Dict[str, str]:
    grid = field.grid
    return {
        "alpha": _FLOAT % grid.cone.alpha,
        "n_r": str(grid.n_r),
        "n_theta": str(grid.n_theta),
        "r_min": _FLOAT % grid.r_min,
        "r_max": _FLOAT % grid.r_max,
        "epsilon": "none" if epsilon is None else _FLOAT % epsilon,
    }


def _grid_from(header: Dict[str, str]) -> tuple[SectorGrid, float | None]:
    try:
        grid = SectorGrid(
            ConeParams(float(header["alpha"])),
            int(header["n_r"]),
            int(header["n_theta"]),
            float(header["r_min"]),
            float(header.get("r_max", "1")),
        )
    except KeyError as exc:
        raise ConfigError(f"Field header is missing {exc.args[0]!r}") from exc
    eps_text = header.get("epsilon", "none")
    epsilon = None if eps_text == "none" else float(eps_text)
    if epsilon is not None and math.isnan(epsilon):
        epsilon = None
    return grid, epsilon


def _write_text(field: TangentField, path: Path, epsilon: float | None) -> None:
    flat = field.values.reshape(-1)
    df = pd.DataFrame({"re": flat.real, "im": flat.imag})
    with path.open("w", encoding="utf-8") as handle:
        handle.write(f"# {FORMAT_TAG} {FORMAT_VERSION}\n")
        for key, value in _header(field, epsilon).items():
            handle.write(f"# {key} = {value}\n")
        df.to_csv(handle, sep=" ", header=False, index=False, float_format=_FLOAT)


def _read_text(path: Path) -> tuple[TangentField, float | None]:
    header: Dict[str, str] = {}
    with path.open("r", encoding="utf-8") as handle:
        first = handle.readline().strip()
        if not first.startswith(f"# {FORMAT_TAG}"):
            raise ConfigError(f"{path.name} is not a {FORMAT_TAG} dump")
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition("=")
            header[key.strip()] = value.strip()
    grid, epsilon = _grid_from(header)
    df = pd.read_csv(
        path, sep=" ", comment="#", header=None, names=["re", "im"], float_precision="round_trip"
    )
    values = (df["re"].to_numpy() + 1j * df["im"].to_numpy()).reshape(grid.shape)
    return TangentField(grid, values), epsilon


def _write_binary(field: TangentField, path: Path, epsilon: float | None) -> None:
    grid = field.grid
    np.savez(
        path,
        values=field.values,
        alpha=grid.cone.alpha,
        n_r=grid.n_r,
        n_theta=grid.n_theta,
        r_min=grid.r_min,
        r_max=grid.r_max,
        epsilon=np.nan if epsilon is None else epsilon,
    )


def _read_binary(path: Path) -> tuple[TangentField, float | None]:
    with np.load(path) as data:
        header = {key: repr(float(data[key])) for key in ("alpha", "r_min", "r_max", "epsilon")}
        header["n_r"] = str(int(data["n_r"]))
        header["n_theta"] = str(int(data["n_theta"]))
        values = np.array(data["values"])
    grid, epsilon = _grid_from(header)
    return TangentField(grid, values), epsilon
