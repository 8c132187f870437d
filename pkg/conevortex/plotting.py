"""Static figures of fields, growth trajectories and W landscapes."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .balls import GrowthTrajectory  # noqa: E402
from .field import TangentField  # noqa: E402


def _sector_mesh(field: TangentField):
    grid = field.grid
    radii = grid.radii
    angles = np.append(grid.angles, grid.cone.alpha)
    x = radii[:, None] * np.cos(angles)[None, :]
    y = radii[:, None] * np.sin(angles)[None, :]
    return x, y


def plot_modulus(field: TangentField, path: Path, title: str = "|u|") -> Path:
    x, y = _sector_mesh(field)
    modulus = np.abs(field.values)
    closed = np.concatenate([modulus, modulus[:, :1]], axis=1)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(x, y, closed, shading="gouraud", vmin=0.0, vmax=1.0, cmap="viridis")
    fig.colorbar(mesh, ax=ax)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_phase(field: TangentField, path: Path, stride: int = 4, title: str = "phase") -> Path:
    grid = field.grid
    points = grid.points[::stride, ::stride]
    u = field.values[::stride, ::stride]
    unit = u / np.maximum(np.abs(u), 1e-12)
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.quiver(points.real, points.imag, unit.real, unit.imag, np.abs(u), cmap="viridis", scale=40)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_growth(traj: GrowthTrajectory, path: Path) -> Path:
    """Initial and final families in the unrolled sector."""
    alpha = traj.initial.alpha
    fig, ax = plt.subplots(figsize=(6, 5))
    edge = np.linspace(0.0, alpha, 200)
    ax.plot(np.cos(edge), np.sin(edge), color="grey", lw=0.8)
    ax.plot([0, 1], [0, 0], color="grey", lw=0.8)
    ax.plot([0, np.cos(alpha)], [0, np.sin(alpha)], color="grey", lw=0.8)
    for family, color in ((traj.initial, "tab:blue"), (traj.final, "tab:red")):
        for ball in family.balls:
            c = ball.center.complex
            ax.add_patch(Circle((c.real, c.imag), ball.radius, fill=False, color=color))
    ax.set_aspect("equal")
    ax.set_title(f"growth to t={traj.t_final:.3g} ({traj.rule})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_landscape(frame: pd.DataFrame, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 5))
    contour = ax.tricontourf(frame["x"], frame["y"], frame["W"], levels=30, cmap="magma")
    fig.colorbar(contour, ax=ax)
    ax.set_aspect("equal")
    ax.set_title("W, one free vortex")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
