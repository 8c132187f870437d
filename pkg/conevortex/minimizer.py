"""Discrete Ginzburg-Landau minimization, sector core problems and radial core energies."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Dict, List, Literal, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import solve_banded

from .errors import ConfigError, NonConvergenceError
from .field import (
    EnergyBreakdown,
    SectorGrid,
    TangentField,
    degree_from_current,
    diagonal_preconditioner,
    energy_and_gradient,
    winding_along,
)
from .geometry import TWO_PI, ConeParams
from .optimize import descend

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Unit boundary datum at the outer ring of a grid."""

    dbar: int
    profile: np.ndarray

    def __post_init__(self) -> None:
        profile = np.array(self.profile, dtype=complex, copy=True)
        if profile.ndim != 1:
            raise ConfigError("Boundary profile must be one-dimensional")
        if np.max(np.abs(np.abs(profile) - 1.0)) > 1e-12:
            raise ConfigError("Boundary profile must have unit modulus")
        profile.setflags(write=False)
        object.__setattr__(self, "profile", profile)

    def degree(self, cone: ConeParams) -> int:
        """Cone degree of the datum on its tip-enclosing loop."""
        loop = np.concatenate([self.profile, [self.profile[0] * np.exp(1j * cone.alpha)]])
        return degree_from_current(winding_along(loop), cone.alpha)


@dataclass
class SolverOptions:
    max_iters: int = 20000
    grad_tol: float = 1e-6
    step_rule: Literal["bb", "ncg"] = "bb"
    seed: int = 0
    log_every: int = 100
    strict: bool = True

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.grad_tol > 0.0:
            raise ConfigError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.step_rule not in ("bb", "ncg"):
            raise ConfigError(f"Unsupported step rule: {self.step_rule!r}")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class MinimizeDiagnostics:
    converged: bool
    iterations: int
    grad_norm: float
    message: str
    initial_energy: float
    max_modulus: float
    history: List[Dict[str, float]] = field(default_factory=list)

    def summary(self) -> Dict[str, object]:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "message": self.message,
            "initial_energy": self.initial_energy,
            "max_modulus": self.max_modulus,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history, columns=["iteration", "energy", "grad_norm", "step"])


def boundary_exponent(dbar: int, cone: ConeParams) -> float:
    """Angular frequency k of the canonical datum e^{ik theta}."""
    return (dbar - 1) * TWO_PI / cone.alpha + 1.0


def canonical_boundary(dbar: int, grid: SectorGrid) -> BoundaryData:
    """Degree-``dbar`` datum e^{i((dbar-1)2pi/alpha + 1) theta}."""
    k = boundary_exponent(int(dbar), grid.cone)
    return BoundaryData(int(dbar), np.exp(1j * k * grid.angles))


def initial_field(bc: BoundaryData, grid: SectorGrid, seed: int = 0, noise: float = 0.02) -> TangentField:
    """Boundary profile extended radially with a modulus ramp from 0.1 at r_min.

    A small seeded perturbation breaks the rotational symmetry of the ramp.
    """
    radii = grid.radii
    ramp = 0.1 + 0.9 * (radii - radii[0]) / (radii[-1] - radii[0])
    values = ramp[:, None] * bc.profile[None, :]
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        jitter = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        values = values + noise * (1.0 - ramp)[:, None] * jitter
    values[-1] = bc.profile
    return TangentField(grid, values)


def minimize(
    init: TangentField, bc: BoundaryData, epsilon: float, opts: SolverOptions | None = None
) -> tuple[TangentField, EnergyBreakdown, MinimizeDiagnostics]:
    """Minimize the GL energy with Dirichlet data at the outer ring and a free inner ring."""
    opts = opts or SolverOptions()
    if not epsilon > 0.0:
        raise ConfigError(f"epsilon must be positive, got {epsilon!r}")
    grid = init.grid
    if bc.profile.shape != (grid.n_theta,):
        raise ConfigError("Boundary profile does not match the grid")

    x0 = np.array(init.values, copy=True)
    if not np.array_equal(x0[-1], bc.profile):
        logger.warning("Initial field did not match the boundary datum; outer ring overwritten")
        x0[-1] = bc.profile
    free = np.ones(grid.shape, dtype=bool)
    free[-1] = False

    def objective(x: np.ndarray) -> tuple[float, np.ndarray]:
        dirichlet, potential, grad = energy_and_gradient(x, grid, epsilon)
        return dirichlet + potential, grad

    initial_energy = objective(x0)[0]
    result = descend(
        objective,
        x0,
        free=free,
        precond=diagonal_preconditioner(grid, epsilon),
        max_iters=opts.max_iters,
        grad_tol=opts.grad_tol,
        step_rule=opts.step_rule,
        log_every=opts.log_every,
    )
    values = result.x
    values[-1] = bc.profile
    out = TangentField(grid, values)
    dirichlet, potential, _ = energy_and_gradient(values, grid, epsilon, with_gradient=False)
    energy = EnergyBreakdown(dirichlet, potential, dirichlet + potential, epsilon)
    diagnostics = MinimizeDiagnostics(
        converged=result.converged,
        iterations=result.iterations,
        grad_norm=result.grad_norm,
        message=result.message,
        initial_energy=float(initial_energy),
        max_modulus=float(np.max(np.abs(values))),
        history=result.history,
    )
    logger.info(
        "minimize eps=%g: energy=%.10g iterations=%d converged=%s",
        epsilon,
        energy.total,
        result.iterations,
        result.converged,
    )
    if not result.converged and opts.strict:
        raise NonConvergenceError(
            f"Minimization stopped after {result.iterations} iterations ({result.message})",
            field=out,
            energy=energy,
            diagnostics=diagnostics,
        )
    return out, energy, diagnostics


# Sector core problems


def core_winding(which: int, cone: ConeParams) -> float:
    """Angular frequency of the core datum: 1 for mu_1, 1 - 2pi/alpha for mu_2."""
    if which == 1:
        return 1.0
    if which == 2:
        return 1.0 - TWO_PI / cone.alpha
    raise ConfigError(f"Unsupported core problem: {which!r}")


def core_log_coefficient(which: int, cone: ConeParams) -> float:
    """Leading coefficient (alpha/2) k^2 of log(1/eps) in mu_which."""
    return 0.5 * cone.alpha * core_winding(which, cone) ** 2


def core_grid(cone: ConeParams, eta: float, grid_shape: tuple[int, int], r_min_fraction: float = 1e-3) -> SectorGrid:
    n_r, n_theta = grid_shape
    return SectorGrid(cone, n_r, n_theta, r_min=r_min_fraction * eta, r_max=eta)


def solve_core_mu(
    which: int,
    epsilon: float,
    eta: float,
    cone: ConeParams,
    opts: SolverOptions | None = None,
    *,
    grid_shape: tuple[int, int] = (48, 96),
    r_min_fraction: float = 1e-3,
) -> tuple[float, TangentField]:
    """Minimal discrete GL energy on the sector of radius ``eta`` with the mu_1 or mu_2 datum."""
    if not (0.0 < epsilon < eta <= 1.0):
        raise ConfigError(f"Need 0 < epsilon < eta <= 1, got epsilon={epsilon!r}, eta={eta!r}")
    core_winding(which, cone)
    grid = core_grid(cone, eta, grid_shape, r_min_fraction)
    bc = canonical_boundary(1 if which == 1 else 0, grid)
    opts = opts or SolverOptions()
    init = initial_field(bc, grid, seed=opts.seed)
    core, energy, _ = minimize(init, bc, epsilon, opts)
    return energy.total, core


# Radial core problems


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Minimizer of the 1-D radial problem with winding k on the unit disc."""

    r: np.ndarray
    f: np.ndarray
    per_radian: float
    epsilon: float
    winding: float

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return np.interp(s, self.r, self.f)

    @property
    def disc_energy(self) -> float:
        return TWO_PI * self.per_radian


def _radial_mesh(n_nodes: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n_nodes)
    return t**2


def _radial_assemble(f: np.ndarray, r: np.ndarray, k2: float, epsilon: float):
    """Energy per radian, gradient and tridiagonal Hessian for nodal values ``f``."""
    a, b = r[:-1], r[1:]
    h = b - a
    q = 0.5 * (b**2 - a**2)
    log_ratio = np.zeros_like(h)
    log_ratio[1:] = np.log(b[1:] / a[1:])
    alpha_a, alpha_b = b / h, -a / h
    beta_a, beta_b = -1.0 / h, 1.0 / h

    fa, fb = f[:-1], f[1:]
    amp = alpha_a * fa + alpha_b * fb
    slope = beta_a * fa + beta_b * fb
    quad = (1.0 + k2) * q * slope**2 + k2 * (log_ratio * amp**2 + 2.0 * h * amp * slope)

    # local 2x2 matrices of the quadratic part
    m_aa = (1.0 + k2) * q * beta_a**2 + k2 * (log_ratio * alpha_a**2 + 2.0 * h * alpha_a * beta_a)
    m_bb = (1.0 + k2) * q * beta_b**2 + k2 * (log_ratio * alpha_b**2 + 2.0 * h * alpha_b * beta_b)
    m_ab = (1.0 + k2) * q * beta_a * beta_b + k2 * (
        log_ratio * alpha_a * alpha_b + h * (alpha_a * beta_b + alpha_b * beta_a)
    )

    pot = np.zeros_like(h)
    g_a = m_aa * fa + m_ab * fb
    g_b = m_ab * fa + m_bb * fb
    h_aa, h_bb, h_ab = m_aa.copy(), m_bb.copy(), m_ab.copy()
    offset = h / (2.0 * math.sqrt(3.0))
    for x in (0.5 * (a + b) - offset, 0.5 * (a + b) + offset):
        c_a = (b - x) / h
        c_b = (x - a) / h
        val = c_a * fa + c_b * fb
        weight = 0.5 * h * x / (2.0 * epsilon**2)
        defect = 1.0 - val**2
        pot += weight * defect**2
        d1 = -4.0 * val * defect
        d2 = 12.0 * val**2 - 4.0
        g_a += 0.5 * weight * d1 * c_a
        g_b += 0.5 * weight * d1 * c_b
        h_aa += 0.5 * weight * d2 * c_a**2
        h_bb += 0.5 * weight * d2 * c_b**2
        h_ab += 0.5 * weight * d2 * c_a * c_b

    energy = 0.5 * float(np.sum(quad + pot))
    n = f.size
    grad = np.zeros(n)
    grad[:-1] += g_a
    grad[1:] += g_b
    diag = np.zeros(n)
    diag[:-1] += h_aa
    diag[1:] += h_bb
    return energy, grad, diag, h_ab


@lru_cache(maxsize=64)
def radial_core_profile(
    epsilon: float, winding: float = 1.0, n_nodes: int = 4000, max_iters: int = 200
) -> RadialProfile:
    """Damped Newton solve of min ½∫(f'^2 + k^2 f^2/r^2 + (1-f^2)^2/(2eps^2)) r dr, f(0)=0, f(1)=1."""
    if not (0.0 < epsilon < 0.5):
        raise ConfigError(f"Radial core needs 0 < epsilon < 0.5, got {epsilon!r}")
    if n_nodes < 2000:
        raise ConfigError("Radial mesh needs at least 2000 nodes")
    if winding == 0.0:
        raise ConfigError("Radial core needs a nonzero winding")
    r = _radial_mesh(n_nodes)
    k2 = float(winding) ** 2
    scale = math.sqrt(2.0) * epsilon / max(abs(winding), 1e-3) ** 0.5
    f = r / np.sqrt(r**2 + scale**2)
    f = f / f[-1]

    energy, grad, diag, off = _radial_assemble(f, r, k2, epsilon)
    for iteration in range(1, max_iters + 1):
        g = grad[1:-1]
        d_in, off_in = diag[1:-1], off[1:-1]
        shift = 0.0
        while True:
            banded = np.zeros((3, g.size))
            banded[0, 1:] = off_in
            banded[1] = d_in + shift
            banded[2, :-1] = off_in
            try:
                step = solve_banded((1, 1), banded, -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)) and float(g @ step) < 0.0:
                break
            shift = max(2.0 * shift, 1e-8 * float(np.max(np.abs(d_in))))
        decrement = -float(g @ step)
        t = 1.0
        while True:
            trial = f.copy()
            trial[1:-1] = np.clip(f[1:-1] + t * step, 0.0, 1.5)
            t_energy, t_grad, t_diag, t_off = _radial_assemble(trial, r, k2, epsilon)
            if t_energy <= energy - 1e-4 * t * decrement or t < 1e-12:
                break
            t *= 0.5
        stalled = t < 1e-12
        f, energy, grad, diag, off = trial, t_energy, t_grad, t_diag, t_off
        if decrement <= 1e-13 * max(1.0, abs(energy)) or (stalled and decrement < 1e-8):
            logger.debug("radial core eps=%g k=%g converged in %d Newton steps", epsilon, winding, iteration)
            return RadialProfile(r, f, energy, epsilon, float(winding))
    raise NonConvergenceError(f"Radial core solver did not converge for epsilon={epsilon!r}", profile=f)


def gamma_radial(epsilon: float) -> float:
    """Core constant gamma(eps): radial disc energy minus pi log(1/eps)."""
    return radial_core_profile(float(epsilon)).disc_energy - math.pi * math.log(1.0 / epsilon)


def radial_tip_value(which: int, epsilon: float, cone: ConeParams) -> float:
    """Radial-ansatz value alpha * J_k(eps) for the tip core on the unit sector."""
    k = core_winding(which, cone)
    return cone.alpha * radial_core_profile(float(epsilon), k).per_radian


def increments_shrink(values: Sequence[float]) -> bool:
    """True when |v[k+1] - v[k]| strictly decreases along the sequence."""
    steps = np.abs(np.diff(np.asarray(values, dtype=float)))
    return bool(np.all(np.diff(steps) < 0))


@dataclass
class Extrapolation:
    value: float
    error: float
    which: int
    sequence: List[float]


def tip_core_branch(dbar: int, cone: ConeParams) -> int:
    """mu_2 when the tip carries no vortex (dbar <= 0 and alpha > 2pi/3), else mu_1."""
    return 2 if (dbar <= 0 and cone.alpha > TWO_PI / 3.0) else 1


def gamma0(
    dbar: int,
    cone: ConeParams,
    eps_sequence: List[float],
    opts: SolverOptions | None = None,
    *,
    grid_shape: tuple[int, int] = (48, 96),
) -> Extrapolation:
    """Tip core constant from mu_j(eps, 1) minus its log term, extrapolated in eps."""
    eps = [float(e) for e in eps_sequence]
    if len(eps) < 3 or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps_sequence must be strictly decreasing with at least 3 entries")
    which = tip_core_branch(dbar, cone)
    coeff = core_log_coefficient(which, cone)
    sequence = []
    for e in eps:
        mu, _ = solve_core_mu(which, e, 1.0, cone, opts, grid_shape=grid_shape)
        sequence.append(mu - coeff * math.log(1.0 / e))
    if not increments_shrink(sequence):
        raise NonConvergenceError("Core constant increments fail to decrease", sequence=sequence)
    increments = np.diff(sequence)
    last, prior = increments[-1], increments[-2]
    ratio = last / prior if prior != 0.0 else 0.0
    value = sequence[-1] + (last * ratio / (1.0 - ratio) if abs(ratio) < 1.0 else 0.0)
    return Extrapolation(float(value), float(abs(last)), which, sequence)
