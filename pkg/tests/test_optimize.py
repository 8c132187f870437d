import numpy as np
import pytest

from conevortex.errors import ConfigError, DivergenceError
from conevortex.optimize import descend


def _bowl(weights: np.ndarray, center: np.ndarray):
    def fun(x: np.ndarray) -> tuple[float, np.ndarray]:
        diff = x - center
        return float(np.sum(weights * np.abs(diff) ** 2)), 2.0 * weights * diff

    return fun


@pytest.mark.parametrize("rule", ["bb", "ncg"])
def test_descend_finds_bowl_minimum(rule: str) -> None:
    weights = np.linspace(1.0, 10.0, 12)
    center = np.exp(1j * np.arange(12))
    result = descend(
        _bowl(weights, center),
        np.zeros(12, dtype=complex),
        grad_tol=1e-10,
        relative=False,
        step_rule=rule,
        max_iters=5000,
        initial_step=0.05,
    )
    assert result.converged
    assert np.allclose(result.x, center, atol=1e-9)
    assert result.history[-1]["iteration"] == result.iterations


def test_frozen_coordinates_do_not_move() -> None:
    center = np.full(6, 2.0 + 1.0j)
    free = np.array([True, True, True, False, False, True])
    x0 = np.zeros(6, dtype=complex)
    result = descend(_bowl(np.ones(6), center), x0, free=free, grad_tol=1e-10, relative=False, initial_step=0.1)
    assert np.all(result.x[~free] == 0.0)
    assert np.allclose(result.x[free], center[free])


def test_stationary_start_returns_immediately() -> None:
    center = np.ones(3, dtype=complex)
    result = descend(_bowl(np.ones(3), center), center.copy())
    assert result.converged
    assert result.iterations == 0


def test_rejects_bad_inputs() -> None:
    with pytest.raises(ConfigError):
        descend(_bowl(np.ones(2), np.zeros(2)), np.ones(2, dtype=complex), step_rule="lbfgs")
    with pytest.raises(DivergenceError):
        descend(lambda x: (float("nan"), x), np.ones(2, dtype=complex))
