import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spinor_sim.lattice import make_grid, prepare_bloch_gaussian
from spinor_sim.scenarios import ScenarioConfig

# single-CPU friendly hypothesis defaults; property tests here are cheap but
# the import of scipy/numpy alone can trip the default deadline
settings.register_profile(
    "suite", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(512, 64)


@pytest.fixture(scope="session")
def gaussian_down(small_grid):
    # sigma = 1 lambda on a 64-period box keeps the edge tail < 1e-27
    return prepare_bloch_gaussian(small_grid, v0=1.0, sigma_lambda=1.0, spin="down")


def tiny_walk_config(**overrides) -> ScenarioConfig:
    """Fast walk scenario for plumbing tests (not physically converged)."""
    base = dict(
        kind="walk", name="tiny", v0=1.0, n_points=512, n_periods=64,
        sigma_lambda=1.0, spin="down", drive_kind="sin",
        drive_amplitude=-0.004, n_drive_periods=2, theta=0.5 * np.pi,
        steps_per_period=64, samples_per_period=8, snapshots_per_period=1,
    )
    base.update(overrides)
    return ScenarioConfig(**base)
