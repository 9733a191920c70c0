"""Stochastic sigma_z dephasing via quantum-jump trajectories.

The jump operator sqrt(kappa)*sigma_z has L^dag L = kappa * I, so jump times
form a homogeneous Poisson process independent of the state and each jump is
the unitary sign flip psi_down -> -psi_down.  Trajectories therefore stay
normalized and can be sampled exactly; the norm-threshold method is kept only
as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .observables import ObservableSeries


@dataclass(frozen=True)
class DephasingConfig:
    rate: float                # dimensionless jump rate
    n_trajectories: int = 100
    master_seed: int = 0

    def __post_init__(self):
        if self.rate < 0:
            raise ConfigurationError(f"dephasing rate must be >= 0, got {self.rate}")
        if self.n_trajectories < 1:
            raise ConfigurationError("need at least one trajectory")


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent per-trajectory stream; reproducible and order-free."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.default_rng(seq)


def sample_jump_times(rng: np.random.Generator, rate: float, t_total: float) -> np.ndarray:
    """Exact Poisson jump times on [0, t_total)."""
    if rate == 0.0 or t_total <= 0.0:
        return np.empty(0)
    n = rng.poisson(rate * t_total)
    return np.sort(rng.uniform(0.0, t_total, n))


def mcwf_jump_times(rng: np.random.Generator, rate: float, t_total: float,
                    dt: float) -> np.ndarray:
    """Norm-threshold jump times quantized to step boundaries (cross-check route).

    Survival norm^2 decays by exp(-rate*dt) per step regardless of the state,
    so the first step whose survival drops below the uniform threshold is
    ceil(-ln(r)/(rate*dt)).
    """
    if rate == 0.0 or t_total <= 0.0:
        return np.empty(0)
    times = []
    t = 0.0
    decay = rate * dt
    while True:
        r = rng.uniform()
        n_steps = math.ceil(-math.log(r) / decay)
        t = t + n_steps * dt
        if t >= t_total:
            break
        times.append(t)
    return np.asarray(times)


@dataclass
class EnsembleResult:
    """Trajectory-averaged observables; x_std is the density-level width."""

    t: np.ndarray
    x_mean: np.ndarray
    x_mean_stderr: np.ndarray
    x_std: np.ndarray
    pop_up: np.ndarray
    pop_up_stderr: np.ndarray
    pop_down: np.ndarray
    pop_down_stderr: np.ndarray
    coherence: np.ndarray
    coherence_stderr: np.ndarray
    norm: np.ndarray
    n_trajectories: int


def _stderr(stack: np.ndarray) -> np.ndarray:
    n = stack.shape[0]
    if n < 2:
        return np.zeros(stack.shape[1])
    return np.std(stack, axis=0, ddof=1) / math.sqrt(n)


def average_trajectories(series: list[ObservableSeries]) -> EnsembleResult:
    """Average per-trajectory series into ensemble observables.

    The ensemble width comes from the averaged density: second moments
    std_k^2 + mean_k^2 are averaged before recentring, which is what the
    mixed-state density itself would give.
    """
    if not series:
        raise ConfigurationError("no trajectories to average")
    t = series[0].t
    for s in series[1:]:
        if s.t.shape != t.shape or not np.allclose(s.t, t, rtol=0, atol=1e-12):
            raise ConfigurationError("trajectory time axes differ")
    mean_stack = np.stack([s.x_mean for s in series])
    x2_stack = np.stack([s.x_std ** 2 + s.x_mean ** 2 for s in series])
    pop_up_stack = np.stack([s.pop_up for s in series])
    pop_down_stack = np.stack([s.pop_down for s in series])
    coh_stack = np.stack([s.coherence for s in series])
    norm_stack = np.stack([s.norm for s in series])

    x_mean = np.mean(mean_stack, axis=0)
    x2 = np.mean(x2_stack, axis=0)
    x_std = np.sqrt(np.maximum(x2 - x_mean ** 2, 0.0))
    coh_err = np.sqrt(_stderr(coh_stack.real) ** 2 + _stderr(coh_stack.imag) ** 2)
    return EnsembleResult(
        t=t,
        x_mean=x_mean,
        x_mean_stderr=_stderr(mean_stack),
        x_std=x_std,
        pop_up=np.mean(pop_up_stack, axis=0),
        pop_up_stderr=_stderr(pop_up_stack),
        pop_down=np.mean(pop_down_stack, axis=0),
        pop_down_stderr=_stderr(pop_down_stack),
        coherence=np.mean(coh_stack, axis=0),
        coherence_stderr=coh_err,
        norm=np.mean(norm_stack, axis=0),
        n_trajectories=len(series),
    )


def coherence_decay_oracle(rate: float, t: np.ndarray) -> np.ndarray:
    """|<up|rho|down>| / initial value for pure sigma_z dephasing: exp(-2*kappa*t).

    Each jump flips the sign of the off-diagonal term, so the average picks up
    E[(-1)^N(t)] = exp(-2*kappa*t).
    """
    return np.exp(-2.0 * rate * np.asarray(t))
