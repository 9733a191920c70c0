"""Jump sampling statistics and trajectory averaging."""
import math

import numpy as np
import pytest

from spinor_sim.dephasing import (
    DephasingConfig,
    average_trajectories,
    coherence_decay_oracle,
    mcwf_jump_times,
    sample_jump_times,
    trajectory_rng,
)
from spinor_sim.errors import ConfigurationError
from spinor_sim.observables import Moments, ObservableSeries


def test_config_validation():
    DephasingConfig(rate=0.0)
    with pytest.raises(ConfigurationError):
        DephasingConfig(rate=-0.1)
    with pytest.raises(ConfigurationError):
        DephasingConfig(rate=0.1, n_trajectories=0)


def test_trajectory_rng_reproducible_and_independent():
    a1 = trajectory_rng(7, 3).uniform(size=4)
    a2 = trajectory_rng(7, 3).uniform(size=4)
    b = trajectory_rng(7, 4).uniform(size=4)
    c = trajectory_rng(8, 3).uniform(size=4)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)


def test_jump_times_bounds_and_order():
    rng = trajectory_rng(0, 0)
    times = sample_jump_times(rng, 0.5, 40.0)
    assert np.all(np.diff(times) >= 0)
    assert times.min() >= 0.0 and times.max() < 40.0
    assert sample_jump_times(rng, 0.0, 40.0).size == 0
    assert sample_jump_times(rng, 0.5, 0.0).size == 0


def test_jump_counts_are_poisson():
    # mean 9 per window; 4000 windows gives a 4-sigma band of 0.19
    rate, t_total = 0.3, 30.0
    rng = trajectory_rng(123, 0)
    counts = np.array([sample_jump_times(rng, rate, t_total).size
                       for _ in range(4000)])
    assert abs(counts.mean() - 9.0) < 4 * 3.0 / math.sqrt(4000)
    # Poisson variance equals the mean; allow a wide statistical band
    assert counts.var() == pytest.approx(9.0, rel=0.15)


def test_mcwf_route_brackets_exact_exponential_waits():
    # with the same uniform draws, the norm-threshold times exceed the exact
    # exponential times by less than one step each
    rate, t_total, dt = 0.21, 200.0, 0.05
    mc = mcwf_jump_times(trajectory_rng(5, 1), rate, t_total, dt)
    rng = trajectory_rng(5, 1)
    t = 0.0
    exact = []
    while True:
        wait = -math.log(rng.uniform()) / rate
        t += wait
        if t >= t_total:
            break
        exact.append(t)
    for i, tm in enumerate(mc):
        assert exact[i] <= tm <= exact[i] + (i + 1) * dt + 1e-9
    assert len(mc) <= len(exact) + 1


def test_mcwf_and_exact_sampling_agree_in_distribution():
    rate, t_total, dt = 0.3, 30.0, 0.01
    n = 2000
    exact_counts = np.array([sample_jump_times(trajectory_rng(9, i), rate, t_total).size
                             for i in range(n)])
    mcwf_counts = np.array([mcwf_jump_times(trajectory_rng(77, i), rate, t_total, dt).size
                            for i in range(n)])
    # both estimate the same mean 9.0; each carries stderr 3/sqrt(n)
    band = 6 * 3.0 / math.sqrt(n)
    assert abs(exact_counts.mean() - mcwf_counts.mean()) < band


def test_coherence_oracle_values():
    t = np.array([0.0, 1.0, 2.0])
    assert np.allclose(coherence_decay_oracle(0.5, t), np.exp(-t))
    assert np.allclose(coherence_decay_oracle(0.0, t), 1.0)


# ---------------------------------------------------------------------------
# averaging


def _series(t, x_mean, x_std, pop_up=None, coherence=None):
    n = len(t)
    x_mean = np.asarray(x_mean, dtype=float)
    x_std = np.asarray(x_std, dtype=float)
    pop_up = np.full(n, 0.5) if pop_up is None else np.asarray(pop_up)
    coherence = np.full(n, 0.5 + 0j) if coherence is None else np.asarray(coherence)
    return ObservableSeries(
        t=np.asarray(t, dtype=float), x_mean=x_mean, x_std=x_std,
        x_mean_up=x_mean.copy(), x_mean_down=x_mean.copy(),
        pop_up=pop_up, pop_down=1.0 - pop_up,
        coherence=coherence.astype(complex), norm=np.ones(n),
    )


def test_single_trajectory_average_is_identity():
    s = _series([0.0, 1.0], [0.0, 2.0], [1.0, 1.5])
    ens = average_trajectories([s])
    assert np.array_equal(ens.x_mean, s.x_mean)
    assert np.array_equal(ens.x_std, s.x_std)
    assert np.all(ens.x_mean_stderr == 0.0)
    assert ens.n_trajectories == 1


def test_ensemble_width_pools_second_moments():
    # two packets of width s at +-a: mixed density has width sqrt(s^2 + a^2)
    a, s = 3.0, 1.5
    left = _series([0.0], [-a], [s])
    right = _series([0.0], [a], [s])
    ens = average_trajectories([left, right])
    assert ens.x_mean[0] == pytest.approx(0.0, abs=1e-14)
    assert ens.x_std[0] == pytest.approx(math.sqrt(s ** 2 + a ** 2), rel=1e-12)
    # stderr of the mean over two trajectories: std(ddof=1)/sqrt(2) = a
    assert ens.x_mean_stderr[0] == pytest.approx(a, rel=1e-12)


def test_average_is_permutation_invariant():
    rng = np.random.default_rng(3)
    series = [_series([0.0, 1.0, 2.0], rng.normal(size=3), rng.uniform(1, 2, 3),
                      pop_up=rng.uniform(0, 1, 3),
                      coherence=rng.normal(size=3) + 1j * rng.normal(size=3))
              for _ in range(6)]
    fwd = average_trajectories(series)
    rev = average_trajectories(series[::-1])
    for name in ("x_mean", "x_std", "pop_up", "coherence", "x_mean_stderr"):
        assert np.allclose(getattr(fwd, name), getattr(rev, name),
                           rtol=0, atol=1e-13)


def test_average_rejects_mismatched_time_axes():
    with pytest.raises(ConfigurationError):
        average_trajectories([])
    a = _series([0.0, 1.0], [0, 0], [1, 1])
    b = _series([0.0, 1.1], [0, 0], [1, 1])
    with pytest.raises(ConfigurationError):
        average_trajectories([a, b])


def test_sign_flip_average_reproduces_coherence_decay():
    # synthetic trajectories: coherence 0.5 * (-1)^N(t) with Poisson N; the
    # ensemble average must track 0.5 * exp(-2 kappa t)
    rate, t_total = 0.08, 30.0
    t = np.linspace(0.0, t_total, 31)
    series = []
    for i in range(800):
        jumps = sample_jump_times(trajectory_rng(11, i), rate, t_total)
        signs = (-1.0) ** np.searchsorted(jumps, t)
        series.append(_series(t, np.zeros_like(t), np.ones_like(t),
                              coherence=0.5 * signs + 0j))
    ens = average_trajectories(series)
    expected = 0.5 * coherence_decay_oracle(rate, t)
    # 800 trajectories: binomial noise about 0.5/sqrt(800) = 0.018 per point
    assert np.max(np.abs(ens.coherence.real - expected)) < 0.07
