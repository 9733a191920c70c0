"""End-to-end acceptance checks on the shipped presets at production scale.

Every test here runs the real pipeline (presets -> run_scenario) or a pinned
two-route oracle comparison; nothing is mocked and no resolution is lowered.
Set SPINOR_SIM_ACCEPTANCE=ci to shrink the one multi-minute ensemble (the
dephased random-walk arm) to 24 trajectories over 6 drive periods; with that
profile only the exponent separation is asserted, not the absolute windows.
Everything else is identical in both profiles.  The full profile needs about
an hour on a single core, dominated by the two deep-lattice ensembles.
"""

import math
import os
from dataclasses import replace

import numpy as np
import pytest
from scipy.signal import find_peaks

from spinor_sim.discrete import (
    make_walk_state,
    transport_velocity_bound,
    walk_run,
    walk_unitary_dense,
)
from spinor_sim.lattice import (
    compute_band_structure,
    lattice_potential,
    make_grid,
    prepare_bloch_gaussian,
)
from spinor_sim.observables import (
    fit_diffusion_exponent,
    monotone_fit,
    oscillation_amplitude,
)
from spinor_sim.propagation import (
    DriveSegment,
    ForceLaw,
    run_protocol,
    run_protocol_reversed,
)
from spinor_sim.scenarios import (
    BLOCH_ACCEL_SI,
    ScenarioConfig,
    build_initial,
    get_preset,
    resolve,
    run_scenario,
)
from spinor_sim.units import PhysicalParams, acceleration_to_force

PROFILE = os.environ.get("SPINOR_SIM_ACCEPTANCE", "full").strip().lower()
if PROFILE not in ("full", "ci"):
    raise ValueError(
        f"SPINOR_SIM_ACCEPTANCE must be 'full' or 'ci', got {PROFILE!r}"
    )

# Frozen oracle values, derived independently of the implementation:
# ground-band width from the Mathieu characteristic values b_1 - a_0 at
# q = v0/4, the static force from F = m*a in recoil units, and the
# ac-transport bound (d*Delta/2)*J_0(d*F1/omega) evaluated by hand.
DELTA_V0_1 = 0.7734682214622469
STATIC_FORCE = 0.017864712502842394
TRANSPORT_BOUND = 1.052468435495921
REPORTED_BLOCH_PERIOD_MS = 8.44


def detrended_residual(values):
    """Series minus its best monotone fit (either direction, lower SSE)."""
    up = monotone_fit(values, increasing=True)
    down = monotone_fit(values, increasing=False)
    trend = up if np.sum((values - up) ** 2) <= np.sum((values - down) ** 2) else down
    return values - trend


def oscillation_extrema_times(times, values):
    """Times of the detrended peaks and troughs, in order."""
    resid = detrended_residual(values)
    amp = oscillation_amplitude(values)
    peaks, _ = find_peaks(resid, prominence=0.2 * amp)
    troughs, _ = find_peaks(-resid, prominence=0.2 * amp)
    return np.sort(np.concatenate([times[peaks], times[troughs]]))


# ---------------------------------------------------------------------------
# shared production runs


@pytest.fixture(scope="module")
def bloch_run():
    return run_scenario(get_preset("fig1a"))


@pytest.fixture(scope="module")
def transport_run():
    return run_scenario(get_preset("fig1b"))


@pytest.fixture(scope="module")
def dirac_runs():
    # denser sampling than the shipped presets so the oscillation extrema
    # are timed to a sixteenth of a drive period
    return {
        name: run_scenario(replace(get_preset(name), samples_per_period=16))
        for name in ("fig3_theta01pi", "fig3_theta02pi")
    }


@pytest.fixture(scope="module")
def klein_runs():
    base = get_preset("fig4a")
    return {
        vs: run_scenario(replace(base, v_step=vs))
        for vs in (0.0, 0.015, 0.02, 0.1)
    }


@pytest.fixture(scope="module")
def walk_reference_run():
    return run_scenario(get_preset("fig2"))


@pytest.fixture(scope="module")
def walk_dephased_run():
    config = replace(get_preset("fig5"), sweep_parameter=None, sweep_values=None)
    if PROFILE == "ci":
        config = replace(config, n_trajectories=24, n_drive_periods=6)
    return run_scenario(config)


@pytest.fixture(scope="module")
def dirac_dephased_runs():
    base = get_preset("fig6")
    results = {}
    for kappa in (0.0, 20.0, 100.0):
        config = replace(base, kappa_per_s=kappa,
                         n_trajectories=(1 if kappa == 0.0 else 100),
                         record_densities=False)
        results[kappa] = run_scenario(config)
    return results


@pytest.fixture(scope="module")
def spin_decay_run():
    # bare spin in a flat potential: no lattice, no drive, no pulses, so the
    # coherence decay is governed by the dephasing jumps alone
    config = ScenarioConfig(
        kind="walk_dephasing", name="spin_decay_oracle", v0=0.0,
        n_points=256, n_periods=32, sigma_lambda=0.5, spin="balanced",
        drive_kind="sin", drive_amplitude=0.0, n_drive_periods=1,
        theta=0.0, pulse_every_periods=0, kappa_per_s=100.0,
        n_trajectories=100, steps_per_period=256, samples_per_period=64,
        record_densities=False)
    return run_scenario(config)


# ---------------------------------------------------------------------------
# discrete-map and band-structure oracles


def test_walk_map_matches_dense_unitary():
    theta = 0.5 * math.pi
    n_steps = 20
    state = make_walk_state(n_steps, spin="down")
    final, _, _ = walk_run(state, theta, n_steps)
    u = walk_unitary_dense(state.amplitudes.shape[0], theta)
    vec = state.amplitudes.reshape(-1)
    for _ in range(n_steps):
        vec = u @ vec
    assert np.max(np.abs(final.amplitudes.reshape(-1) - vec)) < 1e-12


@pytest.mark.parametrize("v0", [1.0, 5.0])
def test_band_energies_survive_resolution_doubling(v0):
    base = compute_band_structure(v0, n_bands=5, n_kappa=64)
    dense = compute_band_structure(v0, n_bands=5, n_kappa=128,
                                   n_waves=2 * base.n_waves + 1)
    # the coarse quasimomentum grid is every second point of the fine one
    assert np.max(np.abs(dense.energies[:, ::2] - base.energies)) < 1e-8


def test_gauge_drive_matches_tilted_potential():
    f0 = acceleration_to_force(PhysicalParams(), BLOCH_ACCEL_SI)
    assert f0 == pytest.approx(STATIC_FORCE, rel=1e-12)
    t_bloch = 2.0 / f0
    dt = t_bloch / 2048
    # both routes need the 256-period box: the oscillation spans ~43 lengths
    # and either route drifts by a few percent on anything smaller
    grid = make_grid(2048, 256)
    lattice = lattice_potential(grid, 1.0)
    law = ForceLaw("static", f0)
    gauge = run_protocol(
        prepare_bloch_gaussian(grid, 1.0, sigma_lambda=1.5, spin="down"),
        [DriveSegment(duration=t_bloch / 32, force_up=law, force_down=law)] * 32,
        dt, potential=lattice, sample_every=64, take_snapshots=False)
    direct = run_protocol(
        prepare_bloch_gaussian(grid, 1.0, sigma_lambda=1.5, spin="down"),
        [DriveSegment(duration=t_bloch / 32)] * 32,
        dt, potential=lattice + f0 * grid.x, sample_every=64,
        take_snapshots=False)
    x_gauge = gauge.series.x_mean
    x_direct = direct.series.x_mean
    swing = x_direct.max() - x_direct.min()
    assert swing > 10.0
    assert np.max(np.abs(x_gauge - x_direct)) < 0.01 * swing


# ---------------------------------------------------------------------------
# unitarity and reversibility


def test_forward_backward_round_trip_recovers_initial_state():
    resolved = resolve(replace(get_preset("fig2"), n_drive_periods=2))
    initial = build_initial(resolved)
    forward = run_protocol(initial, resolved.timeline, resolved.dt,
                           potential=resolved.potential,
                           sample_every=resolved.sample_every,
                           take_snapshots=False)
    back = run_protocol_reversed(forward.state, resolved.timeline, resolved.dt,
                                 forward.gauge, potential=resolved.potential)
    assert np.max(np.abs(back.psi - initial.psi)) < 1e-10


def test_deterministic_presets_conserve_norm(bloch_run, transport_run,
                                             dirac_runs, klein_runs,
                                             walk_reference_run):
    runs = [bloch_run, transport_run, walk_reference_run,
            *dirac_runs.values(), *klein_runs.values()]
    for result in runs:
        drift = np.max(np.abs(result.series.norm - 1.0))
        assert drift < 1e-10, f"{result.config.name}: norm drift {drift:.2e}"


# ---------------------------------------------------------------------------
# static tilt: Bloch oscillation period and amplitude


def test_bloch_oscillation_period_and_amplitude(bloch_run):
    t = bloch_run.series.t
    x = bloch_run.series.x_mean
    t_bloch = bloch_run.derived["bloch_period_dimless"]

    peaks, _ = find_peaks(x)
    assert len(peaks) >= 2
    separation = t[peaks[1]] - t[peaks[0]]
    assert separation == pytest.approx(t_bloch, rel=0.05)

    delta = compute_band_structure(1.0).delta
    assert delta == pytest.approx(DELTA_V0_1, rel=1e-9)
    f0 = abs(bloch_run.derived["force_amplitude_dimless"])
    assert x.max() - x.min() == pytest.approx(delta / f0, rel=0.10)

    # scale check against the published period is reported, never asserted
    period_ms = bloch_run.derived["bloch_period_ms"]
    print(f"computed Bloch period {period_ms:.3f} ms; "
          f"ratio to the reported {REPORTED_BLOCH_PERIOD_MS} ms: "
          f"{period_ms / REPORTED_BLOCH_PERIOD_MS:.4f}")


# ---------------------------------------------------------------------------
# ac drive: directed transport under the Bessel velocity bound


def test_transport_velocity_positive_and_below_bound(transport_run):
    t = transport_run.series.t
    x = transport_run.series.x_mean
    v_mean = (x[-1] - x[0]) / (t[-1] - t[0])

    period = transport_run.derived["drive_period_dimless"]
    f1 = abs(transport_run.derived["force_amplitude_dimless"])
    bound = transport_velocity_bound(math.pi, compute_band_structure(1.0).delta,
                                     f1, 2.0 * math.pi / period)
    assert bound == pytest.approx(TRANSPORT_BOUND, rel=1e-9)
    assert v_mean > 0.0
    assert v_mean <= 0.95 * bound


# ---------------------------------------------------------------------------
# pulsed deep lattice: trembling motion of the packet centre


def test_trembling_period_halves_when_pulse_angle_doubles(dirac_runs):
    periods = {}
    for name, result in dirac_runs.items():
        t = result.series.t
        x = result.series.x_mean
        extrema = oscillation_extrema_times(t, x)
        assert len(extrema) >= 3, f"{name}: only {len(extrema)} extrema"
        periods[name] = 2.0 * float(np.mean(np.diff(extrema)))
    ratio = periods["fig3_theta02pi"] / periods["fig3_theta01pi"]
    assert 0.4 <= ratio <= 0.6


# ---------------------------------------------------------------------------
# potential step: transmission resonance and discrete-map agreement


def test_step_transmission_peaks_at_intermediate_height(klein_runs):
    final = {vs: run.series.x_mean[-1] for vs, run in klein_runs.items()}
    assert final[0.015] > final[0.0]
    assert final[0.015] > final[0.1]
    assert final[0.1] < final[0.0]


def test_discrete_map_tracks_full_runs_until_the_step_dominates(klein_runs):
    for vs, run in klein_runs.items():
        x_full = run.series.x_mean
        assert len(x_full) == len(run.map_x_mean)
        traveled = np.max(np.abs(x_full - x_full[0]))
        mismatch = abs(x_full[-1] - run.map_x_mean[-1])
        ratio = mismatch / traveled
        if vs <= 0.02:
            assert ratio <= 0.15, f"v_step={vs}: map deviates {ratio:.3f}"
        else:
            # at a tall step the map has no tunneling channel and must fail
            assert ratio > 0.30, f"v_step={vs}: map agrees unexpectedly"


# ---------------------------------------------------------------------------
# dephasing: spreading exponent crossover of the driven walk


def test_walk_spreading_exponent_crossover(walk_reference_run,
                                           walk_dephased_run):
    period = walk_reference_run.derived["drive_period_dimless"]
    t_min = 3.0 * period
    alpha_ref, _ = fit_diffusion_exponent(walk_reference_run.series.t,
                                          walk_reference_run.series.x_std,
                                          t_min)
    alpha_deph, _ = fit_diffusion_exponent(walk_dephased_run.ensemble.t,
                                           walk_dephased_run.ensemble.x_std,
                                           t_min)
    assert 0.84 <= alpha_ref <= 1.00
    if PROFILE == "full":
        assert walk_dephased_run.config.n_trajectories == 100
        assert walk_dephased_run.derived["t_total_ms"] == pytest.approx(150.0)
        assert 0.49 <= alpha_deph <= 0.69
        assert alpha_ref - alpha_deph > 0.25
    else:
        assert alpha_ref - alpha_deph > 0.2


# ---------------------------------------------------------------------------
# dephasing: pure spin decoherence against the closed-form decay


def test_spin_coherence_decays_at_twice_the_jump_rate(spin_decay_run):
    ensemble = spin_decay_run.ensemble
    kappa = spin_decay_run.derived["kappa_dimless"]
    coherence = np.abs(ensemble.coherence)
    assert coherence[0] == pytest.approx(0.5, abs=1e-12)
    slope = np.polyfit(ensemble.t, np.log(coherence), 1)[0]
    fitted_rate = -slope / 2.0
    assert abs(fitted_rate - kappa) / kappa < 0.15


# ---------------------------------------------------------------------------
# dephasing: trembling motion fades into the incoherent background


def test_trembling_amplitude_fades_with_dephasing(dirac_dephased_runs):
    amps = {kappa: oscillation_amplitude(run.ensemble.x_mean)
            for kappa, run in dirac_dephased_runs.items()}
    assert amps[20.0] >= 0.25 * amps[0.0]
    assert amps[100.0] < 0.10 * amps[0.0]
    # jump unitaries are phase flips, so even dephased runs stay normalized
    for run in dirac_dephased_runs.values():
        assert np.max(np.abs(run.ensemble.norm - 1.0)) < 1e-10
