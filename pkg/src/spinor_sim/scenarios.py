"""Scenario assembly: named presets, drive timelines, runs, and sweeps.

A ScenarioConfig is a flat, JSON-serializable description of one numerical
experiment.  resolve() turns it into grid + timeline + derived scales,
run_scenario() executes it (single deterministic run, or an ensemble of
dephasing trajectories), run_sweep() repeats it along one parameter axis.
All physics lives in lattice/propagation/discrete/dephasing; this module
only orchestrates.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dephasing import (DephasingConfig, EnsembleResult, average_trajectories,
                        sample_jump_times, trajectory_rng)
from .discrete import DiracMapConfig, dirac_map_run
from .errors import ConfigurationError, NumericalError
from .lattice import (Grid, SpinorState, lattice_potential, make_grid,
                      prepare_bloch_gaussian)
from .observables import ObservableSeries
from .propagation import (DriveSegment, ForceLaw, Pulse, StepPotential,
                          measure_step_displacement, run_protocol)
from .units import (CS133_MASS_KG, PhysicalParams, acceleration_to_force,
                    rate_to_dimensionless)

log = logging.getLogger("spinor_sim")

KINDS = ("bloch", "transport", "walk", "dirac", "klein",
         "walk_dephasing", "dirac_dephasing")
ENSEMBLE_KINDS = {"walk_dephasing", "dirac_dephasing"}
STATIC_KINDS = {"bloch"}

SITE = math.pi                     # lattice period, units of 1/k0

# Reference acceleration of the Bloch presets; gradient amplitudes for the
# other presets are calibrated translations per period (see README):
# WALK_AMPLITUDE moves a component by 8.000 sites per period at v0 = 1,
# DIRAC_AMPLITUDE by 2.000 sites per period at v0 = 5, KLEIN_AMPLITUDE by
# 5.000 sites per period (integer counts keep the discrete-map comparisons
# meaningful; for KLEIN the quasimomentum then sweeps just to the zone edge,
# where the band is closest to linear).
BLOCH_ACCEL_SI = 0.42              # m/s^2
WALK_AMPLITUDE = 0.01178223        # dimensionless force amplitude
DIRAC_AMPLITUDE = 0.00536158
KLEIN_AMPLITUDE = 0.038383179


@dataclass(frozen=True)
class ScenarioConfig:
    """Flat description of one run.  Unset drive fields fail validation."""

    kind: str
    name: str = ""
    # physical setup
    atom_mass_kg: float = CS133_MASS_KG
    wavelength_m: float = 1064e-9
    v0: float = 1.0                      # lattice depth, recoil units
    # grid
    n_points: int = 4096
    n_periods: int = 256                 # lattice periods in the box
    # initial state
    sigma_lambda: float = 6.0            # envelope width, units of lambda
    kappa0: float = 0.0
    band_index: int = 0
    spin: str = "down"
    # drive: the force on the up component; exactly one amplitude field set
    drive_kind: str = "sin"              # static | sin | cos
    drive_accel_si: float | None = None  # signed, m/s^2
    drive_amplitude: float | None = None # signed, dimensionless
    spin_opposite_force: bool = True     # down component gets the negated law
    drive_period_s: float = 0.010
    n_drive_periods: int = 15
    n_bloch_periods: float = 3.0         # duration of static runs, in T_B
    # coupling pulses
    theta: float = 0.0                   # pulse angle, radians, in [0, pi]
    pulse_every_periods: int = 1         # 0 disables pulses
    # potential step
    v_step: float = 0.0                  # height, recoil units
    step_center_sites: float = 15.0
    step_width_sites: float = 2.0
    # dephasing ensemble
    kappa_per_s: float = 0.0
    n_trajectories: int = 1
    master_seed: int = 0
    # numerics and output granularity
    steps_per_period: int = 2048
    samples_per_period: int = 1
    snapshots_per_period: int = 1
    record_densities: bool = True
    # defaults for the sweep verb
    sweep_parameter: str | None = None
    sweep_values: tuple[float, ...] | None = None


# CLI override names -> config fields; shared by the sweep verb
PARAMETER_FIELDS = {
    "kappa": "kappa_per_s",
    "vs": "v_step",
    "theta": "theta",
    "v0": "v0",
    "sigma": "sigma_lambda",
}


def is_ensemble(config: ScenarioConfig) -> bool:
    return (config.kind in ENSEMBLE_KINDS or config.kappa_per_s > 0.0
            or config.n_trajectories > 1)


def validate_config(config: ScenarioConfig) -> None:
    """Raise ConfigurationError listing every problem at once."""
    problems = []
    if config.kind not in KINDS:
        problems.append(f"unknown kind {config.kind!r}; expected one of {KINDS}")
    if config.v0 < 0:
        problems.append(f"v0 must be >= 0, got {config.v0}")
    if config.n_points < 8 or config.n_points & (config.n_points - 1):
        problems.append(f"n_points must be a power of two >= 8, got {config.n_points}")
    if config.n_periods < 1:
        problems.append(f"n_periods must be >= 1, got {config.n_periods}")
    if config.sigma_lambda <= 0:
        problems.append(f"sigma must be positive, got {config.sigma_lambda}")
    if not -1.0 <= config.kappa0 < 1.0:
        problems.append(f"kappa0 {config.kappa0} outside the zone [-1, 1)")
    if config.band_index < 0:
        problems.append("band_index must be >= 0")
    if config.drive_kind not in ("static", "sin", "cos"):
        problems.append(f"unknown drive_kind {config.drive_kind!r}")
    n_amp = (config.drive_accel_si is not None) + (config.drive_amplitude is not None)
    if n_amp != 1:
        problems.append("exactly one of drive_accel_si / drive_amplitude must be set")
    if config.drive_period_s <= 0:
        problems.append("drive_period_s must be positive")
    if config.kind in STATIC_KINDS:
        if config.drive_kind != "static":
            problems.append(f"kind {config.kind!r} needs drive_kind 'static'")
        if config.n_bloch_periods <= 0:
            problems.append("n_bloch_periods must be positive")
    else:
        if config.drive_kind == "static":
            problems.append(f"kind {config.kind!r} needs an ac drive_kind")
        if config.n_drive_periods < 1:
            problems.append("n_drive_periods must be >= 1")
    if not 0.0 <= config.theta <= math.pi:
        problems.append(f"theta must lie in [0, pi], got {config.theta}")
    if config.pulse_every_periods < 0:
        problems.append("pulse_every_periods must be >= 0")
    if config.v_step < 0:
        problems.append(f"v_step must be >= 0 (repulsive), got {config.v_step}")
    if config.v_step > 0 and config.kind not in ("klein",):
        problems.append("a potential step is only meaningful for kind 'klein'")
    if config.step_width_sites <= 0:
        problems.append("step_width_sites must be positive")
    if config.kappa_per_s < 0:
        problems.append(f"kappa must be >= 0, got {config.kappa_per_s}")
    if config.n_trajectories < 1:
        problems.append("n_trajectories must be >= 1")
    if config.steps_per_period < 1:
        problems.append("steps_per_period must be >= 1")
    for name in ("samples_per_period", "snapshots_per_period"):
        value = getattr(config, name)
        if value < 1:
            problems.append(f"{name} must be >= 1")
        elif config.steps_per_period % value:
            problems.append(f"{name} = {value} does not divide "
                            f"steps_per_period = {config.steps_per_period}")
    if config.kind in STATIC_KINDS:
        n_seg = config.n_bloch_periods * config.snapshots_per_period
        if abs(n_seg - round(n_seg)) > 1e-9:
            problems.append("n_bloch_periods * snapshots_per_period must be an integer")
    if config.sweep_parameter is not None and config.sweep_parameter not in PARAMETER_FIELDS:
        problems.append(f"unknown sweep_parameter {config.sweep_parameter!r}; "
                        f"expected one of {sorted(PARAMETER_FIELDS)}")
    if problems:
        raise ConfigurationError("; ".join(problems))


@dataclass
class ResolvedScenario:
    config: ScenarioConfig
    params: PhysicalParams
    grid: Grid
    potential: np.ndarray
    step: StepPotential | None
    timeline: list
    dt: float
    sample_every: int
    period: float                  # drive period, or T_B for static kinds
    t_total: float
    amplitude: float               # dimensionless force amplitude (up component)
    kappa_rate: float              # dimensionless dephasing rate
    derived: dict


def _build_timeline(config: ScenarioConfig, period: float,
                    f_up: ForceLaw, f_down: ForceLaw) -> list:
    snap = config.snapshots_per_period
    seg = DriveSegment(duration=period / snap, force_up=f_up, force_down=f_down)
    if config.kind in STATIC_KINDS:
        n_seg = round(config.n_bloch_periods * snap)
        return [seg] * n_seg
    timeline: list = []
    pulsed = config.pulse_every_periods > 0
    for p in range(config.n_drive_periods):
        timeline.extend([seg] * snap)
        if pulsed and (p + 1) % config.pulse_every_periods == 0:
            timeline.append(Pulse(config.theta))
    return timeline


def resolve(config: ScenarioConfig) -> ResolvedScenario:
    validate_config(config)
    params = PhysicalParams(atom_mass=config.atom_mass_kg,
                            wavelength=config.wavelength_m, v0=config.v0)
    grid = make_grid(config.n_points, config.n_periods)

    if config.drive_accel_si is not None:
        amplitude = acceleration_to_force(params, config.drive_accel_si)
    else:
        amplitude = float(config.drive_amplitude)

    if config.kind in STATIC_KINDS:
        if amplitude == 0.0:
            raise ConfigurationError("static runs need a nonzero force")
        period = 2.0 / abs(amplitude)          # Bloch period
        t_total = config.n_bloch_periods * period
        f_up = ForceLaw("static", amplitude)
    else:
        period = config.drive_period_s / params.time_unit
        t_total = config.n_drive_periods * period
        f_up = ForceLaw(config.drive_kind, amplitude, period)
    f_down = f_up.negated() if config.spin_opposite_force else f_up

    dt = period / config.steps_per_period
    sample_every = config.steps_per_period // config.samples_per_period

    potential = lattice_potential(grid, config.v0)
    step = None
    if config.v_step > 0.0:
        step = StepPotential(height=config.v_step,
                             center=config.step_center_sites * SITE,
                             width=config.step_width_sites * SITE)
        potential = potential + step.profile(grid.x)

    kappa_rate = rate_to_dimensionless(params, config.kappa_per_s)
    if is_ensemble(config):
        # reuse the ensemble validation (rate/count bounds)
        DephasingConfig(rate=kappa_rate, n_trajectories=config.n_trajectories,
                        master_seed=config.master_seed)

    timeline = _build_timeline(config, period, f_up, f_down)

    derived = {
        "time_unit_ms": params.time_unit * 1e3,
        "recoil_energy_J": params.recoil_energy,
        "k0_per_m": params.k0,
        "dt_dimless": dt,
        "t_total_dimless": t_total,
        "t_total_ms": t_total * params.time_unit * 1e3,
        "force_amplitude_dimless": amplitude,
        "kappa_dimless": kappa_rate,
    }
    if config.kind in STATIC_KINDS:
        derived["bloch_period_dimless"] = period
        derived["bloch_period_ms"] = period * params.time_unit * 1e3
    else:
        derived["drive_period_dimless"] = period

    return ResolvedScenario(config=config, params=params, grid=grid,
                            potential=potential, step=step, timeline=timeline,
                            dt=dt, sample_every=sample_every, period=period,
                            t_total=t_total, amplitude=amplitude,
                            kappa_rate=kappa_rate, derived=derived)


def build_initial(resolved: ResolvedScenario) -> SpinorState:
    c = resolved.config
    return prepare_bloch_gaussian(resolved.grid, c.v0, band_index=c.band_index,
                                  kappa0=c.kappa0, sigma_lambda=c.sigma_lambda,
                                  spin=c.spin)


@dataclass
class SnapshotStats:
    """Trajectory-averaged densities on the snapshot time grid."""

    times: np.ndarray
    mean_up: np.ndarray           # (n_snapshots, n_points)
    mean_down: np.ndarray
    stderr_total: np.ndarray


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    params: PhysicalParams
    grid: Grid
    derived: dict
    series: ObservableSeries | None = None          # deterministic runs
    ensemble: EnsembleResult | None = None          # dephasing ensembles
    snapshots: list | None = None                   # [(t, rho_up, rho_down)]
    snapshot_stats: SnapshotStats | None = None
    map_times: np.ndarray | None = None             # klein companion
    map_x_mean: np.ndarray | None = None
    map_x_std: np.ndarray | None = None
    d_step: float | None = None

    @property
    def x_mean_final(self) -> float:
        if self.series is not None:
            return float(self.series.x_mean[-1])
        return float(self.ensemble.x_mean[-1])

    @property
    def x_std_final(self) -> float:
        if self.series is not None:
            return float(self.series.x_std[-1])
        return float(self.ensemble.x_std[-1])

    @property
    def times(self) -> np.ndarray:
        if self.series is not None:
            return self.series.t
        return self.ensemble.t


def _calibrate_d_step(resolved: ResolvedScenario) -> float:
    """Measured translation per drive period, step potential excluded."""
    c = resolved.config
    probe = prepare_bloch_gaussian(resolved.grid, c.v0, band_index=c.band_index,
                                   kappa0=c.kappa0, sigma_lambda=c.sigma_lambda,
                                   spin="balanced")
    amplitude = resolved.amplitude
    f_up = ForceLaw(c.drive_kind, amplitude, resolved.period)
    segment = DriveSegment(duration=resolved.period, force_up=f_up,
                           force_down=f_up.negated())
    lattice_only = lattice_potential(resolved.grid, c.v0)
    return measure_step_displacement(probe, segment, resolved.dt,
                                     potential=lattice_only)


def _run_deterministic(resolved: ResolvedScenario, initial: SpinorState,
                       jump_times=()) -> ScenarioResult:
    c = resolved.config
    res = run_protocol(initial, resolved.timeline, resolved.dt,
                       potential=resolved.potential,
                       sample_every=resolved.sample_every,
                       jump_times=jump_times,
                       take_snapshots=c.record_densities)
    out = ScenarioResult(config=c, params=resolved.params, grid=resolved.grid,
                         derived=dict(resolved.derived), series=res.series,
                         snapshots=res.snapshots if c.record_densities else None)
    if c.kind == "klein":
        d_step = _calibrate_d_step(resolved)
        map_config = DiracMapConfig(d_step=d_step, theta=c.theta,
                                    period=resolved.period,
                                    step_potential=resolved.step)
        _, times, means, stds = dirac_map_run(initial, map_config,
                                              c.n_drive_periods)
        out.map_times, out.map_x_mean, out.map_x_std = times, means, stds
        out.d_step = d_step
        out.derived["d_step_dimless"] = d_step
        out.derived["d_step_sites"] = d_step / SITE
    return out


def _trajectory_worker(payload):
    config, jumps = payload
    resolved = resolve(config)
    initial = build_initial(resolved)
    res = run_protocol(initial, resolved.timeline, resolved.dt,
                       potential=resolved.potential,
                       sample_every=resolved.sample_every,
                       jump_times=jumps,
                       take_snapshots=config.record_densities)
    return res.series, res.snapshots


def _run_ensemble(resolved: ResolvedScenario, threads: int) -> ScenarioResult:
    c = resolved.config
    n = c.n_trajectories
    jump_lists = [tuple(sample_jump_times(trajectory_rng(c.master_seed, i),
                                          resolved.kappa_rate, resolved.t_total))
                  for i in range(n)]
    payloads = [(c, jumps) for jumps in jump_lists]

    if threads > 1:
        pool = ProcessPoolExecutor(max_workers=min(threads, n))
        iterator = pool.map(_trajectory_worker, payloads)
    else:
        pool = None
        iterator = map(_trajectory_worker, payloads)

    series_list = []
    snap_times = None
    sum_up = sum_down = sum_tot = sumsq_tot = None
    try:
        for i, (series, snaps) in enumerate(iterator):
            series_list.append(series)
            if c.record_densities:
                if snap_times is None:
                    snap_times = np.array([s[0] for s in snaps])
                    shape = (len(snaps), resolved.grid.n_points)
                    sum_up = np.zeros(shape)
                    sum_down = np.zeros(shape)
                    sum_tot = np.zeros(shape)
                    sumsq_tot = np.zeros(shape)
                for j, (_, rho_up, rho_down) in enumerate(snaps):
                    sum_up[j] += rho_up
                    sum_down[j] += rho_down
                    tot = rho_up + rho_down
                    sum_tot[j] += tot
                    sumsq_tot[j] += tot * tot
            if (i + 1) % 10 == 0 or i + 1 == n:
                log.info("scenario %s: %d/%d trajectories done",
                         c.name or c.kind, i + 1, n)
    finally:
        if pool is not None:
            pool.shutdown()

    ensemble = average_trajectories(series_list)
    stats = None
    if c.record_densities:
        mean_tot = sum_tot / n
        if n > 1:
            var = np.maximum(sumsq_tot - n * mean_tot ** 2, 0.0) / (n - 1)
            stderr = np.sqrt(var / n)
        else:
            stderr = np.zeros_like(mean_tot)
        stats = SnapshotStats(times=snap_times, mean_up=sum_up / n,
                              mean_down=sum_down / n, stderr_total=stderr)
    return ScenarioResult(config=c, params=resolved.params, grid=resolved.grid,
                          derived=dict(resolved.derived), ensemble=ensemble,
                          snapshot_stats=stats)


def run_scenario(config: ScenarioConfig, threads: int = 1) -> ScenarioResult:
    """Execute one scenario; deterministic unless dephasing is active."""
    resolved = resolve(config)
    if is_ensemble(config):
        return _run_ensemble(resolved, threads)
    initial = build_initial(resolved)
    return _run_deterministic(resolved, initial)


# ---------------------------------------------------------------------------
# sweeps

@dataclass
class SweepMember:
    value: float
    config: ScenarioConfig
    result: ScenarioResult | None
    error: str | None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class SweepResult:
    parameter: str
    members: list[SweepMember]


def default_sweep(config: ScenarioConfig) -> tuple[str, tuple[float, ...]]:
    if config.sweep_parameter is not None and config.sweep_values:
        return config.sweep_parameter, tuple(config.sweep_values)
    if config.kind == "klein":
        return "vs", tuple(np.linspace(0.0, 0.1, 11).round(12))
    if is_ensemble(config):
        return "kappa", (0.0, 20.0, 40.0, 60.0, 80.0, 100.0)
    raise ConfigurationError(
        "no sweep axis: set sweep_parameter/sweep_values or pass explicit values")


def _member_config(config: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    field_name = PARAMETER_FIELDS[parameter]
    base = config.name or config.kind
    return replace(config, **{field_name: float(value)},
                   name=f"{base}_{parameter}{value:g}",
                   sweep_parameter=None, sweep_values=None)


def _sweep_worker(config: ScenarioConfig) -> ScenarioResult:
    return run_scenario(config, threads=1)


def run_sweep(config: ScenarioConfig, parameter: str | None = None,
              values=None, threads: int = 1) -> SweepResult:
    """One run per value of a single parameter; failures mark their member.

    Deterministic members run concurrently across the pool; ensemble members
    run one at a time with trajectory-level concurrency instead.
    """
    if parameter is None and values is None:
        parameter, values = default_sweep(config)
    if parameter is None or values is None:
        raise ConfigurationError("sweep needs both a parameter and its values")
    if parameter not in PARAMETER_FIELDS:
        raise ConfigurationError(f"unknown sweep parameter {parameter!r}; "
                                 f"expected one of {sorted(PARAMETER_FIELDS)}")
    values = [float(v) for v in values]
    if not values:
        raise ConfigurationError("sweep needs at least one value")

    configs = [_member_config(config, parameter, v) for v in values]
    members = [SweepMember(value=v, config=cfg, result=None, error=None)
               for v, cfg in zip(values, configs)]

    ensemble_members = any(is_ensemble(cfg) for cfg in configs)
    if threads > 1 and not ensemble_members:
        with ProcessPoolExecutor(max_workers=min(threads, len(configs))) as pool:
            futures = [pool.submit(_sweep_worker, cfg) for cfg in configs]
            for member, fut in zip(members, futures):
                try:
                    member.result = fut.result()
                except (ConfigurationError, NumericalError) as exc:
                    member.error = str(exc)
                log.info("sweep %s=%g: %s", parameter, member.value,
                         member.error or "done")
    else:
        for member in members:
            try:
                member.result = run_scenario(member.config, threads=threads)
            except (ConfigurationError, NumericalError) as exc:
                member.error = str(exc)
            log.info("sweep %s=%g: %s", parameter, member.value,
                     member.error or "done")
    return SweepResult(parameter=parameter, members=members)


# ---------------------------------------------------------------------------
# presets

def _fig3_config(theta: float, name: str) -> ScenarioConfig:
    return ScenarioConfig(kind="dirac", name=name, v0=5.0,
                          n_points=4096, n_periods=384, sigma_lambda=10.0,
                          spin="down", drive_kind="sin",
                          drive_amplitude=-DIRAC_AMPLITUDE,
                          n_drive_periods=40, theta=theta)


def _fig4_config(v_step: float, name: str) -> ScenarioConfig:
    return ScenarioConfig(kind="klein", name=name, v0=5.0,
                          n_points=4096, n_periods=384, sigma_lambda=10.0,
                          spin="up", drive_kind="sin",
                          drive_amplitude=-KLEIN_AMPLITUDE,
                          n_drive_periods=15, theta=0.1 * math.pi,
                          v_step=v_step, step_center_sites=15.0,
                          step_width_sites=2.0)


# the shallow walk lattice is step-converged well below the deep-lattice
# default; 512 keeps the 100-trajectory ensembles affordable
_WALK = ScenarioConfig(kind="walk", name="fig2", v0=1.0,
                       n_points=4096, n_periods=512, sigma_lambda=3.0,
                       spin="down", drive_kind="sin",
                       drive_amplitude=-WALK_AMPLITUDE,
                       n_drive_periods=15, theta=0.5 * math.pi,
                       steps_per_period=512, samples_per_period=4)

PRESETS: dict[str, ScenarioConfig] = {
    "fig1a": ScenarioConfig(kind="bloch", name="fig1a", v0=1.0,
                            n_points=4096, n_periods=256, sigma_lambda=6.0,
                            spin="down", drive_kind="static",
                            drive_accel_si=BLOCH_ACCEL_SI,
                            spin_opposite_force=False,
                            n_bloch_periods=3.0, pulse_every_periods=0,
                            samples_per_period=128, snapshots_per_period=16),
    "fig1b": ScenarioConfig(kind="transport", name="fig1b", v0=1.0,
                            n_points=8192, n_periods=1024, sigma_lambda=6.0,
                            spin="down", drive_kind="sin",
                            drive_accel_si=-BLOCH_ACCEL_SI,
                            spin_opposite_force=False,
                            n_drive_periods=15, pulse_every_periods=0,
                            samples_per_period=16, snapshots_per_period=4),
    "fig2": _WALK,
    "fig3_theta0": _fig3_config(0.0, "fig3_theta0"),
    "fig3_theta005pi": _fig3_config(0.05 * math.pi, "fig3_theta005pi"),
    "fig3_theta01pi": _fig3_config(0.1 * math.pi, "fig3_theta01pi"),
    "fig3_theta02pi": _fig3_config(0.2 * math.pi, "fig3_theta02pi"),
    "fig4a": _fig4_config(0.0, "fig4a"),
    "fig4b": _fig4_config(0.015, "fig4b"),
    "fig4c": _fig4_config(0.1, "fig4c"),
    "fig4d": replace(_fig4_config(0.015, "fig4d"), sweep_parameter="vs",
                     sweep_values=tuple(np.linspace(0.0, 0.1, 11).round(12))),
    "fig5": replace(_WALK, kind="walk_dephasing", name="fig5",
                    kappa_per_s=100.0, n_trajectories=100,
                    sweep_parameter="kappa",
                    sweep_values=(0.0, 20.0, 40.0, 60.0, 80.0, 100.0)),
    "fig6": replace(_fig3_config(0.2 * math.pi, "fig6"),
                    kind="dirac_dephasing", n_drive_periods=15,
                    kappa_per_s=20.0, n_trajectories=100,
                    sweep_parameter="kappa", sweep_values=(0.0, 20.0, 100.0)),
}


def get_preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
