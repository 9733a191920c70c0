"""Discrete companions to the full simulation: coined walk on the integer line,
discrete relativistic map on the continuum grid, effective two-band dispersion,
and the analytic transport formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy.special import jv

from .errors import ConfigurationError, NumericalError
from .lattice import LATTICE_PERIOD, SpinorState
from .units import HBAR, PhysicalParams, from_dimensionless
from .propagation import StepPotential

_BOUNDARY_TOL = 1e-12


@dataclass
class WalkState:
    """Amplitudes over (site j, spin); sites run j_min..j_min+n-1."""

    amplitudes: np.ndarray     # complex (n_sites, 2); column 0 = up, 1 = down
    j_min: int

    @property
    def sites(self) -> np.ndarray:
        return self.j_min + np.arange(self.amplitudes.shape[0])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def make_walk_state(n_steps: int, j0: int = 0, spin: str = "down") -> WalkState:
    """Localized start with enough padding that n_steps never reaches the edge."""
    half = n_steps + 2
    n = 2 * half + 1
    amp = np.zeros((n, 2), dtype=complex)
    col = {"up": 0, "down": 1}.get(spin)
    if col is None:
        raise ConfigurationError(f"unknown spin {spin!r}")
    amp[half + j0, col] = 1.0
    return WalkState(amplitudes=amp, j_min=j0 - half)


def _walk_moments(amp: np.ndarray, sites: np.ndarray) -> tuple[float, float]:
    rho = np.sum(np.abs(amp) ** 2, axis=1)
    w = rho.sum()
    mean = float(np.sum(sites * rho) / w)
    var = float(np.sum(sites ** 2 * rho) / w) - mean ** 2
    return mean, math.sqrt(max(var, 0.0))


def walk_run(initial: WalkState, theta: float, n_steps: int):
    """Coined walk: shift (up -> j+1, down -> j-1) then coin exp(-i*theta*sigma_x/2).

    Returns (final WalkState, mean array, std array) with per-step moments
    including step 0.
    """
    if n_steps < 0:
        raise ConfigurationError("n_steps must be >= 0")
    amp = initial.amplitudes.copy()
    sites = initial.sites
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    means = np.empty(n_steps + 1)
    stds = np.empty(n_steps + 1)
    means[0], stds[0] = _walk_moments(amp, sites)
    for n in range(1, n_steps + 1):
        if abs(amp[-1, 0]) > _BOUNDARY_TOL or abs(amp[0, 1]) > _BOUNDARY_TOL:
            raise ConfigurationError(
                f"walk amplitude reached the lattice boundary at step {n}; enlarge the segment"
            )
        up = np.zeros_like(amp[:, 0])
        down = np.zeros_like(amp[:, 1])
        up[1:] = amp[:-1, 0]      # up shifts to j+1
        down[:-1] = amp[1:, 1]    # down shifts to j-1
        amp[:, 0] = c * up - 1j * s * down
        amp[:, 1] = -1j * s * up + c * down
        means[n], stds[n] = _walk_moments(amp, sites)
    return WalkState(amplitudes=amp, j_min=initial.j_min), means, stds


def walk_unitary_dense(n_sites: int, theta: float) -> np.ndarray:
    """Dense matrix of one walk step on a fixed open segment (oracle helper).

    Basis index = 2*j + spin (spin 0 = up, 1 = down); amplitudes shifted past
    the edge are dropped, so this matches walk_run only while the walker stays
    inside the segment.
    """
    dim = 2 * n_sites
    u_shift = np.zeros((dim, dim))
    for j in range(n_sites):
        if j + 1 < n_sites:
            u_shift[2 * (j + 1) + 0, 2 * j + 0] = 1.0
        if j - 1 >= 0:
            u_shift[2 * (j - 1) + 1, 2 * j + 1] = 1.0
    c = math.cos(0.5 * theta)
    s = math.sin(0.5 * theta)
    coin2 = np.array([[c, -1j * s], [-1j * s, c]])
    u_coin = np.kron(np.eye(n_sites), coin2)
    return u_coin @ u_shift


@dataclass(frozen=True)
class DiracMapConfig:
    """Per-period data of the discrete relativistic map U3*U2*U1."""

    d_step: float                    # translation per period, units 1/k0
    theta: float                     # coin angle, radians
    period: float                    # drive period, dimensionless time
    step_potential: StepPotential | None = None

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigurationError(f"theta must lie in [0, pi], got {self.theta}")
        if not self.period > 0:
            raise ConfigurationError("period must be positive")


def dirac_map_run(initial: SpinorState, config: DiracMapConfig, n_steps: int):
    """Apply U3*U2*U1 per period on the continuum grid.

    U1 translates the components by +-d_step via spectral phases, U2 is the
    bare coin, U3 the accumulated step-potential phase exp(-i*V_step(x)*T).
    Returns (final state, ObservableSeries-like dict of per-step moments).
    """
    if n_steps < 0:
        raise ConfigurationError("n_steps must be >= 0")
    grid = initial.grid
    psi = initial.psi.copy()
    shift = np.exp(-1j * grid.k * config.d_step)
    trans = np.vstack([shift, np.conj(shift)])
    c = math.cos(0.5 * config.theta)
    s = math.sin(0.5 * config.theta)
    if config.step_potential is not None:
        u3 = np.exp(-1j * config.step_potential.profile(grid.x) * config.period)
    else:
        u3 = None

    times = np.arange(n_steps + 1) * config.period
    means = np.empty(n_steps + 1)
    stds = np.empty(n_steps + 1)

    def record(i):
        rho = np.abs(psi[0]) ** 2 + np.abs(psi[1]) ** 2
        w = rho.sum() * grid.dx
        mean = float(np.sum(grid.x * rho) * grid.dx / w)
        x2 = float(np.sum(grid.x ** 2 * rho) * grid.dx / w)
        means[i] = mean
        stds[i] = math.sqrt(max(x2 - mean ** 2, 0.0))

    record(0)
    for n in range(1, n_steps + 1):
        buf = sfft.fft(psi, axis=1)
        buf *= trans
        psi = sfft.ifft(buf, axis=1)
        if config.theta != 0.0:
            up = c * psi[0] - 1j * s * psi[1]
            psi[1] = -1j * s * psi[0] + c * psi[1]
            psi[0] = up
        if u3 is not None:
            psi *= u3
        record(n)
        if not math.isfinite(means[n]):
            raise NumericalError(f"non-finite moment in map run at step {n}")
    final = SpinorState(psi=psi, grid=grid)
    return final, times, means, stds


@dataclass(frozen=True)
class DiracSpectrum:
    e_plus: float                # per-step phase units
    e_minus: float
    zitter_frequency: float      # (E+ - E-)/period, dimensionless rate
    effective_mass: float        # theta / (2 d)


def effective_dirac_spectrum(p: float, config: DiracMapConfig) -> DiracSpectrum:
    """Two-branch dispersion of H_eff = d*p*sigma_z + (theta/2)*sigma_x."""
    e = math.sqrt((config.d_step * p) ** 2 + 0.25 * config.theta ** 2)
    mass = math.inf if config.d_step == 0.0 else config.theta / (2.0 * abs(config.d_step))
    return DiracSpectrum(e_plus=e, e_minus=-e,
                         zitter_frequency=2.0 * e / config.period,
                         effective_mass=mass)


def transport_velocity_bound(d_latt: float, delta: float, f1: float,
                             omega: float, n: int = 0) -> float:
    """Upper bound (d*Delta/2) * J_n(d*F1/omega) on the mean ac-transport velocity.

    All quantities dimensionless (hbar = 1); d_latt is the lattice period.
    n = 0 is pure ac driving.
    """
    if not omega > 0:
        raise ConfigurationError("omega must be positive")
    return float(d_latt * delta / 2.0 * jv(n, d_latt * f1 / omega))


@dataclass(frozen=True)
class BlochScales:
    t_b: float            # dimensionless Bloch period
    t_b_si: float         # seconds
    d_max: float          # dimensionless peak-to-peak displacement Delta/F0
    d_max_si: float       # meters


def bloch_scales(params: PhysicalParams, f0: float, delta: float) -> BlochScales:
    """Bloch period T_B = 4*pi*hbar/(lambda*F0) and displacement Delta/F0.

    f0 and delta are dimensionless (force, energy); SI forms derived from params.
    """
    if f0 == 0.0:
        raise ConfigurationError("Bloch scales are undefined at zero force")
    t_b = 2.0 / abs(f0)    # = 4*pi*hbar/(lambda*F0) in lattice units
    d_max = delta / abs(f0)
    f0_si = from_dimensionless(params, abs(f0), "force")
    t_b_si = 4.0 * math.pi * HBAR / (params.wavelength * f0_si)
    return BlochScales(t_b=t_b, t_b_si=t_b_si, d_max=d_max,
                       d_max_si=from_dimensionless(params, d_max, "length"))


LATTICE_PERIOD_DIMLESS = LATTICE_PERIOD
