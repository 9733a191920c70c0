"""Spatial grid, cos^2-lattice band structure, and Bloch-Gaussian state prep.

Everything in lattice units: the lattice potential is V0*cos^2(x) with period
pi, the Brillouin zone is kappa in [-1, 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigurationError, NumericalError

LATTICE_PERIOD = np.pi          # lambda/2 in units of 1/k0
LAMBDA = 2.0 * np.pi            # lattice wavelength in units of 1/k0

DEFAULT_N_WAVES = 41            # plane waves -40..40 k0 in steps of 2 k0
GAUSSIAN_TAIL_LIMIT = 1e-8      # max envelope amplitude allowed at the box edge


@dataclass(frozen=True)
class Grid:
    """Uniform periodic position grid with its conjugate momentum grid."""

    n_points: int
    n_periods: int
    x: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)
    dx: float
    x_min: float
    x_max: float

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length


def make_grid(n_points: int, n_periods: int) -> Grid:
    """Build a grid spanning an integer number of lattice periods around 0."""
    if n_points < 4 or (n_points & (n_points - 1)) != 0:
        raise ConfigurationError(f"n_points must be a power of two >= 4, got {n_points}")
    if n_periods < 1:
        raise ConfigurationError(f"n_periods must be >= 1, got {n_periods}")
    length = n_periods * LATTICE_PERIOD
    dx = length / n_points
    x = -0.5 * length + dx * np.arange(n_points)
    k = 2.0 * np.pi * np.fft.fftfreq(n_points, d=dx)
    return Grid(n_points=n_points, n_periods=n_periods, x=x, k=k,
                dx=dx, x_min=-0.5 * length, x_max=0.5 * length)


def lattice_potential(grid: Grid, v0: float) -> np.ndarray:
    return v0 * np.cos(grid.x) ** 2


@dataclass
class SpinorState:
    """Two-component wavefunction on a grid; norm convention sum|psi|^2 dx = 1."""

    psi: np.ndarray          # complex, shape (2, n_points); row 0 = up, row 1 = down
    grid: Grid

    @property
    def psi_up(self) -> np.ndarray:
        return self.psi[0]

    @property
    def psi_down(self) -> np.ndarray:
        return self.psi[1]

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)

    def copy(self) -> "SpinorState":
        return SpinorState(psi=self.psi.copy(), grid=self.grid)


# ---------------------------------------------------------------------------
# Band structure


@dataclass
class BandStructure:
    kappas: np.ndarray            # quasimomenta in [-1, 1)
    energies: np.ndarray          # (n_bands, n_kappa), ascending per kappa, units E_R
    coefficients: np.ndarray      # (n_bands, n_kappa, n_waves) plane-wave amplitudes
    m_indices: np.ndarray         # plane-wave integers m; momentum = kappa + 2*m
    n_waves: int
    delta: float                  # ground-band width max E_0 - min E_0


def _bloch_eig(kappa: float, v0: float, n_waves: int):
    """Diagonalize the Bloch Hamiltonian in the plane-wave basis e^{i(kappa+2m)x}.

    V0 cos^2 x = V0/2 + (V0/4)(e^{2ix} + e^{-2ix}) gives a real tridiagonal matrix.
    """
    half = n_waves // 2
    m = np.arange(-half, half + 1)
    diag = (kappa + 2.0 * m) ** 2 + v0 / 2.0
    off = np.full(n_waves - 1, v0 / 4.0)
    energies, vectors = eigh_tridiagonal(diag, off)
    return energies, vectors, m


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    # deterministic sign: largest-magnitude coefficient made real positive
    i = int(np.argmax(np.abs(vec)))
    if vec[i] < 0:
        return -vec
    return vec


def resolve_truncation(v0: float, start: int = DEFAULT_N_WAVES,
                       tol: float = 1e-10, max_waves: int = 201) -> int:
    """Smallest odd basis size (>= start) at which adding ~5 more plane waves
    moves E_0 by less than tol, checked at the zone center and edge."""
    n = start if start % 2 == 1 else start + 1
    while n <= max_waves:
        converged = True
        for kappa in (0.0, -1.0):
            e_here = _bloch_eig(kappa, v0, n)[0][0]
            e_more = _bloch_eig(kappa, v0, n + 6)[0][0]
            if abs(e_here - e_more) >= tol:
                converged = False
                break
        if converged:
            return n
        n += 10
    raise NumericalError(
        f"plane-wave truncation did not converge below {tol} by {max_waves} waves "
        f"at V0 = {v0}"
    )


def compute_band_structure(v0: float, n_bands: int = 5, n_kappa: int = 64,
                           n_waves: int | None = None) -> BandStructure:
    """Band energies and Bloch coefficients over the first Brillouin zone.

    The kappa grid is uniform on [-1, 1) and contains both the zone center and
    the edge, so the ground-band width delta = max - min is exact on the grid.
    """
    if n_bands < 1:
        raise ConfigurationError(f"n_bands must be >= 1, got {n_bands}")
    if n_kappa < 3:
        raise ConfigurationError(f"n_kappa must be >= 3, got {n_kappa}")
    if v0 < 0:
        raise ConfigurationError(f"v0 must be >= 0, got {v0}")
    if n_waves is None:
        n_waves = resolve_truncation(v0)
    if n_bands > n_waves:
        raise ConfigurationError("n_bands exceeds plane-wave basis size")

    kappas = -1.0 + 2.0 * np.arange(n_kappa) / n_kappa
    energies = np.empty((n_bands, n_kappa))
    coeffs = np.empty((n_bands, n_kappa, n_waves))
    m = None
    for j, kappa in enumerate(kappas):
        e, vec, m = _bloch_eig(float(kappa), v0, n_waves)
        energies[:, j] = e[:n_bands]
        for b in range(n_bands):
            coeffs[b, j] = _fix_phase(vec[:, b])
    delta = float(energies[0].max() - energies[0].min())
    return BandStructure(kappas=kappas, energies=energies, coefficients=coeffs,
                         m_indices=m, n_waves=n_waves, delta=delta)


def bloch_coefficients(v0: float, kappa: float, band_index: int = 0,
                       n_waves: int | None = None):
    """Plane-wave coefficients of a single Bloch state (deterministic phase)."""
    if n_waves is None:
        n_waves = resolve_truncation(v0)
    e, vec, m = _bloch_eig(kappa, v0, n_waves)
    if band_index >= len(e):
        raise ConfigurationError(f"band_index {band_index} outside computed bands")
    return _fix_phase(vec[:, band_index]), m, float(e[band_index])


# ---------------------------------------------------------------------------
# Initial state


SPIN_WEIGHTS = {
    "up": (1.0, 0.0),
    "down": (0.0, 1.0),
    "balanced": (2.0 ** -0.5, 2.0 ** -0.5),
}


def prepare_bloch_gaussian(grid: Grid, v0: float, band_index: int = 0,
                           kappa0: float = 0.0, sigma_lambda: float = 6.0,
                           spin="down", center: float = 0.0) -> SpinorState:
    """Bloch state of (band_index, kappa0) times a Gaussian envelope.

    Envelope convention exp(-(x - center)^2 / 4 sigma^2), so sigma is the
    standard deviation of the density.  kappa0 is snapped to the box momentum
    lattice (2/n_periods in units of k0) so the state is exactly periodic.
    """
    if sigma_lambda <= 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma_lambda}")
    sigma = sigma_lambda * LAMBDA
    # the envelope tail must be negligible at the box edge
    edge = min(center - grid.x_min, grid.x_max - center)
    tail = np.exp(-edge ** 2 / (4.0 * sigma ** 2))
    if tail > GAUSSIAN_TAIL_LIMIT:
        raise ConfigurationError(
            f"grid too narrow for sigma = {sigma_lambda} lambda: envelope tail at "
            f"the box edge is {tail:.2e} (limit {GAUSSIAN_TAIL_LIMIT:.0e}); "
            "increase n_periods"
        )

    dk_box = 2.0 / grid.n_periods   # momentum quantum of the box, in k0
    kappa_snapped = round(kappa0 / dk_box) * dk_box
    if not -1.0 <= kappa_snapped < 1.0:
        raise ConfigurationError(f"kappa0 {kappa0} outside the Brillouin zone [-1, 1)")

    coeff, m, _ = bloch_coefficients(v0, kappa_snapped, band_index)
    momenta = kappa_snapped + 2.0 * m
    # Bloch function as a small plane-wave sum; coefficients decay fast
    chi = (coeff[:, None] * np.exp(1j * momenta[:, None] * grid.x[None, :])).sum(axis=0)
    envelope = np.exp(-((grid.x - center) ** 2) / (4.0 * sigma ** 2))
    packet = chi * envelope

    if isinstance(spin, str):
        try:
            w_up, w_down = SPIN_WEIGHTS[spin]
        except KeyError:
            raise ConfigurationError(
                f"unknown spin {spin!r}; expected one of {sorted(SPIN_WEIGHTS)} "
                "or a weight pair"
            ) from None
    else:
        w_up, w_down = spin

    psi = np.vstack([w_up * packet, w_down * packet]).astype(np.complex128)
    nrm = np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    if nrm == 0.0:
        raise ConfigurationError("spin weights are both zero")
    psi /= nrm
    return SpinorState(psi=psi, grid=grid)
