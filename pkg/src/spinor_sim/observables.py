"""Observables, scaling fits, and density comparison metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .lattice import Grid, SpinorState

# component populations below this are treated as empty; their mean is undefined
EMPTY_COMPONENT = 1e-14


@dataclass
class Moments:
    x_mean: float
    x_std: float
    pop_up: float
    pop_down: float
    coherence: complex           # integral psi_up* psi_down dx, lab frame
    norm: float
    x_mean_up: float | None      # None when the component carries no population
    x_mean_down: float | None


def density_moments(rho: np.ndarray, grid: Grid) -> tuple[float, float]:
    """Mean and standard deviation of a (not necessarily normalized) density."""
    w = float(np.sum(rho) * grid.dx)
    if w <= 0.0:
        raise ConfigurationError("density has zero weight")
    x_mean = float(np.sum(grid.x * rho) * grid.dx / w)
    x2 = float(np.sum(grid.x ** 2 * rho) * grid.dx / w)
    var = max(x2 - x_mean ** 2, 0.0)
    return x_mean, float(np.sqrt(var))


def moments(state: SpinorState, gauge_delta: float = 0.0) -> Moments:
    """Position/spin moments of a spinor state.

    gauge_delta = A_up - A_down at the observation time; the lab-frame
    coherence of gauged components needs the phase exp(-i*gauge_delta*x).
    """
    grid = state.grid
    dx = grid.dx
    rho_up = np.abs(state.psi[0]) ** 2
    rho_down = np.abs(state.psi[1]) ** 2
    pop_up = float(np.sum(rho_up) * dx)
    pop_down = float(np.sum(rho_down) * dx)
    norm = pop_up + pop_down
    rho = rho_up + rho_down
    x_mean = float(np.sum(grid.x * rho) * dx / norm)
    x2 = float(np.sum(grid.x ** 2 * rho) * dx / norm)
    x_std = float(np.sqrt(max(x2 - x_mean ** 2, 0.0)))

    if gauge_delta == 0.0:
        coh = complex(np.sum(np.conj(state.psi[0]) * state.psi[1]) * dx)
    else:
        phase = np.exp(-1j * gauge_delta * grid.x)
        coh = complex(np.sum(np.conj(state.psi[0]) * state.psi[1] * phase) * dx)

    x_mean_up = float(np.sum(grid.x * rho_up) * dx / pop_up) if pop_up > EMPTY_COMPONENT else None
    x_mean_down = float(np.sum(grid.x * rho_down) * dx / pop_down) if pop_down > EMPTY_COMPONENT else None
    return Moments(x_mean=x_mean, x_std=x_std, pop_up=pop_up, pop_down=pop_down,
                   coherence=coh, norm=norm, x_mean_up=x_mean_up, x_mean_down=x_mean_down)


@dataclass
class ObservableSeries:
    """Time series of sampled moments (dimensionless time and length)."""

    t: np.ndarray
    x_mean: np.ndarray
    x_std: np.ndarray
    x_mean_up: np.ndarray        # nan where undefined
    x_mean_down: np.ndarray
    pop_up: np.ndarray
    pop_down: np.ndarray
    coherence: np.ndarray        # complex
    norm: np.ndarray

    @classmethod
    def from_rows(cls, rows: list[tuple[float, Moments]]) -> "ObservableSeries":
        t = np.array([r[0] for r in rows])
        def col(get, default=np.nan):
            return np.array([default if get(m) is None else get(m) for _, m in rows])
        return cls(
            t=t,
            x_mean=col(lambda m: m.x_mean),
            x_std=col(lambda m: m.x_std),
            x_mean_up=col(lambda m: m.x_mean_up),
            x_mean_down=col(lambda m: m.x_mean_down),
            pop_up=col(lambda m: m.pop_up),
            pop_down=col(lambda m: m.pop_down),
            coherence=np.array([m.coherence for _, m in rows], dtype=complex),
            norm=col(lambda m: m.norm),
        )

    def __len__(self) -> int:
        return len(self.t)


def fit_diffusion_exponent(times, x_std, t_min: float) -> tuple[float, float]:
    """Least-squares slope of log(x_std) vs log(t) over samples with t > t_min.

    Returns (alpha, stderr). Needs at least 8 usable samples.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(x_std, dtype=float)
    mask = (t > t_min) & (s > 0) & np.isfinite(s) & np.isfinite(t)
    if int(mask.sum()) < 8:
        raise ConfigurationError(
            f"diffusion fit needs >= 8 samples beyond t_min = {t_min}, got {int(mask.sum())}"
        )
    lx = np.log(t[mask])
    ly = np.log(s[mask])
    n = len(lx)
    mx = lx.mean()
    my = ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    sxy = float(np.sum((lx - mx) * (ly - my)))
    alpha = sxy / sxx
    resid = ly - (my + alpha * (lx - mx))
    ssr = float(np.sum(resid ** 2))
    stderr = np.sqrt(ssr / max(n - 2, 1) / sxx)
    return float(alpha), float(stderr)


def compare_densities(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    """Overlap sum(min(a_i, b_i))*dx of two normalized densities on one grid."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ConfigurationError(f"density grids differ: {a.shape} vs {b.shape}")
    for name, rho in (("a", a), ("b", b)):
        w = float(np.sum(rho) * dx)
        if abs(w - 1.0) > 1e-6:
            raise ConfigurationError(f"density {name} is not normalized (weight {w})")
    return float(np.sum(np.minimum(a, b)) * dx)


def monotone_fit(values: np.ndarray, increasing: bool = True) -> np.ndarray:
    """Least-squares monotone fit (pool-adjacent-violators), equal weights."""
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or len(y) == 0:
        raise ConfigurationError("monotone fit needs a nonempty 1d series")
    if not increasing:
        return -monotone_fit(-y, increasing=True)
    # each pool holds the running mean of a merged block
    means: list[float] = []
    counts: list[int] = []
    for v in y:
        means.append(float(v))
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            total = counts[-2] + counts[-1]
            merged = (means[-2] * counts[-2] + means[-1] * counts[-1]) / total
            means[-2:] = [merged]
            counts[-2:] = [total]
    fit = np.empty_like(y)
    i = 0
    for m, c in zip(means, counts):
        fit[i:i + c] = m
        i += c
    return fit


def oscillation_amplitude(values) -> float:
    """Peak-to-trough of a series after removing its best monotone trend.

    The trend is the better-fitting (lower squared error) of the two
    monotone regressions.  A drifting or saturating series without a
    turnaround detrends to zero; an oscillating one keeps its swing.
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or len(y) < 2:
        raise ConfigurationError("amplitude needs a 1d series of >= 2 samples")
    if not np.all(np.isfinite(y)):
        raise ConfigurationError("amplitude input contains non-finite samples")
    fits = (monotone_fit(y, increasing=True), monotone_fit(y, increasing=False))
    errors = [float(np.sum((y - f) ** 2)) for f in fits]
    residual = y - fits[int(np.argmin(errors))]
    return float(residual.max() - residual.min())
