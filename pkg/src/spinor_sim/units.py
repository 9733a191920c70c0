"""Physical constants and the dimensionless lattice unit system.

The numerical core works in lattice units throughout: length 1/k0, energy
E_R = hbar^2 k0^2 / 2m, time hbar/E_R, force k0*E_R.  SI values appear only
at the configuration boundary and are converted here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError

# CODATA 2018
HBAR = 1.054571817e-34            # J s
ATOMIC_MASS_KG = 1.66053906660e-27  # kg
BOHR_MAGNETON = 9.2740100783e-24  # J / T

CS133_MASS_KG = 132.905451961 * ATOMIC_MASS_KG

QUANTITY_KINDS = ("length", "time", "energy", "force")


@dataclass(frozen=True)
class PhysicalParams:
    """Atom + lattice parameters; k0 and E_R are always derived, never stored."""

    atom_mass: float = CS133_MASS_KG   # kg
    wavelength: float = 1064e-9        # m
    v0: float = 1.0                    # lattice depth in units of E_R

    def __post_init__(self):
        if not (self.atom_mass > 0 and self.wavelength > 0):
            raise ConfigurationError(
                "atom_mass and wavelength must be positive, got "
                f"{self.atom_mass}, {self.wavelength}"
            )
        if self.v0 < 0:
            raise ConfigurationError(f"lattice depth must be >= 0, got {self.v0}")

    @property
    def k0(self) -> float:
        """Lattice wavenumber 2*pi/lambda in 1/m."""
        return 2.0 * math.pi / self.wavelength

    @property
    def recoil_energy(self) -> float:
        """E_R = hbar^2 k0^2 / 2m in joules."""
        return HBAR ** 2 * self.k0 ** 2 / (2.0 * self.atom_mass)

    @property
    def time_unit(self) -> float:
        """Seconds per unit of dimensionless time (hbar / E_R)."""
        return HBAR / self.recoil_energy

    @property
    def force_unit(self) -> float:
        """Newtons per unit of dimensionless force (k0 * E_R)."""
        return self.k0 * self.recoil_energy


def _scale(params: PhysicalParams, kind: str) -> float:
    # SI value / scale = dimensionless value
    if kind == "length":
        return 1.0 / params.k0
    if kind == "time":
        return params.time_unit
    if kind == "energy":
        return params.recoil_energy
    if kind == "force":
        return params.force_unit
    raise ConfigurationError(
        f"unknown quantity kind {kind!r}; expected one of {QUANTITY_KINDS}"
    )


def to_dimensionless(params: PhysicalParams, value: float, kind: str) -> float:
    """Convert an SI value of the given kind into lattice units."""
    return value / _scale(params, kind)


def from_dimensionless(params: PhysicalParams, value: float, kind: str) -> float:
    """Inverse of :func:`to_dimensionless`."""
    return value * _scale(params, kind)


def acceleration_to_force(params: PhysicalParams, accel_si: float) -> float:
    """Dimensionless force for an acceleration given in m/s^2 (F = m*a)."""
    return to_dimensionless(params, params.atom_mass * accel_si, "force")


def rate_to_dimensionless(params: PhysicalParams, rate_per_s: float) -> float:
    """Dimensionless rate for a rate given in 1/s (multiplies the time unit)."""
    return rate_per_s * params.time_unit
