"""Spinor atoms in a driven 1D optical lattice: split-step simulator.

Deterministic protocols (Bloch oscillations, ac transport, coined walks,
discrete Dirac dynamics with an optional potential step) and dephasing
ensembles, with calibrated presets and CSV artifacts.
"""

__version__ = "0.1.0"

from .dephasing import (DephasingConfig, EnsembleResult, average_trajectories,
                        coherence_decay_oracle, mcwf_jump_times,
                        sample_jump_times, trajectory_rng)
from .discrete import (BlochScales, DiracMapConfig, DiracSpectrum, WalkState,
                       bloch_scales, dirac_map_run, effective_dirac_spectrum,
                       make_walk_state, transport_velocity_bound,
                       walk_run, walk_unitary_dense)
from .errors import ConfigurationError, NumericalError
from .lattice import (BandStructure, Grid, SpinorState, compute_band_structure,
                      bloch_coefficients, lattice_potential, make_grid,
                      prepare_bloch_gaussian)
from .observables import (Moments, ObservableSeries, compare_densities,
                          density_moments, fit_diffusion_exponent, moments,
                          monotone_fit, oscillation_amplitude)
from .propagation import (DriveSegment, ForceLaw, GaugeRecord, Pulse,
                          StepPotential, apply_pulse, evolve_segment,
                          measure_step_displacement, run_protocol,
                          run_protocol_reversed, reverse_timeline)
from .scenarios import (PRESETS, ScenarioConfig, ScenarioResult, SweepResult,
                        get_preset, resolve, run_scenario, run_sweep,
                        validate_config)

__all__ = [name for name in dir() if not name.startswith("_")]
