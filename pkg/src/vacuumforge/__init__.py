"""Multipair creation from the fermionic vacuum by a deep 1-d potential well.

The library covers the full pipeline: static single-particle spectra and
supercritical-level counting, ramped time evolution of the free mode basis,
transition-amplitude blocks and pair-number overlap matrices, pair-number
statistics with position and momentum densities, and post-processing
(decay rates, peak extraction).  The `vacuumforge` command drives batch
runs with deterministic file outputs.
"""
from .errors import (
    ConfigError,
    ContractViolationError,
    EigensolverError,
    GridMismatchError,
)
from .grids import FreeBasis, Grid, SpinorField, build_free_basis, inner_product, make_grid
from .hamiltonian import (
    PotentialSpec,
    RampSpec,
    SpectrumTable,
    SupercriticalCount,
    build_hamiltonian,
    count_supercritical,
    eigenspectrum,
    localization_fractions,
    potential_profile,
    ramp_profile,
    smooth_step,
    spectrum_sweep,
)
from .propagator import (
    EvolvedBasis,
    PreparedEvolution,
    Schedule,
    evolve_basis,
    evolve_state,
    plateau_propagator,
)
from .bogoliubov import (
    OverlapMatrix,
    TransitionBlocks,
    build_S,
    build_S_minus,
    transition_blocks,
)
from .observables import (
    DensityTable,
    MomentumSpectrum,
    PairStatistics,
    density_one,
    density_table,
    density_two,
    momentum_spectrum,
    momentum_to_energy,
    pair_numbers,
    pair_probabilities,
    pair_probabilities_alternating,
    pair_statistics,
)
from .analysis import (
    DecaySeries,
    FitResult,
    Peak,
    PeakList,
    decay_series,
    find_peaks,
    find_peaks_2d,
    fit_exponential,
)
from .config import ObservableToggles, RunConfig, load_config, paper_defaults, parse_config, render_config
from .runner import RunResult, run_command

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ContractViolationError", "EigensolverError",
    "GridMismatchError",
    "Grid", "SpinorField", "FreeBasis", "make_grid", "build_free_basis",
    "inner_product",
    "PotentialSpec", "RampSpec", "smooth_step", "potential_profile",
    "ramp_profile", "build_hamiltonian", "eigenspectrum",
    "localization_fractions", "SpectrumTable", "spectrum_sweep",
    "SupercriticalCount", "count_supercritical",
    "Schedule", "EvolvedBasis", "evolve_state", "evolve_basis",
    "plateau_propagator", "PreparedEvolution",
    "TransitionBlocks", "transition_blocks", "OverlapMatrix",
    "build_S", "build_S_minus",
    "PairStatistics", "pair_numbers", "pair_probabilities",
    "pair_probabilities_alternating", "pair_statistics",
    "DensityTable", "density_one", "density_two", "density_table",
    "MomentumSpectrum", "momentum_spectrum", "momentum_to_energy",
    "DecaySeries", "decay_series", "FitResult", "fit_exponential",
    "Peak", "PeakList", "find_peaks", "find_peaks_2d",
    "ObservableToggles", "RunConfig", "paper_defaults", "parse_config",
    "load_config", "render_config",
    "RunResult", "run_command",
    "__version__",
]
