"""Reverse annealing for the fully connected p-spin model.

Statics (mean-field phase structure), spectra and gap scaling, closed-system
Schrodinger dynamics with error-probability and time-to-solution measures,
classical spin-vector comparators, and iterated reverse annealing as a
measured Markov chain, all over the polynomial-size permutation-symmetric
sector.
"""

from ._backend import BACKEND, HAS_COMPILED
from .dynamics import (
    EvolutionResult,
    error_probability,
    evolve,
    optimal_tts_scaling,
    run_protocol,
    tts,
)
from .errors import ConfigError, NumericalFailure
from .ira import (
    CycleSpec,
    TransitionMatrix,
    cycle_spectral_trace,
    energy_aggregate,
    iterate,
    single_cycle,
    transition_matrix,
)
from .schedules import Schedule
from .sector import (
    HamiltonianTerms,
    ModelParams,
    SectorBasis,
    assemble,
    build_basis,
    build_terms,
    classical_state,
    magnetization_diagonal,
    qa_ground_state,
)
from .semiclassical import (
    BlockAngles,
    SvmcConfig,
    potential_landscape,
    svd_evolve,
    svd_threshold_scan,
    svmc_run,
    v_sc,
)
from .spectrum import (
    EigenSystem,
    GapScan,
    eigensystem,
    eigensystem_at,
    gap_along_path,
    instantaneous_occupations,
)
from .statics import (
    MeanFieldPoint,
    TransitionLine,
    diagonal_scan,
    free_energy,
    self_consistency_residual,
    solve_m,
    trace_transitions,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAS_COMPILED",
    "BlockAngles",
    "ConfigError",
    "CycleSpec",
    "EigenSystem",
    "EvolutionResult",
    "GapScan",
    "HamiltonianTerms",
    "MeanFieldPoint",
    "ModelParams",
    "NumericalFailure",
    "Schedule",
    "SectorBasis",
    "SvmcConfig",
    "TransitionLine",
    "TransitionMatrix",
    "assemble",
    "build_basis",
    "build_terms",
    "classical_state",
    "cycle_spectral_trace",
    "diagonal_scan",
    "eigensystem",
    "eigensystem_at",
    "energy_aggregate",
    "error_probability",
    "evolve",
    "free_energy",
    "gap_along_path",
    "instantaneous_occupations",
    "iterate",
    "magnetization_diagonal",
    "optimal_tts_scaling",
    "potential_landscape",
    "qa_ground_state",
    "run_protocol",
    "self_consistency_residual",
    "single_cycle",
    "solve_m",
    "svd_evolve",
    "svd_threshold_scan",
    "svmc_run",
    "trace_transitions",
    "transition_matrix",
    "tts",
    "v_sc",
]
