"""Quantum and classically restricted speed limits for two-mode polarization states."""

from .dynamics import (
    EvolutionConfig, Trajectory, evolve_classical_kerr_analytic, evolve_classical_ode, evolve_quantum, evolve_stokes,
)
from .errors import (
    DimensionMismatch, IntegrationFailure, NormalizationError, SectorUnderflow, StokesQSLError, UndefinedRatio,
    ValidationError,
)
from .fock import (
    AmcsParams, CrossKerr, FockStateN, GeneralHermitian, StokesVector, apply_annihilation, build_amcs,
    expectation, grad_expectation, stokes_of_params, stokes_of_state,
)
from .kernels import BACKEND, SectorOperator
from .metrics import distance_map, distance_series, fidelity, hs_distance
from .speed_limits import (
    SpeedLimitReport, qsl_classical, qsl_classical_kerr_closed, qsl_spectrum, speed_limit_report, speedup_ratio,
)

__version__ = "0.1.0"
