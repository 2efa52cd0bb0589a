"""Distances between classically restricted and unrestricted evolutions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics, fock
from .errors import DimensionMismatch, ValidationError
from .fock import AmcsParams, FockStateN

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class DistanceSeries:
    times: np.ndarray
    d_hs: np.ndarray
    fidelity: np.ndarray


def _vec(x) -> np.ndarray:
    return x.amplitudes if isinstance(x, FockStateN) else np.asarray(x, dtype=complex)


def fidelity(a, b) -> float:
    """Overlap ``|<a|b>|^2`` of two normalized sector states, clipped to ``[0, 1]``."""
    va, vb = _vec(a), _vec(b)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"states live on sectors of size {va.shape[-1]} and {vb.shape[-1]}")
    return float(min(abs(np.vdot(va, vb)) ** 2, 1.0))


def hs_distance_from_fidelity(f):
    """``sqrt(2) sqrt(1 - F)``, elementwise."""
    return SQRT2 * np.sqrt(np.clip(1.0 - np.asarray(f, dtype=float), 0.0, 1.0))


def hs_distance(a, b) -> float:
    """Hilbert-Schmidt distance between two pure states, in ``[0, sqrt 2]``."""
    return float(hs_distance_from_fidelity(fidelity(a, b)))


def fidelity_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise fidelities of two stacks of state vectors."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"state stacks have shapes {a.shape} and {b.shape}")
    return np.minimum(np.abs(np.sum(np.conj(a) * b, axis=-1)) ** 2, 1.0)


def distance_series(classical: dynamics.Trajectory, quantum: dynamics.Trajectory) -> DistanceSeries:
    """D_HS between two trajectories sampled on the same time grid."""
    if classical.n_total != quantum.n_total:
        raise DimensionMismatch("trajectories live on different sectors")
    if len(classical) != len(quantum) or not np.allclose(classical.times, quantum.times, rtol=0, atol=1e-12):
        raise ValidationError("trajectories must share their time grid")
    f = fidelity_rows(classical.state_vectors(), quantum.state_vectors())
    return DistanceSeries(np.asarray(classical.times), hs_distance_from_fidelity(f), f)


def kerr_distance_series(params0: AmcsParams, epsilon: float, times) -> DistanceSeries:
    """Closed-form classical vs quantum cross-Kerr distance from a common AMCS."""
    times = np.asarray(times, dtype=float)
    s0 = fock.build_amcs(params0).amplitudes
    f = fidelity_rows(dynamics.kerr_classical_amplitudes(params0, epsilon, times),
                      dynamics.kerr_quantum_amplitudes(s0, epsilon, times))
    return DistanceSeries(times, hs_distance_from_fidelity(f), f)


def distance_map(n_total: int, p_plus: float, eps_grid, t_grid) -> np.ndarray:
    """D_HS on an (eps, t) grid; entry ``[i, j]`` uses ``eps_grid[i]`` and ``t_grid[j]``.

    The initial AMCS has ``alpha+ = sqrt(p)``, ``alpha- = sqrt(1 - p)``, both
    real; for cross-Kerr the distance depends only on the moduli.
    """
    eps_grid = np.atleast_1d(np.asarray(eps_grid, dtype=float))
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if eps_grid.size == 0 or t_grid.size == 0:
        raise ValidationError("distance map grids must be nonempty")
    params = AmcsParams.from_p(n_total, p_plus)
    out = np.empty((eps_grid.size, t_grid.size))
    for i, eps in enumerate(eps_grid):
        out[i] = kerr_distance_series(params, eps, t_grid).d_hs
    return out
