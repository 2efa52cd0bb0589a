"""Unrestricted and AMCS-restricted quantum speed limits (hbar = 1).

The unrestricted limit is the spectral width of the sector Hamiltonian. The
restricted limit

    QSL_cl = (2 / sqrt N) sup | alpha- d<H>/d alpha+* - alpha+ d<H>/d alpha-* |

is found numerically by a coarse grid over the gauge-fixed manifold
(alpha+ = sqrt(p) real, alpha- = sqrt(1 - p) e^{i phi}) followed by
golden-section refinement of every discrete local maximum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import dynamics, fock
from .errors import SectorUnderflow, UndefinedRatio, ValidationError
from .fock import AmcsParams, CrossKerr, HamiltonianSpec
from .kernels import SectorOperator

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    p_points: int = 1001
    phi_points: int = 256
    xtol: float = 1e-10
    ftol: float = 1e-10
    max_candidates: int = 8
    max_sweeps: int = 60
    tie_rtol: float = 1e-9

    def __post_init__(self):
        if self.p_points < 3 or self.phi_points < 3:
            raise ValidationError("optimizer grids need at least 3 points per axis")


@dataclass(frozen=True)
class ClassicalLimit:
    value: float
    argmax: AmcsParams
    evaluations: int


@dataclass(frozen=True, eq=False)
class SpeedLimitReport:
    n_total: int
    spec: HamiltonianSpec
    qsl: float
    qsl_cl: float
    argmax_params: AmcsParams

    @property
    def ratio(self) -> Optional[float]:
        """``qsl / qsl_cl``, or ``None`` when the restricted limit vanishes."""
        return self.qsl / self.qsl_cl if self.qsl_cl > 0 else None


def qsl_spectrum(spec: HamiltonianSpec, n_total: int) -> float:
    """``E_max - E_min`` over the sector spectrum."""
    if isinstance(spec, CrossKerr):
        # integer arithmetic: max_k k (N - k) = floor(N^2 / 4)
        n = int(n_total)
        width = (n * n - n % 2) // 4
        return abs(spec.epsilon) * width
    if fock.is_diagonal(spec):
        e = fock.hamiltonian_diagonal(spec, n_total)
    else:
        e = np.linalg.eigvalsh(fock.hamiltonian_matrix(spec, n_total))
    return float(np.max(e) - np.min(e))


def qsl_classical_kerr_closed(epsilon: float, n_total: int) -> float:
    """``|eps| sqrt(N) (N - 1) / 2``."""
    if n_total <= 1:
        return 0.0
    return abs(epsilon) * math.sqrt(n_total) * (n_total - 1) / 2.0


def speedup_ratio(n_total: int) -> float:
    """Cross-Kerr speedup ``Q(N) = (N^2 - N mod 2) / (2 sqrt(N) (N - 1))``, independent of eps."""
    n = int(n_total)
    if n <= 1:
        raise UndefinedRatio(f"Q(N) is undefined for N={n}: both limits vanish")
    return (n * n - n % 2) / (2.0 * math.sqrt(n) * (n - 1))


def instantaneous_speed_classical(params: AmcsParams, spec: HamiltonianSpec) -> float:
    """Trace-norm rate of the restricted flow at ``params``."""
    if params.n_total == 0:
        raise SectorUnderflow("speed needs N >= 1")
    dot = dynamics.classical_rhs(params, spec)
    return dynamics.classical_speed(params.n_total, params.alpha, dot)


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       xtol: float = 1e-10) -> tuple[float, float, int]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), evaluations)``."""
    x1 = b - INV_GOLDEN * (b - a)
    x2 = a + INV_GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while b - a > xtol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_GOLDEN * (b - a)
            f2 = f(x2)
        evals += 1
    if f1 >= f2:
        return x1, f1, evals
    return x2, f2, evals


def _local_maxima_1d(v: np.ndarray) -> np.ndarray:
    left = np.concatenate([[-np.inf], v[:-1]])
    right = np.concatenate([v[1:], [-np.inf]])
    return np.flatnonzero((v >= left) & (v >= right) & (v > 0))


def _local_maxima_2d(v: np.ndarray) -> list[tuple[int, int]]:
    padded = np.pad(v, ((1, 1), (0, 0)), constant_values=-np.inf)
    core = padded[1:-1]
    is_max = core > 0
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = np.roll(padded, dj, axis=1)[1 + di: padded.shape[0] - 1 + di]
            is_max &= core >= shifted
    return [tuple(ix) for ix in np.argwhere(is_max)]


def _pick(cands, rtol):
    best = max(c[0] for c in cands)
    tied = [c for c in cands if c[0] >= best * (1.0 - rtol)]
    return min(tied, key=lambda c: (c[1], c[2]))


def qsl_classical(spec: HamiltonianSpec, n_total: int,
                  opt_cfg: OptimizerConfig = OptimizerConfig(), backend=None) -> ClassicalLimit:
    """Restricted speed limit and the AMCS attaining it.

    Mirror maxima are resolved toward the smaller ``p``.
    """
    n = int(n_total)
    if n == 0:
        raise SectorUnderflow("QSL_cl needs N >= 1")
    op = SectorOperator(spec, n, backend=backend)
    p_grid = np.linspace(0.0, 1.0, opt_cfg.p_points)
    dp = p_grid[1] - p_grid[0]
    evals = 0
    cands = []

    if not op.phase_sensitive:
        vals = op.objective_grid(p_grid, np.zeros(1))[:, 0]
        evals += vals.size
        idx = _local_maxima_1d(vals)
        if idx.size == 0:
            return ClassicalLimit(0.0, AmcsParams.from_p(n, 0.0), evals)
        idx = idx[np.argsort(-vals[idx], kind="stable")][: opt_cfg.max_candidates]
        for i in idx:
            lo, hi = max(0.0, p_grid[i] - dp), min(1.0, p_grid[i] + dp)
            x, fx, k = golden_section_max(lambda p: op.objective(p, 0.0), lo, hi, opt_cfg.xtol)
            evals += k
            if vals[i] > fx:
                x, fx = p_grid[i], vals[i]
            cands.append((fx, x, 0.0))
    else:
        phi_grid = np.linspace(0.0, 2 * np.pi, opt_cfg.phi_points, endpoint=False)
        dphi = phi_grid[1] - phi_grid[0]
        vals = op.objective_grid(p_grid, phi_grid)
        evals += vals.size
        peaks = _local_maxima_2d(vals)
        if not peaks:
            return ClassicalLimit(0.0, AmcsParams.from_p(n, 0.0), evals)
        peaks.sort(key=lambda ij: (-vals[ij], ij))
        for i, j in peaks[: opt_cfg.max_candidates]:
            p, phi, fx = p_grid[i], phi_grid[j], vals[i, j]
            for _ in range(opt_cfg.max_sweeps):
                f_start = fx
                lo, hi = max(0.0, p - dp), min(1.0, p + dp)
                p_new, f_new, k = golden_section_max(lambda x: op.objective(x, phi), lo, hi, opt_cfg.xtol)
                evals += k
                if f_new > fx:
                    p, fx = p_new, f_new
                phi_new, f_new, k = golden_section_max(lambda x: op.objective(p, x), phi - dphi, phi + dphi, opt_cfg.xtol)
                evals += k
                if f_new > fx:
                    phi, fx = phi_new, f_new
                if fx - f_start <= opt_cfg.ftol * max(1.0, fx):
                    break
            cands.append((fx, p, phi % (2 * np.pi)))

    value, p, phi = _pick(cands, opt_cfg.tie_rtol)
    return ClassicalLimit(float(value), AmcsParams.from_p(n, float(p), float(phi)), evals)


def speed_limit_report(spec: HamiltonianSpec, n_total: int,
                       opt_cfg: OptimizerConfig = OptimizerConfig()) -> SpeedLimitReport:
    cl = qsl_classical(spec, n_total, opt_cfg)
    return SpeedLimitReport(int(n_total), spec, qsl_spectrum(spec, n_total), cl.value, cl.argmax)
