"""Unrestricted and AMCS-restricted time evolution.

Two regimes are provided:

* quantum: ``|Psi(t)> = exp(-i H t) |Psi(0)>`` by eigendecomposition
  (per-component phases for Fock-diagonal Hamiltonians);
* classical: the projected equations of motion

  .. math:: \\dot\\alpha = -\\frac{i}{N^2} \\Lambda(\\alpha) \\nabla_{\\alpha^*} \\langle H \\rangle

  integrated with an adaptive Dormand-Prince 5(4) pair, plus the closed-form
  cross-Kerr solution and the equivalent rigid-body form on the Poincare
  sphere, ``dr/dt = -(2/N) r x grad_r <H>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import fock
from .errors import DimensionMismatch, IntegrationFailure, SectorUnderflow, ValidationError
from .fock import AmcsParams, CrossKerr, FockStateN, HamiltonianSpec, StokesVector
from .kernels import SectorOperator

PhaseConvention = Literal["reduced", "projected"]


@dataclass(frozen=True)
class EvolutionConfig:
    t_max: float
    n_samples: int = 2000
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    renormalize_each_step: bool = True
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not np.isfinite(self.t_max) or self.t_max <= 0.0:
            raise ValidationError(f"t_max must be positive and finite, got {self.t_max}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValidationError(f"n_samples must be an integer >= 2, got {self.n_samples}")
        for name in ("abs_tol", "rel_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol <= 1e-2:
                raise ValidationError(f"{name} must lie in (0, 1e-2], got {tol}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, float(self.t_max), int(self.n_samples))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered samples of one evolution.

    ``states`` holds :class:`AmcsParams` for classical runs and
    :class:`FockStateN` for quantum runs. ``speed`` is the instantaneous
    trace-norm rate ``||d/dt |psi><psi| ||_1``. The raw sample arrays are
    kept in ``alphas`` (classical, shape ``(n, 2)``) or ``amplitudes``
    (quantum, shape ``(n, N + 1)``).
    """

    regime: Literal["quantum", "classical"]
    n_total: int
    times: np.ndarray
    states: tuple
    stokes: np.ndarray
    speed: np.ndarray
    alphas: Optional[np.ndarray] = field(default=None, repr=False)
    amplitudes: Optional[np.ndarray] = field(default=None, repr=False)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.times)
        if not (len(self.states) == k == len(self.stokes) == len(self.speed)):
            raise ValidationError("trajectory arrays differ in length")
        if k > 1 and np.any(np.diff(self.times) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def state_vectors(self) -> np.ndarray:
        """Sector amplitudes for every sample, shape ``(n, N + 1)``."""
        if self.amplitudes is not None:
            return self.amplitudes
        rows = [fock.build_amcs(s).amplitudes for s in self.states]
        return np.array(rows)

    def fock_state(self, i: int) -> FockStateN:
        s = self.states[i]
        return s if isinstance(s, FockStateN) else fock.build_amcs(s)


def lambda_matrix(params: AmcsParams) -> np.ndarray:
    """The alpha-dependent 2x2 matrix of the restricted equations of motion."""
    ap, am = params.alpha_plus, params.alpha_minus
    nm1 = params.n_total - 1
    return np.array([
        [1 + nm1 * abs(am) ** 2, -nm1 * np.conj(am) * ap],
        [-nm1 * np.conj(ap) * am, 1 + nm1 * abs(ap) ** 2],
    ], dtype=complex)


def classical_rhs(params: AmcsParams, spec: HamiltonianSpec) -> tuple[complex, complex]:
    """``(d alpha+/dt, d alpha-/dt)`` on the AMCS manifold (hbar = 1)."""
    n = params.n_total
    if n == 0:
        raise SectorUnderflow("restricted dynamics needs N >= 1")
    grad = np.array(fock.grad_expectation(params, spec))
    dot = -1j / n**2 * (lambda_matrix(params) @ grad)
    return complex(dot[0]), complex(dot[1])


def classical_speed(n_total: int, alpha, alpha_dot) -> float:
    """Trace norm ``2 sqrt(N) |d alpha+ alpha- - d alpha- alpha+|`` of ``d/dt |s_N><s_N|``."""
    ap, am = alpha
    dp, dm = alpha_dot
    return float(2.0 * np.sqrt(n_total) * abs(dp * am - dm * ap))


def _classical_trajectory(n, times, alphas, speed, info) -> Trajectory:
    states = tuple(AmcsParams(n, a[0], a[1]) for a in alphas)
    # Raw alphas, not renormalized: |r| = |alpha|^2 exposes integrator drift.
    z = 2.0 * np.conj(alphas[:, 0]) * alphas[:, 1]
    rz = np.abs(alphas[:, 0]) ** 2 - np.abs(alphas[:, 1]) ** 2
    stokes = np.column_stack([z.real, z.imag, rz])
    return Trajectory("classical", n, np.asarray(times, float), states, stokes,
                      np.asarray(speed, float), alphas=alphas, info=info)


def evolve_classical_ode(params0: AmcsParams, spec: HamiltonianSpec, cfg: EvolutionConfig,
                         backend=None) -> Trajectory:
    """Integrate the restricted equations of motion on a uniform output grid."""
    n = params0.n_total
    times = cfg.times
    if n == 0:
        alphas = np.tile(params0.alpha, (len(times), 1))
        return _classical_trajectory(0, times, alphas, np.zeros(len(times)), {"n_steps": 0})
    op = SectorOperator(spec, n, backend=backend)
    alphas, n_steps, n_fev, status = op.integrate(
        params0.alpha_plus, params0.alpha_minus, times, cfg.rel_tol, cfg.abs_tol,
        cfg.renormalize_each_step, cfg.max_steps,
    )
    if status != 0:
        reason = "step size underflow" if status == -1 else "maximum step count exceeded"
        raise IntegrationFailure(f"classical integration failed: {reason}")
    speed = np.array([classical_speed(n, a, op.rhs(a[0], a[1])) for a in alphas])
    return _classical_trajectory(n, times, alphas, speed,
                                 {"n_steps": int(n_steps), "n_fev": int(n_fev), "backend": op.backend.__name__})


def kerr_frequencies(params: AmcsParams, epsilon: float,
                     phase_convention: PhaseConvention = "reduced") -> tuple[float, float]:
    """Rotation rates ``(omega+, omega-)`` of the restricted cross-Kerr solution.

    ``"reduced"`` differentiates ``eps N (N-1) |a+|^2 |a-|^2``; ``"projected"``
    adds the common rate ``eps (N-1)(N-2) p (1-p) / N`` produced by the exact
    gradient of the quadratic form, which is what the ODE integrates. The two
    differ only by a global phase.
    """
    n = params.n_total
    p = params.p
    q = 1.0 - p
    a = epsilon * (n - 1) / n if n else 0.0
    w_plus = a * q * (1 + (n - 1) * (q - p))
    w_minus = a * p * (1 + (n - 1) * (p - q))
    if phase_convention == "projected" and n:
        common = epsilon * (n - 1) * (n - 2) * p * q / n
        w_plus += common
        w_minus += common
    elif phase_convention not in ("reduced", "projected"):
        raise ValidationError(f"unknown phase convention {phase_convention!r}")
    return w_plus, w_minus


def kerr_relative_frequency(params: AmcsParams, epsilon: float) -> float:
    """``omega+ - omega- = eps (N - 1)(|a-|^2 - |a+|^2)``."""
    p = params.p
    return epsilon * (params.n_total - 1) * ((1.0 - p) - p)


def evolve_classical_kerr_analytic(params0: AmcsParams, epsilon: float, times: Sequence[float],
                                   phase_convention: PhaseConvention = "reduced") -> Trajectory:
    """Closed-form restricted cross-Kerr evolution ``alpha(t) = alpha(0) exp(-i omega t)``."""
    n = params0.n_total
    times = np.asarray(times, dtype=float)
    if n == 0:
        alphas = np.tile(params0.alpha, (len(times), 1))
        return _classical_trajectory(0, times, alphas, np.zeros(len(times)), {})
    w_plus, w_minus = kerr_frequencies(params0, epsilon, phase_convention)
    alphas = np.column_stack([
        params0.alpha_plus * np.exp(-1j * w_plus * times),
        params0.alpha_minus * np.exp(-1j * w_minus * times),
    ])
    p = params0.p
    speed = 2.0 * np.sqrt(n) * abs(epsilon) * (n - 1) * np.sqrt(p * (1 - p)) * abs(1 - 2 * p)
    return _classical_trajectory(n, times, alphas, np.full(len(times), speed), {})


def kerr_classical_amplitudes(params0: AmcsParams, epsilon: float, times) -> np.ndarray:
    """AMCS amplitudes along the restricted cross-Kerr flow, global phase dropped."""
    n = params0.n_total
    s0 = fock.build_amcs(params0).amplitudes
    w = kerr_relative_frequency(params0, epsilon)
    k = np.arange(n + 1)
    return s0 * np.exp(-1j * np.multiply.outer(np.asarray(times, float) * w, k))


def kerr_quantum_amplitudes(amps0: np.ndarray, epsilon: float, times) -> np.ndarray:
    """Unrestricted cross-Kerr evolution: phases ``exp(-i eps n+ n- t)``."""
    n = amps0.shape[0] - 1
    k = np.arange(n + 1)
    energies = k * (n - k)
    return amps0 * np.exp(-1j * np.multiply.outer(np.asarray(times, float) * epsilon, energies))


def _quantum_amplitudes(spec: HamiltonianSpec, amps0: np.ndarray, times: np.ndarray) -> np.ndarray:
    n = amps0.shape[0] - 1
    if isinstance(spec, CrossKerr):
        return kerr_quantum_amplitudes(amps0, spec.epsilon, times)
    if fock.is_diagonal(spec):
        e = fock.hamiltonian_diagonal(spec, n)
        return amps0 * np.exp(-1j * np.multiply.outer(times, e))
    w, v = np.linalg.eigh(fock.hamiltonian_matrix(spec, n))
    coeff = v.conj().T @ amps0
    return (np.exp(-1j * np.multiply.outer(times, w)) * coeff) @ v.T


def evolve_quantum(state0: FockStateN, spec: HamiltonianSpec, cfg: EvolutionConfig) -> Trajectory:
    """Exact Schroedinger evolution sampled on the configured grid."""
    n = state0.n_total
    if isinstance(spec, fock.GeneralHermitian) and spec.n_total != n:
        raise DimensionMismatch(f"Hamiltonian acts on N={spec.n_total}, state has N={n}")
    fock._require_normalized(state0)
    times = cfg.times
    amps = _quantum_amplitudes(spec, state0.amplitudes, times)
    if cfg.renormalize_each_step:
        amps = amps / np.linalg.norm(amps, axis=1, keepdims=True)
    states = tuple(FockStateN(n, a) for a in amps)
    if n == 0:
        stokes = np.full((len(times), 3), np.nan)
    else:
        stokes = np.array([fock.stokes_of_state(s).as_array() for s in states])
    speed = np.array([2.0 * np.sqrt(fock.energy_variance(s, spec)) for s in states])
    return Trajectory("quantum", n, times, states, stokes, speed, amplitudes=amps)


def stokes_rhs(r, h, n_total: int) -> np.ndarray:
    """Rigid-body form ``dr/dt = -(2/N) r x h`` with ``h = grad_r <H>``."""
    if n_total <= 0:
        raise SectorUnderflow("Stokes dynamics needs N >= 1")
    r = r.as_array() if isinstance(r, StokesVector) else np.asarray(r, dtype=float)
    return -(2.0 / n_total) * np.cross(r, np.asarray(h, dtype=float))


def kerr_stokes_field(r, epsilon: float, n_total: int) -> np.ndarray:
    """``grad_r`` of ``eps N (N-1) (1 - r_z^2) / 4``."""
    r = np.asarray(r, dtype=float)
    return np.array([0.0, 0.0, -0.5 * epsilon * n_total * (n_total - 1) * r[2]])


def energy_on_sphere(r, spec: HamiltonianSpec, n_total: int) -> float:
    """AMCS energy as a function of the Stokes direction ``r / |r|``."""
    state = fock.build_amcs(fock.params_from_stokes(n_total, r))
    return fock.expectation(state, spec)


def stokes_gradient(r, spec: HamiltonianSpec, n_total: int, step: float = 1e-6) -> np.ndarray:
    """``h = grad_r <H>``; exact for cross-Kerr, central differences otherwise.

    Only the tangential part of ``h`` enters ``r x h``, so the radial
    extension chosen (constant along rays) does not matter.
    """
    r = np.asarray(r, dtype=float)
    if isinstance(spec, CrossKerr):
        return kerr_stokes_field(r, spec.epsilon, n_total)
    h = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        h[i] = (energy_on_sphere(r + e, spec, n_total) - energy_on_sphere(r - e, spec, n_total)) / (2 * step)
    return h


def evolve_stokes(r0, spec: HamiltonianSpec, n_total: int, cfg: EvolutionConfig) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the Euler form on the sphere; returns ``(times, r)`` with ``r`` of shape ``(n, 3)``."""
    r0 = r0.as_array() if isinstance(r0, StokesVector) else np.asarray(r0, dtype=float)
    if abs(np.linalg.norm(r0) - 1.0) > 1e-6:
        raise ValidationError("Euler-form evolution needs a unit Stokes vector")
    times = cfg.times

    def rhs(_t, r):
        return stokes_rhs(r, stokes_gradient(r, spec, n_total), n_total)

    sol = solve_ivp(rhs, (0.0, times[-1]), r0, method="DOP853", t_eval=times,
                    rtol=cfg.rel_tol, atol=cfg.abs_tol)
    if not sol.success:
        raise IntegrationFailure(f"Stokes-space integration failed: {sol.message}")
    return sol.t, sol.y.T
