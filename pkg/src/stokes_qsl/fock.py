"""Fixed photon-number sector of two bosonic polarization modes.

A state with ``N`` photons is stored as a dense vector of ``N + 1`` complex
amplitudes, entry ``k`` being the coefficient of ``|n+ = k, n- = N - k>``.
Angular-momentum coherent states (AMCS), the Schwinger operators and the
Hamiltonian gradients needed by the restricted dynamics all live here.

Units: hbar = 1 throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .errors import DimensionMismatch, NormalizationError, SectorUnderflow, ValidationError

N_MAX = 10_000
NORM_TOL = 1e-9
RENORM_TOL = 1e-3
HERMITIAN_TOL = 1e-12


def _check_n(n_total) -> int:
    if isinstance(n_total, (bool, np.bool_)) or int(n_total) != n_total:
        raise ValidationError(f"photon number must be an integer, got {n_total!r}")
    n = int(n_total)
    if n < 0 or n > N_MAX:
        raise ValidationError(f"photon number must lie in [0, {N_MAX}], got {n}")
    return n


@dataclass(frozen=True, eq=False)
class FockStateN:
    """Pure state on the ``N``-photon sector.

    Constructors in this module always return normalized states; the one
    exception is :func:`apply_annihilation`, whose output carries the norm
    produced by the lowering operator.
    """

    n_total: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = _check_n(self.n_total)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != n + 1:
            raise DimensionMismatch(
                f"sector N={n} needs {n + 1} amplitudes, got {amps.shape[0]}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "n_total", n)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.n_total + 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockStateN":
        nrm = self.norm()
        if nrm == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return FockStateN(self.n_total, self.amplitudes / nrm)

    @classmethod
    def basis(cls, n_total: int, n_plus: int) -> "FockStateN":
        """Fock state ``|n+, N - n+>``."""
        n = _check_n(n_total)
        if not 0 <= n_plus <= n:
            raise ValidationError(f"n_plus={n_plus} outside [0, {n}]")
        amps = np.zeros(n + 1, dtype=complex)
        amps[n_plus] = 1.0
        return cls(n, amps)


@dataclass(frozen=True)
class AmcsParams:
    """Classical parameters ``(N, alpha_plus, alpha_minus)`` of an AMCS.

    Inputs whose squared norm is within ``1e-3`` of one are rescaled onto the
    unit sphere; anything further off raises :class:`NormalizationError`.
    """

    n_total: int
    alpha_plus: complex
    alpha_minus: complex

    def __post_init__(self):
        n = _check_n(self.n_total)
        ap, am = complex(self.alpha_plus), complex(self.alpha_minus)
        if not (np.isfinite(ap) and np.isfinite(am)):
            raise ValidationError("alpha parameters must be finite")
        norm2 = abs(ap) ** 2 + abs(am) ** 2
        if abs(norm2 - 1.0) > RENORM_TOL:
            raise NormalizationError(
                f"|alpha+|^2 + |alpha-|^2 = {norm2:.6g} deviates from 1 by more than {RENORM_TOL}"
            )
        if norm2 != 1.0:
            s = 1.0 / np.sqrt(norm2)
            ap, am = ap * s, am * s
        object.__setattr__(self, "n_total", n)
        object.__setattr__(self, "alpha_plus", ap)
        object.__setattr__(self, "alpha_minus", am)

    @classmethod
    def from_p(cls, n_total: int, p: float, phase: float = 0.0) -> "AmcsParams":
        """AMCS with ``|alpha+|^2 = p``, alpha+ real and relative phase ``phase``."""
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {p}")
        return cls(n_total, np.sqrt(p), np.sqrt(1.0 - p) * np.exp(1j * phase))

    @property
    def p(self) -> float:
        """Population ``|alpha+|^2`` of the + mode."""
        return abs(self.alpha_plus) ** 2

    @property
    def alpha(self) -> np.ndarray:
        return np.array([self.alpha_plus, self.alpha_minus], dtype=complex)

    def with_alpha(self, alpha_plus: complex, alpha_minus: complex) -> "AmcsParams":
        return AmcsParams(self.n_total, alpha_plus, alpha_minus)


@dataclass(frozen=True)
class CrossKerr:
    """Cross-Kerr interaction ``epsilon * n+ * n-``."""

    epsilon: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not np.isfinite(eps):
            raise ValidationError(f"epsilon must be finite, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)


@dataclass(frozen=True, eq=False)
class GeneralHermitian:
    """Arbitrary Hermitian operator given directly on one fixed-N sector."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("Hamiltonian matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("Hamiltonian matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n_total(self) -> int:
        return self.matrix.shape[0] - 1


HamiltonianSpec = Union[CrossKerr, GeneralHermitian]


def is_diagonal(spec: HamiltonianSpec) -> bool:
    """True when the operator is diagonal in the Fock basis (phase-insensitive QSL_cl)."""
    if isinstance(spec, CrossKerr):
        return True
    m = spec.matrix
    return not np.any(m[~np.eye(m.shape[0], dtype=bool)])


def half_log_binomials(n_total: int) -> np.ndarray:
    """``0.5 * log C(N, k)`` for ``k = 0..N`` from cumulative log-ratios."""
    n = _check_n(n_total)
    k = np.arange(1, n + 1, dtype=float)
    out = np.zeros(n + 1)
    out[1:] = np.cumsum(np.log((n - k + 1.0) / k))
    return 0.5 * out


def amcs_amplitudes(n_total: int, alpha_plus: complex, alpha_minus: complex) -> np.ndarray:
    """Raw amplitudes ``C(N,k)^(1/2) alpha+^k alpha-^(N-k)`` without renormalization.

    Magnitudes are assembled in log space so that neither the binomials nor
    the powers overflow for large ``N``.
    """
    n = _check_n(n_total)
    ap, am = complex(alpha_plus), complex(alpha_minus)
    out = np.zeros(n + 1, dtype=complex)
    rp, rm = abs(ap), abs(am)
    if rp == 0.0:
        out[0] = am**n
        return out
    if rm == 0.0:
        out[n] = ap**n
        return out
    k = np.arange(n + 1)
    logmag = half_log_binomials(n) + k * np.log(rp) + (n - k) * np.log(rm)
    phase = k * np.angle(ap) + (n - k) * np.angle(am)
    return np.exp(logmag + 1j * phase)


def build_amcs(params: AmcsParams) -> FockStateN:
    """Angular-momentum coherent state ``|s_N(alpha)>``, normalized."""
    amps = amcs_amplitudes(params.n_total, params.alpha_plus, params.alpha_minus)
    return FockStateN(params.n_total, amps / np.linalg.norm(amps))


def _lower(amps: np.ndarray, mode: str) -> np.ndarray:
    n = amps.shape[0] - 1
    k = np.arange(n + 1)
    if mode == "plus":
        return np.sqrt(k[1:]) * amps[1:]
    if mode == "minus":
        return np.sqrt(n - k[:-1]) * amps[:-1]
    raise ValidationError(f"mode must be 'plus' or 'minus', got {mode!r}")


def apply_annihilation(state: FockStateN, mode: Literal["plus", "minus"]) -> FockStateN:
    """Bosonic lowering ``a+`` or ``a-``; the result lives on sector ``N - 1``.

    The output is *not* renormalized. On an AMCS it equals
    ``sqrt(N) * alpha_mode * |s_{N-1}>``.
    """
    if state.n_total == 0:
        raise SectorUnderflow("cannot remove a photon from the vacuum sector")
    return FockStateN(state.n_total - 1, _lower(state.amplitudes, mode))


def hamiltonian_matrix(spec: HamiltonianSpec, n_total: int) -> np.ndarray:
    """Dense ``(N+1) x (N+1)`` matrix of ``spec`` on the ``N``-photon sector."""
    n = _check_n(n_total)
    if isinstance(spec, CrossKerr):
        k = np.arange(n + 1, dtype=float)
        return np.diag((spec.epsilon * (k * (n - k))).astype(complex))
    if isinstance(spec, GeneralHermitian):
        if spec.matrix.shape[0] != n + 1:
            raise DimensionMismatch(
                f"GeneralHermitian of size {spec.matrix.shape[0]} does not fit sector N={n}"
            )
        return np.array(spec.matrix)
    raise ValidationError(f"unknown Hamiltonian spec {spec!r}")


def hamiltonian_diagonal(spec: HamiltonianSpec, n_total: int) -> np.ndarray:
    """Real diagonal of the sector matrix; exact integers times epsilon for cross-Kerr."""
    if isinstance(spec, CrossKerr):
        k = np.arange(n_total + 1, dtype=float)
        return spec.epsilon * (k * (n_total - k))
    return np.real(np.diag(hamiltonian_matrix(spec, n_total))).copy()


def apply_hamiltonian(spec: HamiltonianSpec, amps: np.ndarray) -> np.ndarray:
    n = amps.shape[-1] - 1
    if isinstance(spec, CrossKerr):
        return hamiltonian_diagonal(spec, n) * amps
    return amps @ hamiltonian_matrix(spec, n).T


def _require_normalized(state: FockStateN) -> None:
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NormalizationError(f"state norm {state.norm():.12g} is not 1")


def expectation(state: FockStateN, spec: HamiltonianSpec) -> float:
    """Energy ``<Psi|H|Psi>`` of a normalized sector state."""
    _require_normalized(state)
    hpsi = apply_hamiltonian(spec, state.amplitudes)
    return float(np.real(np.vdot(state.amplitudes, hpsi)))


def energy_variance(state: FockStateN, spec: HamiltonianSpec) -> float:
    _require_normalized(state)
    c = state.amplitudes
    hpsi = apply_hamiltonian(spec, c)
    mean = np.real(np.vdot(c, hpsi))
    # ||(H - <H>) psi||^2 avoids the cancellation in <H^2> - <H>^2
    resid = hpsi - mean * c
    return float(np.real(np.vdot(resid, resid)))


def grad_expectation(params: AmcsParams, spec: HamiltonianSpec) -> tuple[complex, complex]:
    """Wirtinger derivatives ``(d<H>/d alpha+*, d<H>/d alpha-*)`` on the AMCS manifold.

    Uses ``d<H>/d alpha_mode* = sqrt(N) <s_{N-1}| a_mode H |s_N>``, where
    ``<H>`` is the quadratic form in the holomorphic amplitudes.
    """
    n = params.n_total
    if n == 0:
        raise SectorUnderflow("gradient needs N >= 1")
    s_n = build_amcs(params)
    h_s = FockStateN(n, apply_hamiltonian(spec, s_n.amplitudes))
    s_lower = build_amcs(AmcsParams(n - 1, params.alpha_plus, params.alpha_minus))
    root_n = np.sqrt(n)
    g_plus = root_n * np.vdot(s_lower.amplitudes, apply_annihilation(h_s, "plus").amplitudes)
    g_minus = root_n * np.vdot(s_lower.amplitudes, apply_annihilation(h_s, "minus").amplitudes)
    return complex(g_plus), complex(g_minus)


def j_plus_expectation(state: FockStateN) -> complex:
    """``<J+> = <a+^dagger a->``."""
    c = state.amplitudes
    n = state.n_total
    k = np.arange(n)
    return complex(np.sum(np.conj(c[1:]) * c[:-1] * np.sqrt((n - k) * (k + 1.0))))


def jz_expectation(state: FockStateN) -> float:
    c = state.amplitudes
    k = np.arange(state.n_total + 1)
    return float(np.sum(np.abs(c) ** 2 * (k - 0.5 * state.n_total)))


@dataclass(frozen=True)
class StokesVector:
    """Normalized Stokes vector ``r = 2 <J> / N`` on or inside the Poincare sphere."""

    r_x: float
    r_y: float
    r_z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r_x, self.r_y, self.r_z])

    @property
    def length(self) -> float:
        return float(np.sqrt(self.r_x**2 + self.r_y**2 + self.r_z**2))

    @classmethod
    def from_array(cls, r) -> "StokesVector":
        r = np.asarray(r, dtype=float)
        return cls(float(r[0]), float(r[1]), float(r[2]))


def stokes_of_state(state: FockStateN) -> StokesVector:
    if state.n_total == 0:
        raise SectorUnderflow("Stokes vector undefined on the vacuum sector")
    _require_normalized(state)
    jp = j_plus_expectation(state)
    scale = 2.0 / state.n_total
    return StokesVector(scale * jp.real, scale * jp.imag, scale * jz_expectation(state))


def stokes_of_params(params: AmcsParams) -> StokesVector:
    """Closed form for an AMCS: ``r_x + i r_y = 2 alpha+* alpha-``, ``r_z = p - (1 - p)``."""
    ap, am = params.alpha_plus, params.alpha_minus
    z = 2.0 * np.conj(ap) * am
    return StokesVector(float(z.real), float(z.imag), abs(ap) ** 2 - abs(am) ** 2)


def params_from_stokes(n_total: int, r) -> AmcsParams:
    """Gauge-fixed AMCS (alpha+ real, nonnegative) whose Stokes vector is ``r / |r|``."""
    r = np.asarray(r, dtype=float)
    length = np.linalg.norm(r)
    if length == 0.0:
        raise ValidationError("zero Stokes vector has no direction")
    rx, ry, rz = r / length
    ap = np.sqrt(max(0.5 * (1.0 + rz), 0.0))
    if ap == 0.0:
        return AmcsParams(n_total, 0.0, 1.0)
    return AmcsParams(n_total, ap, complex(rx, ry) / (2.0 * ap))
