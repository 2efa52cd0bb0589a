"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise, or
when ``STOKES_QSL_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the NumPy implementation in ``_pykernels`` is used. Both expose identical
functions; :class:`SectorOperator` packages the per-sector arrays they need.
"""
from __future__ import annotations

import importlib
import os
from types import ModuleType

import numpy as np

from . import _pykernels
from .fock import CrossKerr, HamiltonianSpec, half_log_binomials, hamiltonian_diagonal, hamiltonian_matrix, is_diagonal


def _load_compiled() -> ModuleType | None:
    try:
        return importlib.import_module("stokes_qsl._ckernels")
    except ImportError:
        return None


_compiled = _load_compiled()
_force_python = os.environ.get("STOKES_QSL_PURE_PYTHON", "") not in ("", "0")

impl: ModuleType = _pykernels if (_compiled is None or _force_python) else _compiled
BACKEND = "python" if impl is _pykernels else "cython"


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


class SectorOperator:
    """A Hamiltonian prepared for kernel calls on one fixed-N sector."""

    def __init__(self, spec: HamiltonianSpec, n_total: int, backend: ModuleType | None = None):
        self.spec = spec
        self.n = int(n_total)
        self.is_diag = is_diagonal(spec)
        self.backend = impl if backend is None else backend
        if self.is_diag:
            self.hdiag = np.ascontiguousarray(hamiltonian_diagonal(spec, self.n), dtype=float)
            self.hmat = np.zeros((1, 1), dtype=complex)
        else:
            self.hmat = np.ascontiguousarray(hamiltonian_matrix(spec, self.n), dtype=complex)
            self.hdiag = np.zeros(self.n + 1)
        self.hlb_n = half_log_binomials(self.n)
        self.hlb_nm1 = half_log_binomials(self.n - 1) if self.n >= 1 else np.zeros(0)

    @property
    def _args(self):
        return (self.n, self.hmat, self.hdiag, self.is_diag, self.hlb_n, self.hlb_nm1)

    @property
    def phase_sensitive(self) -> bool:
        return not self.is_diag

    def grad(self, ap, am):
        return self.backend.grad_batch(*self._args, ap, am)

    def rhs(self, ap: complex, am: complex) -> tuple[complex, complex]:
        return self.backend.classical_rhs(*self._args, complex(ap), complex(am))

    def objective_grid(self, p, phi) -> np.ndarray:
        return self.backend.objective_grid(*self._args, np.asarray(p, float), np.asarray(phi, float))

    def objective(self, p: float, phi: float = 0.0) -> float:
        return float(self.backend.objective_point(*self._args, float(p), float(phi)))

    def integrate(self, ap0, am0, times, rtol, atol, renormalize=True, max_steps=10_000_000):
        return self.backend.integrate_classical(
            *self._args, complex(ap0), complex(am0), np.asarray(times, float),
            float(rtol), float(atol), bool(renormalize), int(max_steps),
        )


__all__ = ["BACKEND", "SectorOperator", "available_backends", "impl", "CrossKerr"]
