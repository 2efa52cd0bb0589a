"""Run configurations, the three output commands, and the parallel sweep engine.

Commands turn a :class:`RunConfig` into CSV tables by calling library
functions only; they add no computation of their own.
"""
from __future__ import annotations

import os
import shlex
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import dynamics, fock, metrics, plots, speed_limits
from .csvio import (
    DISTANCE_MAP_COLUMNS, EVOLVE_COLUMNS, QSL_SCAN_COLUMNS, SWEEP_SUMMARY_COLUMNS, CsvArtifact, write_csv,
)
from .errors import StokesQSLError, ValidationError

COMMANDS = ("evolve", "distance-map", "qsl-scan")
OUT_ENV = "STOKES_QSL_OUT"

# Reproduction presets; grid resolutions are our choice.
PRESETS = {
    "evolve": dict(n=10, eps=0.05, alpha_plus=0.95, alpha_minus=complex(0.29, 0.12), t_max=60.0, samples=2000),
    "distance-map": dict(n=10, p=0.9, eps_min=0.0, eps_max=0.5, eps_samples=200, t_max=100.0, samples=400),
    "qsl-scan": dict(eps=1.0, n_min=2, n_max=100),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: Optional[int] = None
    eps: Optional[float] = None
    alpha_plus: Optional[complex] = None
    alpha_minus: Optional[complex] = None
    p: Optional[float] = None
    t_max: Optional[float] = None
    samples: Optional[int] = None
    eps_min: Optional[float] = None
    eps_max: Optional[float] = None
    eps_samples: Optional[int] = None
    n_min: Optional[int] = None
    n_max: Optional[int] = None
    out: Optional[str] = None
    svg: bool = False
    workers: int = 1
    analytic: bool = False

    def resolved(self) -> "RunConfig":
        """Fill unset fields from the command preset and validate."""
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        preset = dict(PRESETS[self.command])
        if self.command == "evolve" and self.p is not None:
            preset.pop("alpha_plus")
            preset.pop("alpha_minus")
        updates = {k: v for k, v in preset.items() if getattr(self, k) is None}
        if self.out is None:
            updates["out"] = os.environ.get(OUT_ENV) or "."
        cfg = replace(self, **updates)
        cfg._validate()
        return cfg

    def _validate(self):
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if self.command in ("evolve", "distance-map"):
            if self.n is None or self.n < 0:
                raise ValidationError(f"photon number must be >= 0, got {self.n}")
            if self.samples is None or self.samples < 2:
                raise ValidationError("samples must be >= 2")
            if not self.t_max or self.t_max <= 0:
                raise ValidationError("t_max must be positive")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {self.p}")
        if self.command == "distance-map":
            if self.eps_samples < 1 or self.eps_max < self.eps_min:
                raise ValidationError("empty epsilon range")
        if self.command == "qsl-scan":
            if self.n_min < 1 or self.n_max < self.n_min:
                raise ValidationError(f"invalid photon-number range [{self.n_min}, {self.n_max}]")

    def initial_params(self) -> fock.AmcsParams:
        if self.p is not None:
            return fock.AmcsParams.from_p(self.n, self.p)
        return fock.AmcsParams(self.n, self.alpha_plus, self.alpha_minus)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_complex(text: str) -> complex:
    """``"RE,IM"`` or ``"RE"``."""
    parts = [s.strip() for s in str(text).split(",")]
    if len(parts) > 2 or not parts[0]:
        raise ValidationError(f"expected RE,IM but got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]) if len(parts) == 2 else 0.0)
    except ValueError as exc:
        raise ValidationError(f"expected RE,IM but got {text!r}") from exc


def _convert(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    kind = _FIELD_TYPES[key]
    try:
        if "complex" in kind:
            return parse_complex(value)
        if "bool" in kind:
            if value.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return value.lower() in ("1", "true", "yes")
        if "int" in kind:
            return int(value)
        if "float" in kind:
            return float(value)
    except ValueError as exc:
        raise ValidationError(f"bad value for {key}: {value!r}") from exc
    return value


def parse_assignments(items) -> dict:
    """``key=value`` tokens (dashes or underscores) into typed RunConfig fields."""
    out = {}
    for item in items:
        if "=" not in item:
            raise ValidationError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip().replace("-", "_")
        if key in ("n_range", "eps_range"):
            lo, hi = value.split(",")
            prefix = key.split("_")[0]
            out[f"{prefix}_min"] = _convert(f"{prefix}_min", lo)
            out[f"{prefix}_max"] = _convert(f"{prefix}_max", hi)
            continue
        if key not in _FIELD_TYPES or key == "command":
            raise ValidationError(f"unknown setting {key!r}")
        out[key] = _convert(key, value.strip())
    return out


def read_config_file(path) -> dict:
    """Declarative ``key=value`` file; ``#`` starts a comment."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    items = [ln.split("#", 1)[0].strip() for ln in lines]
    return parse_assignments([it for it in items if it])


# ---- commands ---------------------------------------------------------------------------


def evolve_table(cfg: RunConfig):
    params0 = cfg.initial_params()
    spec = fock.CrossKerr(cfg.eps)
    ecfg = dynamics.EvolutionConfig(t_max=cfg.t_max, n_samples=cfg.samples)
    s0 = fock.build_amcs(params0)
    quantum = dynamics.evolve_quantum(s0, spec, ecfg)
    if cfg.analytic:
        classical = dynamics.evolve_classical_kerr_analytic(params0, cfg.eps, ecfg.times)
    else:
        classical = dynamics.evolve_classical_ode(params0, spec, ecfg)
    rows = []
    for traj in (quantum, classical):
        fid = metrics.fidelity_rows(traj.state_vectors(), np.broadcast_to(s0.amplitudes, (len(traj), s0.dim)))
        for i, t in enumerate(traj.times):
            r = traj.stokes[i]
            rows.append((t, traj.regime, r[0], r[1], r[2], traj.speed[i], fid[i]))
    return EVOLVE_COLUMNS, rows, (quantum, classical)


def distance_map_grids(cfg: RunConfig):
    eps_grid = np.linspace(cfg.eps_min, cfg.eps_max, cfg.eps_samples)
    t_grid = np.linspace(0.0, cfg.t_max, cfg.samples)
    return eps_grid, t_grid


def distance_map_table(cfg: RunConfig):
    eps_grid, t_grid = distance_map_grids(cfg)
    d = metrics.distance_map(cfg.n, cfg.p, eps_grid, t_grid)
    rows = [(e, t, d[i, j]) for i, e in enumerate(eps_grid) for j, t in enumerate(t_grid)]
    return DISTANCE_MAP_COLUMNS, rows, (eps_grid, t_grid, d)


def qsl_scan_table(cfg: RunConfig):
    spec = fock.CrossKerr(cfg.eps)
    rows = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        qsl = speed_limits.qsl_spectrum(spec, n)
        closed = speed_limits.qsl_classical_kerr_closed(cfg.eps, n)
        numeric = speed_limits.qsl_classical(spec, n).value
        ratio = speed_limits.speedup_ratio(n) if (n >= 2 and cfg.eps != 0.0) else None
        rows.append((n, qsl, closed, numeric, ratio))
    return QSL_SCAN_COLUMNS, rows, None


_TABLES = {"evolve": evolve_table, "distance-map": distance_map_table, "qsl-scan": qsl_scan_table}
_STEMS = {"evolve": "evolve", "distance-map": "distance_map", "qsl-scan": "qsl_scan"}


def run_command(cfg: RunConfig) -> list[Path]:
    """Run one command, write its CSV (and SVG when requested); returns written paths."""
    cfg = cfg.resolved()
    columns, rows, extra = _TABLES[cfg.command](cfg)
    out_dir = Path(cfg.out)
    stem = _STEMS[cfg.command]
    art: CsvArtifact = write_csv(out_dir / f"{stem}.csv", columns, rows)
    written = [art.path]
    if cfg.svg:
        if cfg.command == "evolve":
            quantum, classical = extra
            fig = plots.stokes_plane_figure(quantum.stokes, classical.stokes)
        elif cfg.command == "distance-map":
            eps_grid, t_grid, d = extra
            fig = plots.heatmap_figure(d, eps_grid, t_grid)
        else:
            fig = plots.ratio_figure([r[0] for r in rows], [np.nan if r[4] is None else r[4] for r in rows])
        written.append(fig.save(out_dir / f"{stem}.svg"))
    return written


# ---- sweep ------------------------------------------------------------------------------


@dataclass(frozen=True)
class JobResult:
    index: int
    command: str
    ok: bool
    outputs: tuple = ()
    error: str = ""


@dataclass(frozen=True)
class InvalidJob:
    """A job line that could not be parsed; it fails on its own when run."""

    command: str
    error: str
    out: Optional[str] = None


def parse_jobs(text: str) -> list:
    """One job per line: ``<command> key=value ...``; blank lines and ``#`` comments ignored.

    Unparseable lines become :class:`InvalidJob` entries so that one bad line
    does not sink the batch.
    """
    jobs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tokens = shlex.split(line)
            jobs.append(RunConfig(command=tokens[0], **parse_assignments(tokens[1:])))
        except (ValidationError, ValueError) as exc:
            jobs.append(InvalidJob(line.split()[0], f"ValidationError: {exc}"))
    return jobs


def _job_dir(base: Path, index: int) -> str:
    return str(base / f"job_{index:03d}")


def _run_job(args) -> JobResult:
    index, job = args
    if isinstance(job, InvalidJob):
        return JobResult(index, job.command, False, error=job.error)
    try:
        paths = run_command(job)
    except StokesQSLError as exc:
        return JobResult(index, job.command, False, error=f"{type(exc).__name__}: {exc}")
    except OSError as exc:
        return JobResult(index, job.command, False, error=f"IoError: {exc}")
    return JobResult(index, job.command, True, outputs=tuple(str(p) for p in paths))


def run_sweep(jobs: list, workers: int = 1, out: Optional[str] = None) -> list[JobResult]:
    """Run independent jobs on a fixed-size process pool.

    Job ``i`` writes into ``<out>/job_<i>/`` unless it names its own ``out``;
    results come back in submission order, and a failing job never aborts
    the others.
    """
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    base = Path(out or os.environ.get(OUT_ENV) or ".")
    units = [(i, job if job.out else replace(job, out=_job_dir(base, i))) for i, job in enumerate(jobs)]
    if workers == 1 or len(units) <= 1:
        results = [_run_job(u) for u in units]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, units))
    rows = []
    for r in results:
        rel = ";".join(os.path.relpath(p, base) for p in r.outputs)
        rows.append((r.index, r.command, "ok" if r.ok else "failed", rel, r.error.replace(",", ";").replace("\n", " ")))
    write_csv(base / "sweep_summary.csv", SWEEP_SUMMARY_COLUMNS, rows)
    return results
