import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from golden_cases import CASES
from stokes_qsl import cli, csvio, dynamics, fock, harness, metrics, speed_limits
from stokes_qsl.errors import ValidationError
from stokes_qsl.fock import AmcsParams, CrossKerr

GOLDEN = Path(__file__).parent / "golden"


def read(path):
    return csvio.read_csv(path)


def assert_tables_close(got_path, want_path, rtol=1e-9, atol=1e-12):
    """Headers, row count and text cells must match exactly; numbers to a tight tolerance.

    The compiled and pure-Python kernels may differ in the last bits, so the
    numeric comparison is not byte-exact.
    """
    gh, grows = read(got_path)
    wh, wrows = read(want_path)
    assert gh == wh
    assert len(grows) == len(wrows)
    for g, w in zip(grows, wrows):
        assert len(g) == len(w)
        for a, b in zip(g, w):
            try:
                fa, fb = float(a), float(b)
            except ValueError:
                assert a == b
                continue
            assert math.isclose(fa, fb, rel_tol=rtol, abs_tol=atol), (a, b)


# ---- CSV format -----------------------------------------------------------------------


def test_float_format_examples():
    assert csvio.format_float(0.0) == "0"
    assert csvio.format_float(1.0) == "1"
    assert csvio.format_float(0.1) == "0.10000000000000001"
    assert csvio.format_float(1e-5) == "1.0000000000000001e-05"
    assert csvio.format_float(2.5e6) == "2.5e+06"
    assert csvio.format_float(float("nan")) == "n/a"
    assert csvio.format_cell(None) == "n/a"
    assert csvio.format_cell(7) == "7"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    s = csvio.format_float(x)
    assert float(s) == x
    if x != 0.0:
        ax = abs(x)
        assert ("e" in s) == (ax < 1e-4 or ax >= 1e6)


def test_csv_bytes(tmp_path):
    art = csvio.write_csv(tmp_path / "x.csv", ("a", "b"), [(1, 0.5), ("z", None)])
    raw = (tmp_path / "x.csv").read_bytes()
    assert raw == b"a,b\n1,0.5\nz,n/a\n"
    assert art.row_count == 2 and art.columns == ("a", "b")
    assert not list(tmp_path.glob("*.tmp"))


# ---- golden files ---------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, tmp_path):
    command, settings = CASES[name]
    paths = harness.run_command(harness.RunConfig(command=command, out=str(tmp_path), **settings))
    assert_tables_close(paths[0], GOLDEN / f"{name}.csv")
    raw = paths[0].read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    raw.decode("utf-8")


def test_headers_pinned():
    assert read(GOLDEN / "evolve_preset.csv")[0] == list(csvio.EVOLVE_COLUMNS)
    assert csvio.EVOLVE_COLUMNS == ("t", "regime", "r_x", "r_y", "r_z", "speed", "fidelity_to_initial")
    assert csvio.DISTANCE_MAP_COLUMNS == ("eps", "t", "d_hs")
    assert csvio.QSL_SCAN_COLUMNS == ("N", "qsl", "qsl_cl_closed", "qsl_cl_numeric", "ratio")
    assert csvio.SCHEMA_VERSION == 1


def test_repeat_runs_byte_identical(tmp_path):
    cfg = harness.RunConfig(command="evolve", samples=50)
    a = harness.run_command(harness.RunConfig(**{**cfg.__dict__, "out": str(tmp_path / "a")}))[0]
    b = harness.run_command(harness.RunConfig(**{**cfg.__dict__, "out": str(tmp_path / "b")}))[0]
    assert a.read_bytes() == b.read_bytes()


# ---- command semantics ----------------------------------------------------------------


def test_evolve_values_come_from_library(tmp_path):
    path = harness.run_command(harness.RunConfig(command="evolve", n=5, p=0.8, eps=0.4, t_max=3.0,
                                                 samples=7, out=str(tmp_path)))[0]
    _, rows = read(path)
    params = AmcsParams.from_p(5, 0.8)
    cfg = dynamics.EvolutionConfig(t_max=3.0, n_samples=7)
    qu = dynamics.evolve_quantum(fock.build_amcs(params), CrossKerr(0.4), cfg)
    cl = dynamics.evolve_classical_ode(params, CrossKerr(0.4), cfg)
    s0 = fock.build_amcs(params).amplitudes
    fid = {t.regime: metrics.fidelity_rows(t.state_vectors(), np.broadcast_to(s0, (7, 6))) for t in (qu, cl)}
    for i, row in enumerate(rows):
        traj = qu if i < 7 else cl
        j = i % 7
        assert row[1] == traj.regime
        np.testing.assert_array_equal([float(x) for x in row[2:5]], traj.stokes[j])
        assert float(row[5]) == traj.speed[j]
        assert float(row[6]) == fid[traj.regime][j]


def test_evolve_zero_coupling_constant(tmp_path):
    path = harness.run_command(harness.RunConfig(command="evolve", eps=0.0, samples=11, t_max=5.0, out=str(tmp_path)))[0]
    _, rows = read(path)
    for regime in ("quantum", "classical"):
        r = np.array([[float(x) for x in row[2:5]] for row in rows if row[1] == regime])
        np.testing.assert_allclose(r, np.tile(r[0], (len(r), 1)), atol=1e-15)


def test_evolve_balanced_classical_stationary_quantum_moves(tmp_path):
    path = harness.run_command(harness.RunConfig(command="evolve", n=4, p=0.5, eps=0.5, samples=31, t_max=6.0,
                                                 out=str(tmp_path)))[0]
    _, rows = read(path)
    track = {reg: np.array([[float(x) for x in row[2:5]] for row in rows if row[1] == reg]) for reg in ("quantum", "classical")}
    assert np.ptp(track["classical"], axis=0).max() < 1e-12
    assert np.ptp(track["quantum"], axis=0).max() > 0.1


def test_analytic_classical_option(tmp_path):
    base = dict(command="evolve", samples=40)
    ode = harness.run_command(harness.RunConfig(**base, out=str(tmp_path / "a")))[0]
    ana = harness.run_command(harness.RunConfig(**base, analytic=True, out=str(tmp_path / "b")))[0]
    assert_tables_close(ode, ana, rtol=0, atol=1e-6)


def test_distance_map_collapse_rows(tmp_path):
    out = harness.run_command(harness.RunConfig(command="distance-map", n=10, p=0.9, eps_min=0.1, eps_max=0.2,
                                                eps_samples=2, t_max=40.0, samples=41, out=str(tmp_path)))[0]
    _, rows = read(out)
    d = np.array([float(r[2]) for r in rows]).reshape(2, 41)
    # row eps=0.2 at t equals row eps=0.1 at 2t
    np.testing.assert_allclose(d[1, :21], d[0, ::2], atol=1e-10)


def test_qsl_scan_rows(tmp_path):
    out = harness.run_command(harness.RunConfig(command="qsl-scan", out=str(tmp_path)))[0]
    _, rows = read(out)
    assert [int(r[0]) for r in rows] == list(range(2, 101))
    assert float(rows[0][4]) == pytest.approx(math.sqrt(2), abs=1e-15)
    for r in rows:
        closed, numeric = float(r[2]), float(r[3])
        assert abs(numeric - closed) < 1e-5 * closed
        assert float(r[4]) > 1
        assert float(r[1]) == speed_limits.qsl_spectrum(CrossKerr(1.0), int(r[0]))


def test_svg_outputs(tmp_path):
    for command, kw in (("evolve", dict(samples=30)), ("distance-map", dict(eps_samples=5, samples=9)),
                        ("qsl-scan", dict(n_max=12))):
        paths = harness.run_command(harness.RunConfig(command=command, svg=True, out=str(tmp_path), **kw))
        assert paths[1].suffix == ".svg"
        text = paths[1].read_text(encoding="utf-8")
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


# ---- configuration --------------------------------------------------------------------


def test_run_config_validation():
    bad = [dict(command="evolve", n=-1), dict(command="evolve", samples=1), dict(command="evolve", t_max=0.0),
           dict(command="evolve", p=1.5), dict(command="qsl-scan", n_min=5, n_max=3),
           dict(command="distance-map", eps_min=0.5, eps_max=0.1), dict(command="evolve", workers=0),
           dict(command="unknown")]
    for kw in bad:
        with pytest.raises(ValidationError):
            harness.RunConfig(**kw).resolved()


def test_preset_values():
    cfg = harness.RunConfig(command="evolve").resolved()
    assert (cfg.n, cfg.eps, cfg.alpha_plus, cfg.alpha_minus, cfg.t_max, cfg.samples) == (10, 0.05, 0.95, 0.29 + 0.12j, 60.0, 2000)
    cfg = harness.RunConfig(command="distance-map").resolved()
    assert (cfg.n, cfg.p, cfg.eps_min, cfg.eps_max, cfg.eps_samples, cfg.t_max, cfg.samples) == (10, 0.9, 0.0, 0.5, 200, 100.0, 400)
    cfg = harness.RunConfig(command="qsl-scan").resolved()
    assert (cfg.eps, cfg.n_min, cfg.n_max) == (1.0, 2, 100)


def test_assignment_parsing():
    got = harness.parse_assignments(["n=4", "alpha-plus=0.6,0.8", "eps_range=0.1,0.3", "svg=true"])
    assert got == dict(n=4, alpha_plus=0.6 + 0.8j, eps_min=0.1, eps_max=0.3, svg=True)
    for bad in (["n"], ["color=red"], ["n=four"], ["svg=maybe"]):
        with pytest.raises(ValidationError):
            harness.parse_assignments(bad)


def test_config_file_and_flag_precedence(tmp_path, monkeypatch):
    monkeypatch.delenv(harness.OUT_ENV, raising=False)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# comment\nn = 4\neps=0.5\nsamples=5\nt_max=2\nout={tmp_path / 'from_file'}\n", encoding="utf-8")
    assert cli.main(["evolve", "--config", str(cfg), "--n", "3"]) == 0
    _, rows = read(tmp_path / "from_file" / "evolve.csv")
    assert len(rows) == 10
    ref = dynamics.evolve_quantum(fock.build_amcs(AmcsParams(3, 0.95, 0.29 + 0.12j)), CrossKerr(0.5),
                                  dynamics.EvolutionConfig(t_max=2.0, n_samples=5))
    assert float(rows[4][5]) == ref.speed[4]


def test_env_sets_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(harness.OUT_ENV, str(tmp_path / "env"))
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"out={tmp_path / 'file'}\n", encoding="utf-8")
    assert cli.main(["qsl-scan", "--n-range", "2,4", "--config", str(cfg)]) == 0
    assert (tmp_path / "env" / "qsl_scan.csv").exists()
    assert not (tmp_path / "file").exists()
    # an explicit flag still wins
    assert cli.main(["qsl-scan", "--n-range", "2,4", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "qsl_scan.csv").exists()


# ---- exit codes -----------------------------------------------------------------------


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["qsl-scan", "--n-range", "2,3", "--out", str(tmp_path)]) == 0
    assert cli.main(["evolve", "--n", "-2", "--out", str(tmp_path)]) == 1
    assert cli.main(["evolve", "--alpha-plus", "2,0", "--out", str(tmp_path)]) == 1
    assert cli.main(["evolve", "--alpha-plus", "x,y"]) == 1
    assert cli.main(["evolve", "--not-a-flag"]) == 1
    assert cli.main([]) == 1
    assert cli.main(["evolve", "--config", str(tmp_path / "missing.cfg")]) == 2
    (tmp_path / "blocker").write_text("", encoding="utf-8")
    assert cli.main(["qsl-scan", "--n-range", "2,3", "--out", str(tmp_path / "blocker" / "sub")]) == 2


def test_console_script_runs(tmp_path):
    env = dict(os.environ, **{harness.OUT_ENV: str(tmp_path)})
    res = subprocess.run([sys.executable, "-m", "stokes_qsl", "qsl-scan", "--n-range", "2,3"], env=env,
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert (tmp_path / "qsl_scan.csv").exists()


# ---- sweep ----------------------------------------------------------------------------


def sweep_jobs(count):
    lines = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            lines.append(f"evolve n={2 + i % 9} eps={0.05 * (1 + i % 5)} samples=40 t_max=8")
        elif kind == 1:
            lines.append(f"distance-map n={3 + i % 7} p=0.{1 + i % 8} eps_samples=4 samples=15 t_max=20")
        elif kind == 2:
            lines.append(f"qsl-scan n_range=2,{6 + i % 11} eps={0.5 + i % 3}")
        else:
            lines.append(f"evolve n={4 + i % 5} alpha_plus=0.6 alpha_minus=0,0.8 eps=0.3 samples=25 t_max=4")
    return "\n".join(lines) + "\n"


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_sweep_single_job_matches_direct(tmp_path):
    harness.run_sweep(harness.parse_jobs("qsl-scan n_range=2,9\n"), workers=1, out=str(tmp_path / "sw"))
    direct = harness.run_command(harness.RunConfig(command="qsl-scan", n_min=2, n_max=9, out=str(tmp_path / "d")))[0]
    assert (tmp_path / "sw" / "job_000" / "qsl_scan.csv").read_bytes() == direct.read_bytes()


def test_sweep_worker_count_invariance(tmp_path):
    jobs = harness.parse_jobs(sweep_jobs(64))
    assert len(jobs) == 64
    one = harness.run_sweep(jobs, workers=1, out=str(tmp_path / "w1"))
    eight = harness.run_sweep(jobs, workers=8, out=str(tmp_path / "w8"))
    assert all(r.ok for r in one) and all(r.ok for r in eight)
    a, b = tree_bytes(tmp_path / "w1"), tree_bytes(tmp_path / "w8")
    assert len(a) == 65
    assert a == b


def test_sweep_partial_failure(tmp_path, capsys):
    jobs = tmp_path / "jobs.txt"
    jobs.write_text("qsl-scan n_range=2,4\nevolve n=-3\n\n# skipped\nevolve n=three\nqsl-scan n_range=3,5\n", encoding="utf-8")
    code = cli.main(["sweep", str(jobs), "--workers", "2", "--out", str(tmp_path / "out")])
    assert code == 3
    _, rows = read(tmp_path / "out" / "sweep_summary.csv")
    assert [r[2] for r in rows] == ["ok", "failed", "failed", "ok"]
    assert (tmp_path / "out" / "job_003" / "qsl_scan.csv").exists()
    assert "job 1" in capsys.readouterr().err


def test_sweep_all_ok_and_missing_file(tmp_path):
    jobs = tmp_path / "jobs.txt"
    jobs.write_text("qsl-scan n_range=2,3\n", encoding="utf-8")
    assert cli.main(["sweep", str(jobs), "--out", str(tmp_path / "o")]) == 0
    assert cli.main(["sweep", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["sweep", str(jobs), "--workers", "0", "--out", str(tmp_path / "o")]) == 1
