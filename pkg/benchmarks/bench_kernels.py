"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Times the classical integrator (evolve preset and a dense GeneralHermitian
sector) and the QSL_cl objective grid, and checks that both backends agree.
"""
import argparse
import time

import numpy as np

from stokes_qsl import kernels
from stokes_qsl.fock import AmcsParams, CrossKerr, GeneralHermitian
from stokes_qsl.kernels import SectorOperator


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(21, 21)) + 1j * rng.normal(size=(21, 21))
    dense = GeneralHermitian(0.05 * (m + m.conj().T))
    preset = AmcsParams(10, 0.95, 0.29 + 0.12j)
    times = np.linspace(0, 60, 2000)
    p = np.linspace(0, 1, 1001)
    phi = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    return [
        ("integrate cross-Kerr N=10, t<=60", CrossKerr(0.05), 10,
         lambda op: op.integrate(preset.alpha_plus, preset.alpha_minus, times, 1e-10, 1e-10)[0]),
        ("integrate dense N=20, t<=60", dense, 20,
         lambda op: op.integrate(0.8, 0.6j, times, 1e-10, 1e-10)[0]),
        ("objective grid cross-Kerr N=50, 1001 p", CrossKerr(1.0), 50,
         lambda op: op.objective_grid(p, np.zeros(1))),
        ("objective grid dense N=20, 1001x256", dense, 20,
         lambda op: op.objective_grid(p, phi)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the NumPy backend only")
    print(f"{'case':42s} " + " ".join(f"{k:>10s}" for k in backends) + "    speedup  max|diff|")
    for label, spec, n, fn in cases():
        results = {}
        for name, mod in backends.items():
            op = SectorOperator(spec, n, backend=mod)
            results[name] = timed(lambda: fn(op), args.repeat)
        cols = " ".join(f"{results[k][0] * 1e3:8.1f}ms" for k in backends)
        if "cython" in results:
            speedup = results["python"][0] / results["cython"][0]
            diff = float(np.max(np.abs(results["python"][1] - results["cython"][1])))
            print(f"{label:42s} {cols} {speedup:9.1f}x  {diff:.1e}")
        else:
            print(f"{label:42s} {cols}")


if __name__ == "__main__":
    main()
