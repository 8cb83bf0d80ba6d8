"""Time the compiled kernels against the numpy/Python fallbacks on solver-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import math
import time

import numpy as np

from tropskel import _kernels
from tropskel._kernels import _pykernels
from tropskel.ma import fermat_face_problem
from tropskel.valn import LaurentPolynomial, _prepare, lattice_points


def _best(f, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        f()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_laguerre(repeat: int) -> list[dict]:
    rows = []
    for g in (8, 16, 24):
        prob = fermat_face_problem(2, None, g)
        h = prob.initial_weights()
        ref = _pykernels.laguerre_2d(prob.Q, prob.sites, h)
        entry = {"kernel": "laguerre_2d", "sites": len(prob.sites)}
        entry["python_s"] = _best(lambda: _pykernels.laguerre_2d(prob.Q, prob.sites, h), repeat)
        if _kernels._c is not None:
            got = _kernels._c.laguerre_2d(prob.Q, prob.sites, h, 1)
            entry["max_abs_diff"] = float(max(np.abs(got[0] - ref[0]).max(), np.abs(got[1] - ref[1]).max()))
            entry["cython_s"] = _best(lambda: _kernels._c.laguerre_2d(prob.Q, prob.sites, h, 1), repeat)
            entry["speedup"] = entry["python_s"] / entry["cython_s"]
        rows.append(entry)
    return rows


def bench_torus(repeat: int) -> list[dict]:
    rows = []
    polys = [LaurentPolynomial.parse("1+z1+z2-2*z1*z2"), LaurentPolynomial.parse("z1^2+3*z2")]
    E, C, W, idx, _ = _prepare(polys, [0.2, 0.4], 0.05)
    for logn in (14, 16):
        N = 2**logn
        theta = 2 * math.pi * lattice_points(N, 2, np.array([0.1, 0.7]))
        ref = _pykernels.torus_logabs(theta, E, C, W, idx, 2)
        entry = {"kernel": "torus_logabs", "samples": N}
        entry["python_s"] = _best(lambda: _pykernels.torus_logabs(theta, E, C, W, idx, 2), repeat)
        if _kernels._c is not None:
            got = _kernels._c.torus_logabs(theta, E, C, W, idx, 2, 1)
            entry["max_abs_diff"] = float(np.abs(got - ref).max())
            entry["cython_s"] = _best(lambda: _kernels._c.torus_logabs(theta, E, C, W, idx, 2, 1), repeat)
            entry["speedup"] = entry["python_s"] / entry["cython_s"]
        rows.append(entry)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args()
    rows = bench_laguerre(args.repeat) + bench_torus(args.repeat)
    print(f"compiled backend available: {_kernels._c is not None}")
    print(f"{'kernel':<14}{'size':>8}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for r in rows:
        size = r.get("sites", r.get("samples"))
        cy = r.get("cython_s")
        print(f"{r['kernel']:<14}{size:>8}{1e3 * r['python_s']:>14.3f}"
              f"{(1e3 * cy if cy else float('nan')):>14.3f}{r.get('speedup', float('nan')):>10.1f}{r.get('max_abs_diff', float('nan')):>12.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
