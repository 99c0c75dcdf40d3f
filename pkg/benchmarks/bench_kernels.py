"""Compare the compiled and pure-Python kernel backends.

Runs each sampler through both backends with identical seeds, checks the
outputs agree bit for bit, and reports wall time and speed-up.

    python3 benchmarks/bench_kernels.py --side 16 --sweeps 2000
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from gibbs_lattice import _kernels_py, kernels
from gibbs_lattice.graph import attach_ghost, build_box, grid_graph
from gibbs_lattice.samplers import ChainConfig, sample_ising, sample_loop_o1, sample_rc_general

try:
    from gibbs_lattice import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _time(fn, repeats: int):
    best, out = float("inf"), None
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def cases(side: int, sweeps: int):
    g = grid_graph(side, side)
    gg = attach_ghost(g)
    chain = ChainConfig(seed=1, burn_in=sweeps // 2, n_samples=sweeps // 2)
    rng = np.random.default_rng(0)
    box = build_box(2, side // 2)
    bits = (rng.random((sweeps * 10, box.n_edges)) < 0.5).astype(np.uint8)
    eu, ev = box.endpoints
    return {
        "glauber (ghost, h=0.1)": lambda impl: sample_ising(gg, 0.4, 0.1, chain, impl=impl).data,
        "rc heat bath (q=1.5)": lambda impl: sample_rc_general(g, 0.5, 1.5, 0.0, chain, impl=impl).data,
        "loop metropolis (x=0.5)": lambda impl: sample_loop_o1(g, 0.5, chain, impl=impl).data,
        "union-find components": lambda impl: kernels.batch_components(bits, eu, ev, box.n_vertices, impl=impl)[0],
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--side", type=int, default=12, help="grid side length")
    parser.add_argument("--sweeps", type=int, default=1000, help="total sweeps per chain")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--json", help="also write results to this file")
    args = parser.parse_args(argv)

    if compiled is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    results = []
    print(f"{'kernel':28s} {'cython [s]':>11s} {'python [s]':>11s} {'speed-up':>9s}  identical")
    for name, run in cases(args.side, args.sweeps).items():
        t_c, out_c = _time(lambda: run(compiled), args.repeats)
        t_p, out_p = _time(lambda: run(_kernels_py), 1)
        same = bool(np.array_equal(out_c, out_p))
        results.append({"kernel": name, "cython_s": t_c, "python_s": t_p, "speedup": t_p / t_c, "identical": same})
        print(f"{name:28s} {t_c:11.4f} {t_p:11.4f} {t_p / t_c:9.1f}  {same}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"side": args.side, "sweeps": args.sweeps, "results": results}, fh, indent=2)
    return 0 if all(r["identical"] for r in results) else 2


if __name__ == "__main__":
    raise SystemExit(main())
