"""Time the hot kernels under both backends.

Runs itself once per backend in a subprocess (the choice is frozen at
import), then prints a table of per-call times and the numba speedup.

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def time_call(fn, min_time=0.2):
    fn()  # warm up / jit compile
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_time:
            return dt / n
        n = max(n + 1, int(n * min_time / max(dt, 1e-9)))


def run_battery(quick):
    import numpy as np

    from mgarena import fgs, game, rsf
    from mgarena._rng import make_rng
    from mgarena.game import GameConfig
    from mgarena import kernels

    L = 64 if quick else 256
    steps = 20 if quick else 50
    rows = []

    def add(label, fn):
        rows.append((label, time_call(fn, 0.1 if quick else 0.3)))

    cfg_bell = GameConfig(model="bellpair", L=L, p=0.5, steps=steps,
                          burn_in=0, trajectories=1, seed=1)
    add("bellpair moves (L=%d, %d sweeps)" % (L, steps),
        lambda: next(game.run_game(cfg_bell)))

    cfg_braid = GameConfig(model="braiding", L=L, p=0.5, steps=steps,
                           burn_in=0, trajectories=1, seed=1)
    add("braiding moves (L=%d, %d sweeps)" % (L, steps),
        lambda: next(game.run_game(cfg_braid)))

    Lr = 24 if quick else 48
    cfg_rsf = GameConfig(model="rsf-gate", L=Lr, p=0.5, steps=steps,
                         burn_in=0, trajectories=1, seed=1)
    add("rsf-gate moves (L=%d, %d sweeps)" % (Lr, steps),
        lambda: next(game.run_game(cfg_rsf)))

    circ = rsf.random_circuit(Lr, Lr * Lr // 4, make_rng(3))
    add("circuit to covariance (L=%d)" % Lr,
        lambda: rsf.evaluate_covariance(circ))

    g = rsf.evaluate_covariance(circ)
    add("entropy profile n=1 (L=%d)" % Lr,
        lambda: fgs.entanglement_profile(g, 1))

    mext, left = kernels.vn_build_ext(g, Lr // 2 - 1, Lr)
    r4 = kernels.from_params_r4(0.3, -0.2, 0.1, 0.7)
    add("bond entropy after gate (L=%d)" % Lr,
        lambda: kernels.vn_entropy_after(mext, left, r4, 1.0, 1e-8))

    Lv = 12 if quick else 16
    gv = fgs.random_pure_covariance(Lv, make_rng(5))
    add("vn gate search (L=%d)" % Lv,
        lambda: game.vn_disentangler(gv, Lv // 2))

    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--emit", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.emit:
        rows = run_battery(args.quick)
        json.dump(rows, sys.stdout)
        return

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, MGARENA_BACKEND=backend)
        cmd = [sys.executable, os.path.abspath(__file__), "--emit"]
        if args.quick:
            cmd.append("--quick")
        proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            sys.exit(1)
        results[backend] = dict((k, v) for k, v in json.loads(proc.stdout))

    width = max(len(k) for k in results["numba"])
    print("%-*s  %12s  %12s  %8s" % (width, "kernel", "numba", "numpy", "ratio"))
    for label in results["numba"]:
        tn = results["numba"][label]
        tp = results["numpy"][label]
        print("%-*s  %10.3f ms  %10.3f ms  %7.1fx"
              % (width, label, tn * 1e3, tp * 1e3, tp / tn))


if __name__ == "__main__":
    main()
