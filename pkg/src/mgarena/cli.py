"""Command line front end.

Subcommands
  game                 run trajectory ensembles and export entropy statistics
  bench-disentanglers  race the three disentangling strategies on one state
  critical-profile     bond profile at p = 1/2 against the exact average
  selftest             structural property checks (--level fast or full)
  collapse             scaling-collapse exponent scan over exported CSV data
  convert              translate between circuit and pairing text formats

Exit codes: 0 success, 1 selftest failure, 2 bad configuration or malformed
input, 3 output could not be written.  The seed comes from --seed when given,
else the MGARENA_SEED environment variable, else 0.
"""

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import analysis, bellpair, braiding, fgs, game, matchgate, rsf
from ._rng import make_rng
from .errors import (ConfigError, EmptyInput, FormatError, InsufficientOverlap,
                     InvalidConfig, InvalidLayout, IoError, TooLarge)
from .game import GameConfig

_USER_ERRORS = (ConfigError, InvalidConfig, InvalidLayout, FormatError,
                InsufficientOverlap, TooLarge, EmptyInput)


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MGARENA_SEED", "")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("MGARENA_SEED=%r is not an integer" % env)
    return 0


def _parse_fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError("cannot parse %r as a number" % text)


def _parse_p_specs(specs):
    """Decimal values and inclusive start:stop:step grids, exact arithmetic."""
    vals = []
    for spec in specs:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError("range %r is not start:stop:step" % spec)
            start, stop, step = (_parse_fraction(x) for x in parts)
            if step <= 0:
                raise ConfigError("range step must be positive in %r" % spec)
            if stop < start:
                raise ConfigError("empty range %r" % spec)
            v = start
            while v <= stop:
                vals.append(v)
                v += step
        else:
            vals.append(_parse_fraction(spec))
    out = []
    for v in vals:
        if v not in out:
            out.append(v)
    return out


def _parse_orders(text):
    if text is None:
        return None
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise ConfigError("cannot parse entropy orders %r" % text)


def _emit(text, out_path):
    if out_path:
        analysis._atomic_write(out_path, text)
    else:
        sys.stdout.write(text)


# -- game ---------------------------------------------------------------------

def _run_ensemble(cfg, workers):
    if workers <= 1:
        return analysis.aggregate(game.run_game(cfg), cfg)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(game.run_trajectory, cfg, i)
                for i in range(cfg.trajectories)]
        return analysis.aggregate((f.result() for f in futs), cfg)


def cmd_game(args):
    seed = _resolve_seed(args)
    orders = _parse_orders(args.orders)
    configs = []
    for L in args.L:
        for p in _parse_p_specs(args.p):
            configs.append(game.validate_config(GameConfig(
                model=args.model, L=L, p=float(p), steps=args.steps,
                burn_in=args.burn_in, trajectories=args.trajectories,
                seed=seed, entropy_orders=orders,
                record_profile=args.profile,
                measure_every=args.measure_every)))
    stats = []
    for cfg in configs:
        stats.extend(_run_ensemble(cfg, args.workers))
    if args.format == "json":
        _emit(analysis.json_text(stats, configs), args.out)
    else:
        _emit(analysis.csv_text(stats), args.out)
    return 0


# -- bench-disentanglers --------------------------------------------------------

def cmd_bench(args):
    res = game.disentangler_benchmark(args.L, _resolve_seed(args),
                                      steps=args.steps)
    lines = ["strategy,t,s0,s1,gates"]
    for strat in game.STRATEGIES:
        for i, t in enumerate(res.times):
            lines.append("%s,%d,%d,%s,%d" % (
                strat, t, res.s0[strat][i], "%.17g" % res.s1[strat][i],
                res.gates[strat][i]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# -- critical-profile -----------------------------------------------------------

def cmd_critical(args):
    L = args.L
    burn = args.burn_in if args.burn_in is not None else 2 * L * L
    cfg = game.validate_config(GameConfig(
        model="bellpair", L=L, p=0.5, steps=args.steps, burn_in=burn,
        trajectories=args.trajectories, seed=_resolve_seed(args),
        entropy_orders=(0,), record_profile=True))
    stats = analysis.aggregate(game.run_game(cfg), cfg)
    lines = ["bond,mean,stderr,exact,z"]
    for s in stats:
        exact = float(bellpair.mean_critical_profile(L, s.bond))
        if s.stderr > 0:
            z = (s.mean - exact) / s.stderr
        else:
            z = 0.0 if s.mean == exact else float("inf")
        lines.append("%d,%s,%s,%s,%s" % (s.bond, "%.17g" % s.mean,
                                         "%.17g" % s.stderr,
                                         "%.17g" % exact, "%.17g" % z))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# -- collapse -------------------------------------------------------------------

def _read_collapse_curves(path, order, p_c, window):
    curves = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        cols = set(reader.fieldnames or ())
        missing = {"L", "p", "n", "bond", "mean"} - cols
        if missing:
            raise FormatError("%s lacks columns %s" % (path, sorted(missing)))
        for row in reader:
            try:
                L = int(row["L"])
                p = float(row["p"])
                n = float(row["n"])
                bond = int(row["bond"])
                mean = float(row["mean"])
            except (TypeError, ValueError):
                raise FormatError("bad row %r in %s" % (row, path))
            if n != float(order) or bond != L // 2:
                continue
            if abs(p - p_c) > window + 1e-12:
                continue
            curves.setdefault(L, {}).setdefault(p, []).append(mean)
    out = {}
    for L, by_p in curves.items():
        pts = sorted((p, float(np.mean(v))) for p, v in by_p.items())
        if pts:
            out[L] = pts
    return out


def cmd_collapse(args):
    nu_grid = [float(v) for v in _parse_p_specs([args.nu])]
    curves = _read_collapse_curves(args.infile, args.order, args.pc,
                                   args.collapse_window)
    scores = [analysis.collapse_score(curves, args.pc, nu, args.sigma)
              for nu in nu_grid]
    best = int(np.argmin(scores))
    doc = {"p_c": args.pc, "sigma": args.sigma, "order": args.order,
           "sizes": sorted(curves), "nu_grid": nu_grid, "scores": scores,
           "best_nu": nu_grid[best], "best_score": scores[best]}
    if args.out:
        analysis._atomic_write(args.out, analysis._jdump(doc, 1) + "\n")
    print("best nu = %.6g  (score %.6g over L in %s)"
          % (doc["best_nu"], doc["best_score"], doc["sizes"]))
    return 0


# -- convert --------------------------------------------------------------------

def _pairing_circuit(config):
    """Deterministic staircase realization of a pairing: one maximally
    entangling creator per run, pushed outward by swap gates."""
    layout = bellpair.bell_to_rsf_layout(config)
    if layout.L < 2:
        raise ConfigError("circuit text needs at least two qubits")
    circ = rsf.empty_circuit(layout.L)
    creator = matchgate.from_params(np.pi / 8, -np.pi / 8, 0.0, 0.0)
    swap = matchgate.fswap()
    pos = 0
    for d, (k, l) in enumerate(layout.diagonals):
        circ._ks[d] = k - 1
        circ._ls[d] = l
        for j in range(l):
            g = creator if j == 0 else swap
            circ._rg[pos] = matchgate.to_orthogonal(g)
            circ._ug[pos] = g.u
            circ._uok[pos] = True
            pos += 1
    circ._meta[0] = len(layout.diagonals)
    assert bellpair.rsf_layout_to_bell(circ.layout) == config
    return circ


def cmd_convert(args):
    try:
        with open(args.infile, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise IoError("cannot read %s: %s" % (args.infile, e))
    head = next((ln for ln in text.splitlines() if ln.strip()), "")
    if head.startswith("RSF"):
        circ = rsf.from_text(text)
        out = bellpair.to_text(bellpair.rsf_layout_to_bell(circ.layout))
    elif head.startswith("BELL"):
        out = rsf.to_text(_pairing_circuit(bellpair.from_text(text)))
    else:
        raise FormatError("input is neither RSF nor BELL text")
    _emit(out, args.out)
    return 0


# -- selftest -------------------------------------------------------------------

def _dense3(gates):
    m = np.eye(8, dtype=complex)
    for u4, low in gates:
        m = (np.kron(u4, np.eye(2)) if low else np.kron(np.eye(2), u4)) @ m
    return m


def _phase_dev(m_in, m_out):
    ij = np.unravel_index(np.argmax(np.abs(m_in)), m_in.shape)
    ph = m_in[ij] / m_out[ij]
    if abs(abs(ph) - 1.0) > 1e-9:
        return 1.0
    return float(np.abs(m_in - ph * m_out).max())


def _st_yang_baxter(n):
    rng = make_rng(101)
    worst = 0.0
    for i in range(n):
        ltr = i % 2 == 0
        a, b, c = (matchgate.haar_matchgate(rng) for _ in range(3))
        v, vp, vpp = matchgate.yang_baxter(a, b, c, "ltr" if ltr else "rtl")
        m_in = _dense3([(c.u, ltr), (b.u, not ltr), (a.u, ltr)])
        m_out = _dense3([(vpp.u, not ltr), (vp.u, ltr), (v.u, not ltr)])
        worst = max(worst, _phase_dev(m_in, m_out))
    if worst > 1e-9:
        return "operator deviation %.3g > 1e-9" % worst
    return None


def _st_left_right(n):
    rng = make_rng(102)
    vac = np.zeros(8, dtype=complex)
    vac[0] = 1.0
    worst = 0.0
    for i in range(n):
        ltr = i % 2 == 0
        a, b = matchgate.haar_matchgate(rng), matchgate.haar_matchgate(rng)
        v, vp = matchgate.left_right_move(a, b, "ltr" if ltr else "rtl")
        s_in = _dense3([(b.u, not ltr), (a.u, ltr)]) @ vac
        s_out = _dense3([(vp.u, ltr), (v.u, not ltr)]) @ vac
        worst = max(worst, _phase_dev(s_in.reshape(8, 1), s_out.reshape(8, 1)))
    if worst > 1e-9:
        return "state deviation %.3g > 1e-9" % worst
    return None


def _st_bijection(max_l):
    for L in range(1, max_l + 1):
        configs = bellpair.enumerate_configs(L)
        if len(configs) != bellpair.telephone(L):
            return "L=%d has %d configs, want %d" % (L, len(configs),
                                                     bellpair.telephone(L))
        layouts = set()
        for c in configs:
            lay = bellpair.bell_to_rsf_layout(c)
            layouts.add(lay.diagonals)
            if bellpair.rsf_layout_to_bell(lay) != c:
                return "round trip broke at %r" % (c,)
        if len(layouts) != len(configs):
            return "map is not injective at L=%d" % L
    return None


def _st_profiles(max_l):
    for L in range(2, max_l + 1):
        for c in bellpair.enumerate_configs(L):
            lay = bellpair.bell_to_rsf_layout(c)
            if list(rsf.renyi0_profile(lay)) != list(bellpair.entropy_profile(c)):
                return "profiles differ for %r" % (c,)
    return None


def _st_dynamics(max_l):
    rng = make_rng(103)
    for L in range(2, max_l + 1):
        for c in bellpair.enumerate_configs(L):
            lay = bellpair.bell_to_rsf_layout(c)
            circ = rsf.empty_circuit(L)
            for k, l in reversed(lay.diagonals):
                for j in range(l):
                    circ = rsf.absorb(circ, matchgate.haar_matchgate(rng), k + j)
            if circ.layout != lay:
                return "realization of %r has layout %r" % (c, circ.layout)
            for b in range(1, L):
                after = rsf.absorb(circ, matchgate.haar_matchgate(rng), b)
                if bellpair.rsf_layout_to_bell(after.layout) != bellpair.entangle_move(c, b):
                    return "entangler differs at %r bond %d" % (c, b)
                moved = bellpair.disentangle_move(c, b)
                if rsf.can_disentangle(circ, b):
                    _, reduced = rsf.disentangle_gate(circ, b)
                    if bellpair.rsf_layout_to_bell(reduced.layout) != moved:
                        return "disentangler differs at %r bond %d" % (c, b)
                elif moved != c:
                    return "pair move acts where no reduction exists (%r, %d)" % (c, b)
    return None


def _st_markov():
    configs = bellpair.enumerate_configs(3)
    index = {c: i for i, c in enumerate(configs)}
    n = len(configs)
    t = np.zeros((n, n))
    for c in configs:
        for b in (1, 2):
            t[index[c], index[bellpair.entangle_move(c, b)]] += 0.25
            t[index[c], index[bellpair.disentangle_move(c, b)]] += 0.25
    if np.abs(t.sum(axis=1) - 1).max() > 1e-15:
        return "transition rows do not sum to 1"
    if np.abs(t.sum(axis=0) - 1).max() > 1e-15:
        return "transition columns do not sum to 1 (not doubly stochastic)"
    pi = np.full(n, 1.0 / n)
    if np.abs(pi @ t - pi).max() > 1e-12:
        return "uniform distribution is not stationary"
    return None


def _st_bell_rules():
    # the conditional swaps are where a wrong rule table shows first
    c = bellpair.BellConfig.from_pairs(4, [(1, 4), (2, 3)])
    if bellpair.entangle_move(c, 1) != c:
        return "entangler moved a normalized nested pair"
    if bellpair.disentangle_move(c, 1) == c:
        return "disentangler ignored a swappable nested pair"
    for L in range(2, 6):
        for c in bellpair.enumerate_configs(L):
            for b in range(1, L):
                e = bellpair.entangle_move(c, b)
                if e != c and bellpair.disentangle_move(e, b) != c:
                    return "disentangle does not undo entangle at (%r, %d)" % (c, b)
                d = bellpair.disentangle_move(c, b)
                if d != c and bellpair.entangle_move(d, b) != c:
                    return "entangle does not undo disentangle at (%r, %d)" % (c, b)
    return None


def _st_pfaffian(n):
    rng = make_rng(104)
    for _ in range(n):
        x = rng.normals(64).reshape(8, 8)
        a = x - x.T
        pf = fgs.pfaffian(a)
        det = np.linalg.det(a)
        if abs(pf * pf - det) > 1e-8 * max(abs(det), 1.0):
            return "pf^2 = %.17g but det = %.17g" % (pf * pf, det)
    return None


def _st_braid_disentangle(n):
    rng = make_rng(105)
    state = braiding.product_state(9)
    for _ in range(n):
        bond = 1 + rng.integers(8)
        state = braiding.random_braid(state, bond, rng)
        bond = 1 + rng.integers(8)
        before = braiding.entropy_at(state, bond)
        state = braiding.braid_disentangle(state, bond)
        if braiding.entropy_at(state, bond) > before:
            return "strand minimizer increased the cut"
    return None


def selftest_checks(level):
    full = level == "full"
    return [
        ("yang-baxter batch", lambda: _st_yang_baxter(1000 if full else 200)),
        ("left-right batch", lambda: _st_left_right(1000 if full else 200)),
        ("pairing bijection", lambda: _st_bijection(8 if full else 6)),
        ("rank profiles", lambda: _st_profiles(8 if full else 6)),
        ("move equivalence", lambda: _st_dynamics(6 if full else 5)),
        ("markov uniformity", _st_markov),
        ("pair move table", _st_bell_rules),
        ("pfaffian vs det", lambda: _st_pfaffian(1000 if full else 200)),
        ("braid minimizer", lambda: _st_braid_disentangle(400 if full else 100)),
    ]


def cmd_selftest(args):
    failures = 0
    for name, fn in selftest_checks(args.level):
        t0 = time.time()
        err = fn()
        dt = time.time() - t0
        if err is None:
            print("ok   %-20s (%.2fs)" % (name, dt))
        else:
            failures += 1
            print("FAIL %-20s %s" % (name, err))
    if failures:
        print("%d check(s) failed" % failures)
        return 1
    print("all checks passed")
    return 0


# -- wiring ---------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="mgarena",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("game", help="run trajectory ensembles")
    g.add_argument("--model", required=True)
    g.add_argument("--L", action="append", type=int, required=True)
    g.add_argument("--p", action="append", required=True,
                   help="value or inclusive start:stop:step; repeatable")
    g.add_argument("--trajectories", type=int, default=8)
    g.add_argument("--steps", type=int, required=True)
    g.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--orders", default=None, help="comma separated, e.g. 0,1")
    g.add_argument("--profile", action="store_true")
    g.add_argument("--measure-every", dest="measure_every", type=int, default=1)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", default=None)
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.set_defaults(func=cmd_game)

    b = sub.add_parser("bench-disentanglers", help="strategy comparison")
    b.add_argument("--L", type=int, required=True)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--steps", type=int, default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("critical-profile", help="p=1/2 bond profile vs exact")
    c.add_argument("--L", type=int, required=True)
    c.add_argument("--trajectories", type=int, default=200)
    c.add_argument("--steps", type=int, default=100)
    c.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_critical)

    s = sub.add_parser("selftest", help="structural property checks")
    s.add_argument("--level", choices=("fast", "full"), default="fast")
    s.set_defaults(func=cmd_selftest)

    k = sub.add_parser("collapse", help="finite-size collapse scan")
    k.add_argument("--in", dest="infile", required=True)
    k.add_argument("--pc", type=float, required=True)
    k.add_argument("--nu", default="0.5:2.0:0.025",
                   help="scan grid start:stop:step")
    k.add_argument("--sigma", type=float, default=1.0)
    k.add_argument("--order", type=float, default=0.0)
    k.add_argument("--collapse-window", dest="collapse_window", type=float,
                   default=0.15)
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_collapse)

    v = sub.add_parser("convert", help="RSF <-> BELL text translation")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_convert)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except _USER_ERRORS as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except (IoError, OSError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
