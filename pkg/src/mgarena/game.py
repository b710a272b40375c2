"""The unitary circuit game: entangler vs disentangler, one bond at a time.

A trajectory walks `burn_in + steps` time steps, each step being L moves.
Every move draws a bond uniformly from 1..L-1 and a coin; with probability p
the model's disentangler plays at that bond, otherwise the entangler does.
The same seed always produces the same bond/coin sequence in every model, so
runs are directly comparable across representations.

Models:
  bellpair       pair/unpair moves on Bell configurations
  braiding       random vs entropy-minimizing strand permutations
  rsf-gate       Haar matchgates absorbed into a staircase circuit vs the
                 gate remover
  covariance-vn  Haar matchgates on the covariance matrix vs a numerical
                 entropy minimizer at the bond
"""

import itertools
from dataclasses import dataclass, replace

import numpy as np

from . import fgs, kernels, rsf
from ._rng import MASK64, derive_key, gate_key, make_rng
from .errors import BondOutOfRange, ConfigError
from .matchgate import from_params, identity

MODELS = ("braiding", "bellpair", "rsf-gate", "covariance-vn")

_DUMMY_U = np.zeros((4, 4), dtype=np.complex128)


@dataclass(frozen=True)
class GameConfig:
    model: str
    L: int
    p: float
    steps: int
    burn_in: int = None        # None: 4L, or 2L^2 when p == 0
    trajectories: int = 1
    seed: int = 0
    entropy_orders: tuple = None   # None: (0,) discrete and rsf-gate, (1,) covariance-vn
    record_profile: bool = False
    measure_every: int = 1


def default_burn_in(L, p):
    """Equilibration allowance: diffusive saturation needs the L^2 budget."""
    return 2 * L * L if p == 0 else 4 * L


def _norm_order(n):
    v = float(n)
    if not np.isfinite(v) or v < 0:
        raise ConfigError("entropy order %r not in {0} or (0, inf)" % (n,))
    return int(v) if v == int(v) else v


def validate_config(cfg):
    """Check invariants and fill model-dependent defaults; returns a new config."""
    if cfg.model not in MODELS:
        raise ConfigError("unknown model %r (choose from %s)" % (cfg.model, ", ".join(MODELS)))
    if int(cfg.L) < 2:
        raise ConfigError("need at least two qubits, got L=%r" % (cfg.L,))
    if not 0.0 <= float(cfg.p) <= 1.0:
        raise ConfigError("p=%r outside [0, 1]" % (cfg.p,))
    if int(cfg.steps) < 1:
        raise ConfigError("steps=%r < 1" % (cfg.steps,))
    if int(cfg.trajectories) < 1:
        raise ConfigError("trajectories=%r < 1" % (cfg.trajectories,))
    if int(cfg.measure_every) < 1:
        raise ConfigError("measure_every=%r < 1" % (cfg.measure_every,))
    burn = cfg.burn_in
    if burn is None:
        burn = default_burn_in(int(cfg.L), float(cfg.p))
    elif int(burn) < 0:
        raise ConfigError("burn_in=%r < 0" % (cfg.burn_in,))
    orders = cfg.entropy_orders
    if orders is None:
        orders = (1,) if cfg.model == "covariance-vn" else (0,)
    orders = tuple(_norm_order(n) for n in orders)
    if not orders:
        raise ConfigError("entropy_orders must not be empty")
    if len(set(orders)) != len(orders):
        raise ConfigError("duplicate entropy orders in %r" % (cfg.entropy_orders,))
    return replace(cfg, model=str(cfg.model), L=int(cfg.L), p=float(cfg.p),
                   steps=int(cfg.steps), burn_in=int(burn),
                   trajectories=int(cfg.trajectories),
                   seed=int(cfg.seed) & MASK64, entropy_orders=orders,
                   record_profile=bool(cfg.record_profile),
                   measure_every=int(cfg.measure_every))


@dataclass(frozen=True)
class TrajectoryResult:
    index: int
    seed: int                  # this trajectory's stream key
    times: np.ndarray          # measurement times (steps), strictly increasing
    entropies: dict            # order -> half-chain series aligned with times
    profiles: dict = None      # order -> (len(times), L-1) bond profiles
    gate_count: int = None     # final circuit size (rsf-gate only)


def _measure_times(cfg):
    n = cfg.steps // cfg.measure_every
    return [cfg.burn_in + (k + 1) * cfg.measure_every for k in range(n)]


def _segments(cfg):
    """(target time, measure?) checkpoints covering burn_in + steps."""
    out = [(t, True) for t in _measure_times(cfg)]
    end = cfg.burn_in + cfg.steps
    if not out or out[-1][0] < end:
        out.append((end, False))
    return out


class _Recorder:
    def __init__(self, cfg, n_times):
        self.ent = {n: np.zeros(n_times) for n in cfg.entropy_orders}
        self.prof = None
        if cfg.record_profile:
            self.prof = {n: np.zeros((n_times, cfg.L - 1))
                         for n in cfg.entropy_orders}

    def result(self, cfg, index, key, times, gate_count=None):
        return TrajectoryResult(index=index, seed=int(key),
                                times=np.asarray(times, dtype=np.int64),
                                entropies=self.ent, profiles=self.prof,
                                gate_count=gate_count)


def _run_bellpair(cfg, index, key):
    L = cfg.L
    m = L // 2
    partner = np.full(L, -1, dtype=np.int64)
    times = _measure_times(cfg)
    rec = _Recorder(cfg, len(times))
    buf = np.zeros(max(L - 1, 1), dtype=np.int64)
    ka = np.uint64(key)
    ctr = 0
    t = 0
    i = 0
    for target, measure in _segments(cfg):
        ctr = int(kernels.bell_chunk(partner, ka, ctr, (target - t) * L, cfg.p, L))
        t = target
        if not measure:
            continue
        s = float(kernels.bell_entropy(partner, m))
        for n in cfg.entropy_orders:
            rec.ent[n][i] = s
        if rec.prof is not None:
            kernels.bell_profile(partner, buf)
            for n in cfg.entropy_orders:
                rec.prof[n][i] = buf[:L - 1]
        i += 1
    return rec.result(cfg, index, key, times)


def _run_braiding(cfg, index, key):
    L = cfg.L
    m = L // 2
    partner = np.arange(2 * L, dtype=np.int64)
    partner[0::2] += 1
    partner[1::2] -= 1
    times = _measure_times(cfg)
    rec = _Recorder(cfg, len(times))
    buf = np.zeros(2 * L, dtype=np.int64)
    ka = np.uint64(key)
    kb = np.uint64(gate_key(key))
    ctr_a = ctr_b = 0
    t = 0
    i = 0
    for target, measure in _segments(cfg):
        ctr_a, ctr_b = kernels.braid_chunk(partner, ka, ctr_a, kb, ctr_b,
                                           (target - t) * L, cfg.p, L)
        ctr_a = int(ctr_a)
        ctr_b = int(ctr_b)
        t = target
        if not measure:
            continue
        s = kernels.braid_entropy2(partner, m) / 2.0
        for n in cfg.entropy_orders:
            rec.ent[n][i] = s
        if rec.prof is not None:
            kernels.braid_profile2(partner, buf)
            for n in cfg.entropy_orders:
                rec.prof[n][i] = buf[:L - 1] / 2.0
        i += 1
    return rec.result(cfg, index, key, times)


def _run_rsf_gate(cfg, index, key):
    L = cfg.L
    m = L // 2
    circ = rsf.empty_circuit(L)
    evd, evq = circ._event_buffers()
    tmp_r = np.empty((4, 4))
    tmp_u = np.empty((4, 4), dtype=np.complex128)
    times = _measure_times(cfg)
    rec = _Recorder(cfg, len(times))
    cont_orders = [n for n in cfg.entropy_orders if n != 0]
    buf0 = np.zeros(max(L - 1, 1), dtype=np.int64)
    buf1 = np.zeros(max(L - 1, 1))
    ka = np.uint64(key)
    kb = np.uint64(gate_key(key))
    ctr_a = ctr_b = 0
    t = 0
    i = 0
    for target, measure in _segments(cfg):
        ctr_a, ctr_b = kernels.rsf_game_chunk(
            circ._ks, circ._ls, circ._meta, circ._rg, circ._ug, circ._uok,
            ka, ctr_a, kb, ctr_b, (target - t) * L, cfg.p, L, evd, evq,
            tmp_r, tmp_u)
        ctr_a = int(ctr_a)
        ctr_b = int(ctr_b)
        t = target
        if not measure:
            continue
        nd = int(circ._meta[0])
        if 0 in rec.ent:
            rec.ent[0][i] = float(kernels.rsf_renyi0_bond(circ._ks, circ._ls, nd, L, m))
            if rec.prof is not None:
                kernels.rsf_renyi0_profile(circ._ks, circ._ls, nd, L, buf0)
                rec.prof[0][i] = buf0[:L - 1]
        if cont_orders:
            # covariance is replayed from the circuit, not tracked per move
            g = rsf.evaluate_covariance(circ)
            for n in cont_orders:
                rec.ent[n][i] = float(kernels.cov_bond_entropy(g, m, L, float(n), fgs.EPS_RANK))
                if rec.prof is not None:
                    kernels.cov_profile(g, L, float(n), fgs.EPS_RANK, buf1)
                    rec.prof[n][i] = buf1[:L - 1]
        i += 1
    return rec.result(cfg, index, key, times, gate_count=circ.gate_count)


def _run_covariance_vn(cfg, index, key, opts=None):
    L = cfg.L
    m = L // 2
    opts = opts or VnOpts()
    grid_r, grid_p = _vn_grid(opts.grid_points)
    g = kernels.cov_vacuum(L)
    times = _measure_times(cfg)
    rec = _Recorder(cfg, len(times))
    buf = np.zeros(max(L - 1, 1))
    ka = np.uint64(key)
    kb = np.uint64(gate_key(key))
    ctr_a = ctr_b = 0
    moves = 0
    t = 0
    i = 0
    for target, measure in _segments(cfg):
        ctr_a, ctr_b, moves = kernels.cov_vn_chunk(
            g, ka, ctr_a, kb, ctr_b, (target - t) * L, cfg.p, L, 1.0,
            fgs.EPS_RANK, grid_r, grid_p, opts.nm_starts, opts.nm_iters,
            opts.nm_tol, moves)
        ctr_a = int(ctr_a)
        ctr_b = int(ctr_b)
        moves = int(moves)
        t = target
        if not measure:
            continue
        for n in cfg.entropy_orders:
            rec.ent[n][i] = float(kernels.cov_bond_entropy(g, m, L, float(n), fgs.EPS_RANK))
            if rec.prof is not None:
                kernels.cov_profile(g, L, float(n), fgs.EPS_RANK, buf)
                rec.prof[n][i] = buf[:L - 1]
        i += 1
    return rec.result(cfg, index, key, times)


_RUNNERS = {
    "bellpair": _run_bellpair,
    "braiding": _run_braiding,
    "rsf-gate": _run_rsf_gate,
    "covariance-vn": _run_covariance_vn,
}


def run_trajectory(cfg, index):
    """One trajectory of a validated config; safe to call from workers."""
    key = derive_key(cfg.seed, index)
    return _RUNNERS[cfg.model](cfg, index, key)


def run_game(cfg):
    """Yield one TrajectoryResult per trajectory, in index order."""
    cfg = validate_config(cfg)
    for index in range(cfg.trajectories):
        yield run_trajectory(cfg, index)


# -- bond entropy minimizer -------------------------------------------------

@dataclass(frozen=True)
class VnOpts:
    """Search budget for the numerical disentangler (fixed for reproducibility)."""
    grid_points: int = 7
    nm_starts: int = 3
    nm_iters: int = 200
    nm_tol: float = 1e-8


_GRIDS = {}


def _vn_grid(points):
    """Rotation payloads of the coarse scan: `points`^4 gates over [-pi/2, pi/2)^4."""
    if points not in _GRIDS:
        axis = -np.pi / 2 + np.pi * np.arange(points) / points
        gp = np.array(list(itertools.product(axis, repeat=4)))
        gr = np.empty((gp.shape[0], 4, 4))
        for i in range(gp.shape[0]):
            gr[i] = kernels.from_params_r4(gp[i, 0], gp[i, 1], gp[i, 2], gp[i, 3])
        _GRIDS[points] = (gr, gp)
    return _GRIDS[points]


def vn_disentangler(gamma, bond, n=1, opts=None):
    """Gate minimizing the order-n entropy across `bond`, never worse than 1.

    Coarse grid scan over the four rotation angles, then simplex refinement
    from the best grid points; the identity is always a candidate, so the
    returned gate cannot raise the bond entropy.
    """
    if not float(n) > 0:
        raise ConfigError("entropy order must be positive, got %r" % (n,))
    fgs.require_pure(gamma)
    L = fgs.chain_length(gamma)
    if not 1 <= bond <= L - 1:
        raise BondOutOfRange("bond %r outside 1..%d" % (bond, L - 1))
    opts = opts or VnOpts()
    grid_r, grid_p = _vn_grid(opts.grid_points)
    mext, left = kernels.vn_build_ext(np.ascontiguousarray(gamma), bond - 1, L)
    x, val, use = kernels.vn_opt(mext, left, float(n), fgs.EPS_RANK, grid_r,
                                 grid_p, opts.nm_starts, opts.nm_iters,
                                 opts.nm_tol)
    if not use:
        return identity()
    return from_params(x[0], x[1], x[2], x[3])


# -- strategy shoot-out -----------------------------------------------------

STRATEGIES = ("gate", "renyi0", "vn")

BENCH_VN_OPTS = VnOpts(grid_points=3, nm_starts=1, nm_iters=40)


@dataclass(frozen=True)
class BenchmarkResult:
    L: int
    seed: int
    times: np.ndarray          # steps 0..steps inclusive
    s0: dict                   # strategy -> half-chain rank entropy series
    s1: dict                   # strategy -> half-chain order-1 series
    gates: dict                # strategy -> circuit size series


def _bench_measure(circ, g, m):
    nd = int(circ._meta[0])
    s0 = int(kernels.rsf_renyi0_bond(circ._ks, circ._ls, nd, circ.L, m))
    s1 = float(kernels.cov_bond_entropy(g, m, circ.L, 1.0, fgs.EPS_RANK))
    return s0, s1, circ.gate_count


def disentangler_benchmark(L, seed, steps=None, vn_opts=BENCH_VN_OPTS):
    """Pure-disentangling race from one deeply scrambled circuit.

    All strategies replay the same bond sequence.  The gate remover plays
    whenever a removal exists; the rank strategy plays only when the removal
    lowers the rank entropy at its own bond; the numerical strategy plays
    the vn_disentangler gate, which moves weight but cannot cut rank.
    """
    L = int(L)
    if not 2 <= L <= 256:
        raise ConfigError("L=%r outside 2..256" % (L,))
    if steps is None:
        steps = 2 * L
    steps = int(steps)
    m = L // 2
    base = rsf.random_circuit(L, L ** 3, make_rng(seed))
    base_g = rsf.evaluate_covariance(base)
    key = np.uint64(derive_key(seed, 1))
    grid_r, grid_p = _vn_grid(vn_opts.grid_points)
    times = np.arange(steps + 1, dtype=np.int64)
    s0 = {}
    s1 = {}
    gates = {}
    for strat in STRATEGIES:
        circ = base.copy()
        g = base_g.copy()
        evd, evq = circ._event_buffers()
        out_r = np.empty((4, 4))
        out_u = np.empty((4, 4), dtype=np.complex128)
        c0 = np.zeros(steps + 1, dtype=np.int64)
        c1 = np.zeros(steps + 1)
        cg = np.zeros(steps + 1, dtype=np.int64)
        c0[0], c1[0], cg[0] = _bench_measure(circ, g, m)
        ctr = 0
        for step in range(1, steps + 1):
            for _ in range(L):
                b0 = int(kernels.u01(key, ctr) * (L - 1))
                ctr += 2      # coin drawn but the game here is all-disentangle
                if strat == "gate":
                    kernels.rsf_disentangle(circ._ks, circ._ls, circ._meta,
                                            circ._rg, circ._ug, circ._uok,
                                            b0, evd, evq, out_r, out_u)
                elif strat == "renyi0":
                    nd = int(circ._meta[0])
                    cur = kernels.rsf_renyi0_bond(circ._ks, circ._ls, nd, L, b0 + 1)
                    new = kernels.rsf_probe_new_bond_s0(circ._ks, circ._ls, nd,
                                                        L, b0, b0 + 1, evd, evq)
                    if 0 <= new < cur:
                        kernels.rsf_disentangle(circ._ks, circ._ls, circ._meta,
                                                circ._rg, circ._ug, circ._uok,
                                                b0, evd, evq, out_r, out_u)
                else:
                    mext, left = kernels.vn_build_ext(g, b0, L)
                    x, val, use = kernels.vn_opt(mext, left, 1.0, fgs.EPS_RANK,
                                                 grid_r, grid_p,
                                                 vn_opts.nm_starts,
                                                 vn_opts.nm_iters,
                                                 vn_opts.nm_tol)
                    if use:
                        r = np.asarray(kernels.from_params_r4(x[0], x[1], x[2], x[3]))
                        kernels.cov_apply(g, b0, r)
                        status = circ._absorb_inplace(r, _DUMMY_U, False, b0)
                        if status:
                            circ = rsf._recanonicalize(circ)
                            evd, evq = circ._event_buffers()
            if strat == "vn":
                kernels.cov_orthonormalize(g)
            else:
                g = rsf.evaluate_covariance(circ)
            c0[step], c1[step], cg[step] = _bench_measure(circ, g, m)
        s0[strat] = c0
        s1[strat] = c1
        gates[strat] = cg
    return BenchmarkResult(L=L, seed=int(seed), times=times, s0=s0, s1=s1,
                           gates=gates)
