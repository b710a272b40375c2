"""Game engine: scheduling, reproducibility, and the strategy shoot-out."""

import numpy as np
import pytest

from mgarena import fgs, game, matchgate
from mgarena.errors import BondOutOfRange, ConfigError, NotPure
from mgarena.game import GameConfig


def cfg(**kw):
    base = dict(model="bellpair", L=8, p=0.5, steps=4, burn_in=2, seed=3)
    base.update(kw)
    return GameConfig(**base)


class TestConfig:
    def test_rejects_unknown_model(self):
        with pytest.raises(ConfigError):
            game.validate_config(cfg(model="heisenberg"))

    def test_rejects_bad_numbers(self):
        for kw in (dict(L=1), dict(p=-0.1), dict(p=1.5), dict(steps=0),
                   dict(trajectories=0), dict(measure_every=0),
                   dict(burn_in=-1)):
            with pytest.raises(ConfigError):
                game.validate_config(cfg(**kw))

    def test_rejects_bad_entropy_orders(self):
        for orders in ((), (-1,), (0, 0.0), (float("nan"),)):
            with pytest.raises(ConfigError):
                game.validate_config(cfg(entropy_orders=orders))

    def test_burn_in_defaults(self):
        assert game.validate_config(cfg(burn_in=None, p=0.5)).burn_in == 32
        assert game.validate_config(cfg(burn_in=None, p=0.0)).burn_in == 128

    def test_default_orders_per_model(self):
        assert game.validate_config(cfg(entropy_orders=None)).entropy_orders == (0,)
        c = cfg(model="covariance-vn", entropy_orders=None)
        assert game.validate_config(c).entropy_orders == (1,)

    def test_orders_normalized_to_ints_when_whole(self):
        c = game.validate_config(cfg(entropy_orders=(0.0, 2.0, 0.5)))
        assert c.entropy_orders == (0, 2, 0.5)


class TestScheduling:
    def test_measurement_times(self):
        c = game.validate_config(cfg(steps=10, burn_in=3, measure_every=4))
        tr = game.run_trajectory(c, 0)
        assert tr.times.tolist() == [7, 11]

    def test_leftover_steps_still_run(self):
        # total number of moves, and hence the final state, ignores whether
        # the last step happened to be measured
        a = game.validate_config(cfg(model="rsf-gate", L=6, steps=5,
                                     measure_every=5, p=0.3))
        b = game.validate_config(cfg(model="rsf-gate", L=6, steps=5,
                                     measure_every=1, p=0.3))
        ra = game.run_trajectory(a, 0)
        rb = game.run_trajectory(b, 0)
        assert ra.gate_count == rb.gate_count
        assert ra.entropies[0][-1] == rb.entropies[0][-1]

    def test_times_strictly_increasing(self):
        tr = game.run_trajectory(game.validate_config(cfg(steps=7)), 0)
        assert (np.diff(tr.times) > 0).all()


class TestTrajectories:
    @pytest.mark.parametrize("model", game.MODELS)
    def test_pure_disentangling_leaves_product_state(self, model):
        c = GameConfig(model=model, L=6, p=1.0, steps=3, burn_in=2, seed=5)
        for tr in game.run_game(c):
            for series in tr.entropies.values():
                assert np.all(series == 0.0)

    @pytest.mark.parametrize("model", game.MODELS)
    def test_deterministic_per_seed(self, model):
        c = GameConfig(model=model, L=6, p=0.4, steps=3, burn_in=1, seed=17,
                       trajectories=2, record_profile=True)
        runs = []
        for _ in range(2):
            out = []
            for tr in game.run_game(c):
                out.append((tr.times.tolist(),
                            {n: s.tolist() for n, s in tr.entropies.items()},
                            {n: p.tolist() for n, p in tr.profiles.items()}))
            runs.append(out)
        assert runs[0] == runs[1]

    def test_trajectories_differ_and_carry_their_keys(self):
        c = game.validate_config(cfg(trajectories=3, steps=6, L=10))
        out = list(game.run_game(c))
        assert [tr.index for tr in out] == [0, 1, 2]
        assert len({tr.seed for tr in out}) == 3
        series = [tuple(tr.entropies[0]) for tr in out]
        assert len(set(series)) > 1

    def test_run_trajectory_matches_generator(self):
        c = game.validate_config(cfg(trajectories=2, steps=5))
        gen = list(game.run_game(c))
        solo = game.run_trajectory(c, 1)
        assert solo.entropies[0].tolist() == gen[1].entropies[0].tolist()

    def test_entangler_only_bellpair_saturates_exactly(self):
        # pair moves never lower any cut, so the half-chain count climbs to
        # its cap and stays there
        L = 8
        c = GameConfig(model="bellpair", L=L, p=0.0, steps=10, burn_in=None,
                       seed=2)
        tr = next(game.run_game(c))
        assert np.all(tr.entropies[0] == L // 2)

    def test_discrete_models_report_one_entropy_for_all_orders(self):
        for model in ("bellpair", "braiding"):
            c = GameConfig(model=model, L=8, p=0.3, steps=4, burn_in=2,
                           seed=9, entropy_orders=(0, 1, 0.5))
            tr = next(game.run_game(c))
            assert tr.entropies[0].tolist() == tr.entropies[1].tolist()
            assert tr.entropies[0].tolist() == tr.entropies[0.5].tolist()

    def test_profile_half_chain_column_matches_series(self):
        for model in game.MODELS:
            orders = (1,) if model == "covariance-vn" else (0,)
            c = GameConfig(model=model, L=6, p=0.4, steps=3, burn_in=1,
                           seed=4, record_profile=True, entropy_orders=orders)
            tr = next(game.run_game(c))
            n = orders[0]
            assert tr.profiles[n].shape == (3, 5)
            assert tr.profiles[n][:, 2].tolist() == tr.entropies[n].tolist()

    def test_rsf_gate_reports_final_gate_count(self):
        L = 6
        c = GameConfig(model="rsf-gate", L=L, p=0.0, steps=5, burn_in=None,
                       seed=3)
        tr = next(game.run_game(c))
        assert tr.gate_count == L * L // 4
        assert np.all(tr.entropies[0] == L // 2)

    def test_rsf_gate_continuous_orders_bounded_by_rank(self):
        c = GameConfig(model="rsf-gate", L=8, p=0.4, steps=5, burn_in=4,
                       seed=6, entropy_orders=(0, 1))
        tr = next(game.run_game(c))
        assert np.all(tr.entropies[1] <= tr.entropies[0] + 1e-9)


class TestModelEquivalence:
    @pytest.mark.parametrize("L", [8, 16])
    def test_bellpair_tracks_gate_game_rank_series(self, L):
        # same seed, same bond/coin stream: the discrete model replays the
        # circuit game's rank entropy exactly, move for move
        kw = dict(L=L, p=0.5, steps=25, burn_in=3, seed=11,
                  entropy_orders=(0,), record_profile=True)
        ra = next(game.run_game(GameConfig(model="bellpair", **kw)))
        rb = next(game.run_game(GameConfig(model="rsf-gate", **kw)))
        assert ra.entropies[0].tolist() == rb.entropies[0].tolist()
        assert ra.profiles[0].tolist() == rb.profiles[0].tolist()


class TestVnDisentangler:
    def test_bell_pair_is_cut(self):
        g = fgs.vacuum_covariance(2)
        g = fgs.apply_gate(g, 1, matchgate.from_params(np.pi / 8, -np.pi / 8, 0, 0))
        assert fgs.bond_entropy(g, 1, 1) > 0.99
        v = game.vn_disentangler(g, 1, 1)
        assert fgs.bond_entropy(fgs.apply_gate(g, 1, v), 1, 1) <= 1e-6

    def test_product_state_keeps_identity(self):
        g = fgs.vacuum_covariance(4)
        v = game.vn_disentangler(g, 2, 1)
        assert matchgate.is_identity(v)

    def test_never_increases_bond_entropy(self):
        opts = game.VnOpts(grid_points=5, nm_starts=2, nm_iters=80)
        from mgarena._rng import make_rng
        rng = make_rng(31)
        for i in range(100):
            g = fgs.random_pure_covariance(8, rng, n_gates=40)
            bond = 1 + rng.integers(7)
            pre = fgs.bond_entropy(g, bond, 1)
            v = game.vn_disentangler(g, bond, 1, opts)
            post = fgs.bond_entropy(fgs.apply_gate(g, bond, v), bond, 1)
            assert post <= pre + 1e-9

    def test_rejects_bad_inputs(self):
        g = fgs.vacuum_covariance(3)
        with pytest.raises(ConfigError):
            game.vn_disentangler(g, 1, 0)
        with pytest.raises(BondOutOfRange):
            game.vn_disentangler(g, 3, 1)
        with pytest.raises(NotPure):
            game.vn_disentangler(np.zeros((6, 6)), 1, 1)


class TestBenchmark:
    def test_strategy_ranking_small(self):
        L = 12
        res = game.disentangler_benchmark(L, 5)
        assert res.times.tolist() == list(range(2 * L + 1))
        first0 = {}
        for strat in game.STRATEGIES:
            s0 = res.s0[strat]
            assert s0[0] == L // 2
            hit = np.nonzero(s0 == 0)[0]
            first0[strat] = int(hit[0]) if hit.size else None
        assert first0["gate"] is not None and first0["gate"] <= 1.5 * L
        assert first0["renyi0"] is not None and first0["renyi0"] <= 2.5 * L
        assert first0["gate"] <= first0["renyi0"]
        # the numerical strategy drains the smooth entropy but cannot cut rank
        vn0 = res.s0["vn"]
        assert np.all(vn0[: 2 * L + 1] == vn0[0])
        assert res.s1["vn"][-1] < res.s1["vn"][0]
        assert res.gates["gate"][-1] == 0

    def test_deterministic(self):
        a = game.disentangler_benchmark(8, 3, steps=6)
        b = game.disentangler_benchmark(8, 3, steps=6)
        for strat in game.STRATEGIES:
            assert a.s0[strat].tolist() == b.s0[strat].tolist()
            assert a.s1[strat].tolist() == b.s1[strat].tolist()

    def test_rejects_oversized_chain(self):
        with pytest.raises(ConfigError):
            game.disentangler_benchmark(300, 1)
