"""Aggregation, collapse scoring, and the result file formats."""

import json
import os

import numpy as np
import pytest

from mgarena import analysis, bellpair, game
from mgarena.analysis import EnsembleStat
from mgarena.errors import ConfigError, EmptyInput, InsufficientOverlap, IoError
from mgarena.game import GameConfig


class TestAggregate:
    def test_constant_series(self):
        cfg = GameConfig("bellpair", 8, 0.0, steps=10, burn_in=None, seed=2)
        stats = analysis.aggregate(game.run_game(cfg), cfg)
        assert len(stats) == 1
        s = stats[0]
        assert (s.mean, s.stderr, s.count, s.bond, s.n) == (4.0, 0.0, 1, 4, 0)

    def test_two_trajectory_mean(self):
        cfg = GameConfig("bellpair", 8, 0.5, steps=20, burn_in=4, seed=3,
                         trajectories=2)
        trs = list(game.run_game(cfg))
        a = trs[0].entropies[0].mean()
        b = trs[1].entropies[0].mean()
        st = analysis.aggregate(trs, cfg)[0]
        assert st.mean == pytest.approx((a + b) / 2, abs=1e-15)
        assert st.stderr > 0 and st.count == 2

    def test_permutation_invariant(self):
        cfg = GameConfig("braiding", 6, 0.4, steps=8, burn_in=2, seed=5,
                         trajectories=4)
        trs = list(game.run_game(cfg))
        assert analysis.aggregate(trs, cfg) == analysis.aggregate(trs[::-1], cfg)

    def test_empty_input(self):
        cfg = GameConfig("bellpair", 8, 0.5, steps=4)
        with pytest.raises(EmptyInput):
            analysis.aggregate([], cfg)
        # a config whose window is too short for any measurement
        short = GameConfig("bellpair", 8, 0.5, steps=2, measure_every=5)
        with pytest.raises(EmptyInput):
            analysis.aggregate(game.run_game(short), short)

    def test_profile_rows_cover_every_bond(self):
        cfg = GameConfig("bellpair", 6, 0.5, steps=10, burn_in=2, seed=7,
                         record_profile=True, entropy_orders=(0, 1))
        stats = analysis.aggregate(game.run_game(cfg), cfg)
        assert len(stats) == 2 * 5
        assert [(s.n, s.bond) for s in stats] == [(n, b) for n in (0, 1)
                                                  for b in range(1, 6)]

    def test_stationary_half_chain_matches_exact_average(self):
        # relaxation at p = 1/2 is diffusive, so the window must be ~ L^2
        L = 64
        cfg = GameConfig("bellpair", L, 0.5, steps=100, burn_in=L * L,
                         seed=12, trajectories=1000)
        st = analysis.aggregate(game.run_game(cfg), cfg)[0]
        exact = float(bellpair.mean_critical_profile(L, L // 2))
        assert abs(st.mean - exact) <= 3 * st.stderr


def linear_curves(pc=0.5, nu=1.0, sigma=1.0, sizes=(16, 32, 64)):
    ps = np.linspace(0.3, 0.7, 21)
    return {L: [(p, (2.0 + 3.0 * (p - pc) * L ** (1 / nu)) * L ** sigma)
                for p in ps] for L in sizes}


class TestCollapseScore:
    def test_exact_scaling_form_scores_zero(self):
        assert analysis.collapse_score(linear_curves(), 0.5, 1.0, 1.0) <= 1e-12

    def test_wrong_exponent_scores_higher(self):
        curves = linear_curves()
        s0 = analysis.collapse_score(curves, 0.5, 1.0, 1.0)
        assert analysis.collapse_score(curves, 0.5, 1.5, 1.0) > s0
        assert analysis.collapse_score(curves, 0.5, 0.7, 1.0) > s0

    def test_scan_locates_the_minimizer(self):
        nu, score = analysis.scan_collapse(linear_curves(), 0.5,
                                           np.linspace(0.5, 2.0, 31), 1.0)
        assert abs(nu - 1.0) < 0.06
        assert score <= 1e-12

    def test_single_size_rejected(self):
        with pytest.raises(InsufficientOverlap):
            analysis.collapse_score({16: [(0.4, 1.0), (0.6, 2.0)]}, 0.5, 1, 1)

    def test_disjoint_windows_rejected(self):
        curves = {16: [(p, 1.0) for p in np.linspace(0.0, 0.1, 5)],
                  64: [(p, 1.0) for p in np.linspace(0.8, 0.9, 5)]}
        with pytest.raises(InsufficientOverlap):
            analysis.collapse_score(curves, 0.5, 1.0, 0.0)

    def test_malformed_inputs(self):
        curves = linear_curves()
        with pytest.raises(ConfigError):
            analysis.collapse_score(curves, 0.5, 0.0, 1.0)
        bad = {16: [(0.6, 1.0), (0.4, 2.0)], 32: [(0.4, 1.0), (0.6, 2.0)]}
        with pytest.raises(ConfigError):
            analysis.collapse_score(bad, 0.5, 1.0, 1.0)


def stat(**kw):
    base = dict(model="bellpair", L=8, p=0.5, n=0, bond=4, mean=1.25,
                stderr=0.5, count=10, seed=7)
    base.update(kw)
    return EnsembleStat(**base)


class TestFiles:
    def test_csv_schema_and_determinism(self, tmp_path):
        rows = [stat(bond=3), stat(bond=1, mean=1 / 3), stat(L=16, p=0.25)]
        path = tmp_path / "out.csv"
        analysis.export(rows, str(path), "csv")
        first = path.read_bytes()
        analysis.export(rows[::-1], str(path), "csv")
        assert path.read_bytes() == first
        lines = first.decode().splitlines()
        assert lines[0] == "model,L,p,n,bond,mean,stderr,count,seed"
        assert lines[1] == "bellpair,8,0.5,0,1,0.33333333333333331,0.5,10,7"
        assert b"\r" not in first

    def test_header_only_csv_for_empty_stats(self, tmp_path):
        path = tmp_path / "empty.csv"
        analysis.export([], str(path), "csv")
        assert path.read_text() == "model,L,p,n,bond,mean,stderr,count,seed\n"

    def test_json_round_trip(self, tmp_path):
        cfg = game.validate_config(GameConfig("braiding", 6, 0.125, steps=3,
                                              seed=11))
        rows = [stat(model="braiding", L=6, p=0.125, mean=2 / 3, seed=11)]
        path = tmp_path / "out.json"
        analysis.export(rows, str(path), "json", configs=[cfg])
        doc = json.loads(path.read_text())
        assert doc["stats"][0]["mean"] == 2 / 3
        assert doc["configs"][0]["model"] == "braiding"
        assert doc["configs"][0]["burn_in"] == 24
        assert "0.66666666666666663" in path.read_text()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigError):
            analysis.export([], str(tmp_path / "x.yaml"), "yaml")

    def test_failed_write_leaves_no_file(self, tmp_path):
        target = tmp_path / "nosuchdir" / "out.csv"
        with pytest.raises(IoError):
            analysis.export([stat()], str(target), "csv")
        assert not target.exists()

    def test_no_stray_temp_files(self, tmp_path):
        path = tmp_path / "out.csv"
        analysis.export([stat()], str(path), "csv")
        assert os.listdir(tmp_path) == ["out.csv"]
