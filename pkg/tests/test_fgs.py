import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgarena import fgs
from mgarena import matchgate as mg
from mgarena._rng import make_rng
from mgarena.errors import (AsymmetryTooLarge, BondOutOfRange, NotAntisymmetric,
                            NotPure, OddCount, OddDimension, RangeError)

import oracle


def random_state_pair(L, seed, n_gates):
    """Matching (covariance, dense state) built from the same gate list."""
    rng = make_rng(seed)
    gamma = fgs.vacuum_covariance(L)
    psi = oracle.vacuum_state(L)
    for _ in range(n_gates):
        b = rng.integers(L - 1) + 1
        g = mg.haar_matchgate(rng)
        gamma = fgs.apply_gate(gamma, b, g)
        psi = oracle.apply_gate_dense(psi, g.u, b, L)
    return gamma, psi


class TestBasics:
    def test_vacuum_shape_and_purity(self):
        g = fgs.vacuum_covariance(5)
        assert g.shape == (10, 10)
        assert np.abs(g + g.T).max() == 0.0
        assert fgs.purity_check(g)
        assert np.abs(g @ g.T - np.eye(10)).max() < 1e-15

    def test_vacuum_matches_dense(self):
        got = fgs.vacuum_covariance(3)
        want = oracle.covariance_dense(oracle.vacuum_state(3), 3)
        assert np.abs(got - want).max() < 1e-12

    def test_apply_gate_matches_dense(self):
        for L, seed, n in [(3, 5, 6), (4, 6, 12), (5, 7, 20)]:
            gamma, psi = random_state_pair(L, seed, n)
            want = oracle.covariance_dense(psi, L)
            assert np.abs(gamma - want).max() < 1e-10

    def test_apply_gate_is_pure_function(self):
        g0 = fgs.vacuum_covariance(4)
        snap = g0.copy()
        fgs.apply_gate(g0, 2, mg.fswap())
        assert np.abs(g0 - snap).max() == 0.0

    def test_bad_bond(self):
        g = fgs.vacuum_covariance(4)
        with pytest.raises(BondOutOfRange):
            fgs.apply_gate(g, 0, mg.fswap())
        with pytest.raises(BondOutOfRange):
            fgs.apply_gate(g, 4, mg.fswap())

    def test_asymmetry_guard(self):
        g = fgs.vacuum_covariance(3)
        g[0, 1] += 1e-6
        with pytest.raises(AsymmetryTooLarge):
            fgs.williamson_eigenvalues(g)

    def test_purity_guard(self):
        g = fgs.vacuum_covariance(4) * 0.5
        with pytest.raises(NotPure):
            fgs.entanglement_profile(g)

    def test_purity_after_many_gates(self):
        rng = make_rng(11)
        g = fgs.random_pure_covariance(24, rng, n_gates=2000)
        assert fgs.purity_check(g)


class TestSpectra:
    def test_williamson_vacuum(self):
        lam = fgs.williamson_eigenvalues(fgs.vacuum_covariance(4))
        assert lam.shape == (4,)
        assert np.abs(lam - 1.0).max() < 1e-14

    def test_williamson_partial(self):
        # one partially entangled bond: reduced 1-qubit block has lambda = cos(pi/4)
        g = fgs.apply_gate(fgs.vacuum_covariance(2), 1,
                           mg.from_params(np.pi / 8, 0, 0, 0))
        lam = fgs.williamson_eigenvalues(fgs.reduced(g, 1, 1))
        assert abs(lam[0] - np.cos(np.pi / 4)) < 1e-12

    def test_reduced_full_range_and_errors(self):
        g = fgs.vacuum_covariance(3)
        assert np.abs(fgs.reduced(g, 1, 3) - g).max() == 0.0
        assert np.abs(fgs.reduced(g, 2, 2) - g[2:4, 2:4]).max() == 0.0
        with pytest.raises(RangeError):
            fgs.reduced(g, 0, 2)
        with pytest.raises(RangeError):
            fgs.reduced(g, 3, 2)
        with pytest.raises(RangeError):
            fgs.reduced(g, 1, 4)

    def test_half_bell_pair_is_maximally_mixed(self):
        g = fgs.apply_gate(fgs.vacuum_covariance(2), 1,
                           mg.from_params(np.pi / 8, -np.pi / 8, 0, 0))
        sub = fgs.reduced(g, 1, 1)
        assert np.abs(sub).max() < 1e-12
        lam = fgs.williamson_eigenvalues(sub)
        assert abs(fgs.renyi_entropy(lam, 1) - 1.0) < 1e-12

    def test_window_entropy(self):
        lam = np.array([0.2, 0.9])
        full = fgs.renyi_entropy(lam, 1)
        lo = fgs.window_entropy(lam, 1, 0.0, 0.5)
        hi = fgs.window_entropy(lam, 1, 0.5, 1.0 + 1e-12)
        h2 = lambda p: -p * np.log2(p) - (1 - p) * np.log2(1 - p)
        assert abs(lo - h2(0.6)) < 1e-12
        assert abs(lo + hi - full) < 1e-12
        assert fgs.window_entropy(lam, 1, 0.99, 1.0) == 0.0

    def test_renyi_against_dense(self):
        for L, seed, n in [(4, 21, 10), (5, 22, 18)]:
            gamma, psi = random_state_pair(L, seed, n)
            for m in range(1, L):
                lam = fgs.williamson_eigenvalues(fgs.reduced(gamma, 1, m))
                for order in (0, 1, 2, 3):
                    want = oracle.entanglement_entropy(psi, m, L, n=order, tol=1e-9)
                    got = fgs.renyi_entropy(lam, order)
                    assert abs(got - want) < 1e-7, (L, m, order)

    def test_profile_matches_bondwise(self):
        gamma, psi = random_state_pair(5, 31, 25)
        prof = fgs.entanglement_profile(gamma, n=1)
        for m in range(1, 5):
            want = oracle.entanglement_entropy(psi, m, 5, n=1)
            assert abs(prof[m - 1] - want) < 1e-8
            assert abs(fgs.bond_entropy(gamma, m, 1) - want) < 1e-8

    def test_profile_left_right_symmetry(self):
        gamma, _ = random_state_pair(6, 41, 30)
        prof = fgs.entanglement_profile(gamma, n=1)
        rev = gamma[::-1, ::-1].copy()
        prof_r = fgs.entanglement_profile(rev, n=1)
        assert np.abs(prof - prof_r[::-1]).max() < 1e-8

    def test_renyi_order_inequality(self):
        gamma, _ = random_state_pair(5, 51, 16)
        lam = fgs.williamson_eigenvalues(fgs.reduced(gamma, 1, 2))
        s0 = fgs.renyi_entropy(lam, 0)
        s1 = fgs.renyi_entropy(lam, 1)
        s2 = fgs.renyi_entropy(lam, 2)
        assert s0 >= s1 - 1e-12 >= s2 - 2e-12


class TestPfaffian:
    def test_two_by_two(self):
        a = np.array([[0.0, 3.5], [-3.5, 0.0]])
        assert abs(fgs.pfaffian(a) - 3.5) < 1e-14

    def test_four_by_four_closed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a, b, c, d, e, f = rng.normal(size=6)
            m = np.array([
                [0, a, b, c],
                [-a, 0, d, e],
                [-b, -d, 0, f],
                [-c, -e, -f, 0],
            ])
            want = a * f - b * e + c * d
            assert abs(fgs.pfaffian(m) - want) < 1e-12 * max(1, abs(want))

    def test_odd_dimension_rejected(self):
        with pytest.raises(OddDimension):
            fgs.pfaffian(np.zeros((3, 3)))

    def test_rejects_symmetric(self):
        with pytest.raises(NotAntisymmetric):
            fgs.pfaffian(np.eye(4))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 9), st.sampled_from([2, 4, 6, 8]))
    def test_square_is_determinant(self, seed, n):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(n, n))
        a = m - m.T
        pf = fgs.pfaffian(a)
        det = np.linalg.det(a)
        assert abs(pf * pf - det) < 1e-8 * max(1.0, abs(det))


class TestMajoranaExpectation:
    def test_vacuum_adjacent_pair(self):
        g = fgs.vacuum_covariance(3)
        assert abs(fgs.majorana_expectation(g, (1, 2)) - 1.0) < 1e-14
        assert abs(fgs.majorana_expectation(g, (1, 2, 3, 4)) - 1.0) < 1e-14
        assert abs(fgs.majorana_expectation(g, (2, 3))) < 1e-14

    def test_against_dense(self):
        for L, seed, n in [(3, 61, 8), (4, 62, 14)]:
            gamma, psi = random_state_pair(L, seed, n)
            strings = [(1, 2), (2, 3), (1, 4), (1, 2, 3, 4), (2, 3, 4, 5)]
            if L >= 4:
                strings.append((1, 2, 5, 6))
                strings.append((1, 2, 3, 4, 5, 6, 7, 8))
            for s in strings:
                want = oracle.majorana_string(psi, L, s)
                assert abs(want.imag) < 1e-9
                got = fgs.majorana_expectation(gamma, s)
                assert abs(got - want.real) < 1e-8, s

    def test_odd_string_rejected(self):
        g = fgs.vacuum_covariance(3)
        with pytest.raises(OddCount):
            fgs.majorana_expectation(g, (1, 2, 3))

    def test_out_of_range_index(self):
        g = fgs.vacuum_covariance(3)
        with pytest.raises(IndexError):
            fgs.majorana_expectation(g, (5, 7))

    def test_rejects_unsorted(self):
        g = fgs.vacuum_covariance(3)
        with pytest.raises(ValueError):
            fgs.majorana_expectation(g, (2, 1))
