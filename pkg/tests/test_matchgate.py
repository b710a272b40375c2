import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgarena import matchgate as mg
from mgarena._rng import make_rng
from mgarena.errors import NotAMatchgate, NotOrthogonal

import oracle


def dense3(gates):
    m = np.eye(8, dtype=complex)
    for u4, b in gates:
        full = np.kron(u4, np.eye(2)) if b == 0 else np.kron(np.eye(2), u4)
        m = full @ m
    return m


class TestConstruction:
    def test_identity(self):
        g = mg.identity()
        assert mg.is_identity(g)
        assert np.allclose(mg.to_orthogonal(g), np.eye(4), atol=1e-14)

    def test_rejects_nonunitary(self):
        u = np.eye(4, dtype=complex)
        u[0, 0] = 2.0
        with pytest.raises(NotAMatchgate):
            mg.Matchgate(u)

    def test_rejects_bad_pattern(self):
        # a generic two-qubit unitary is not a matchgate
        u = np.eye(4, dtype=complex)
        u[0, 0] = u[1, 1] = np.sqrt(0.5)
        u[0, 1] = np.sqrt(0.5)
        u[1, 0] = -np.sqrt(0.5)
        with pytest.raises(NotAMatchgate):
            mg.Matchgate(u)

    def test_rejects_determinant_mismatch(self):
        # swap couples the inner block with det -1 against outer det +1
        u = np.zeros((4, 4), dtype=complex)
        u[0, 0] = u[3, 3] = 1.0
        u[1, 2] = u[2, 1] = 1.0
        with pytest.raises(NotAMatchgate):
            mg.Matchgate(u)

    def test_blocks(self):
        g = mg.matchgate(np.eye(2), np.eye(2))
        assert mg.is_identity(g)
        a = np.array([[0, 1], [-1, 0]], dtype=complex)
        g = mg.matchgate(a, a)
        assert np.allclose(g.outer, a) or np.allclose(g.outer, -a)

    def test_phase_normalization(self):
        g = mg.from_params(0.3, 0.1, 0.2, 0.7)
        g2 = mg.Matchgate(np.exp(0.4j) * g.u)
        assert np.abs(g.u - g2.u).max() < 1e-12


class TestKnownGates:
    def test_fswap_rotation_is_mode_swap(self):
        r = mg.to_orthogonal(mg.fswap())
        perm = np.zeros((4, 4))
        perm[0, 2] = perm[1, 3] = perm[2, 0] = perm[3, 1] = 1.0
        assert np.abs(r - perm).max() < 1e-14

    def test_zz_gate_rotation_is_minus_identity(self):
        # G(1, -1) is Z x Z, which flips every majorana
        g = mg.matchgate(np.eye(2), -np.eye(2))
        assert np.abs(mg.to_orthogonal(g) + np.eye(4)).max() < 1e-14
        zz = np.diag([1, -1, -1, 1]).astype(complex)
        assert np.abs(g.u - zz).max() < 1e-14

    def test_xx_quarter_turn_leaves_vacuum(self):
        # alpha = beta = pi/4 gives a product state on |00>
        g = mg.from_params(np.pi / 4, np.pi / 4, 0, 0)
        psi = g.u[:, 0]
        assert abs(abs(psi[0]) - 1.0) < 1e-12

    def test_bell_creator(self):
        g = mg.from_params(np.pi / 8, -np.pi / 8, 0, 0)
        psi = g.u[:, 0]
        assert abs(psi[0] - np.sqrt(0.5)) < 1e-12
        assert abs(psi[3] - 1j * np.sqrt(0.5)) < 1e-12
        s = oracle.entanglement_entropy(psi, 1, 2, n=1)
        assert abs(s - 1.0) < 1e-9

    def test_xx_half_entangles_fully(self):
        g = mg.from_params(np.pi / 4, 0.0, 0, 0)
        psi = g.u[:, 0]
        s = oracle.entanglement_entropy(psi, 1, 2, n=1)
        assert abs(s - 1.0) < 1e-9

    def test_partial_angle_entropy(self):
        # lambda = cos(pi/4) across the bond: S = h2((1 + lambda)/2)
        g = mg.from_params(np.pi / 8, 0.0, 0, 0)
        psi = g.u[:, 0]
        s = oracle.entanglement_entropy(psi, 1, 2, n=1)
        assert abs(s - 0.60087603669285616) < 1e-12


class TestOrthogonal:
    def test_round_trip_haar(self):
        rng = make_rng(101)
        for _ in range(300):
            g = mg.haar_matchgate(rng)
            r = mg.to_orthogonal(g)
            assert np.abs(r @ r.T - np.eye(4)).max() < 1e-13
            assert abs(np.linalg.det(r) - 1.0) < 1e-12
            g2 = mg.from_orthogonal(r)
            assert mg.same_up_to_phase(g, g2, 1e-12)

    def test_round_trip_near_pi_branch(self):
        # rotations by pi are where a log-based inverse loses the branch
        for g in (mg.fswap(), mg.matchgate(np.eye(2), -np.eye(2)),
                  mg.from_params(np.pi / 2, 0, 0, 0),
                  mg.from_params(np.pi / 2, np.pi / 2, 0, 0)):
            g2 = mg.from_orthogonal(mg.to_orthogonal(g))
            assert mg.same_up_to_phase(g, g2, 1e-10)

    def test_rejects_reflection(self):
        r = np.diag([1.0, 1.0, 1.0, -1.0])
        with pytest.raises(NotOrthogonal):
            mg.from_orthogonal(r)

    def test_rejects_nonorthogonal(self):
        with pytest.raises(NotOrthogonal):
            mg.from_orthogonal(np.ones((4, 4)))

    def test_fuse_is_homomorphism(self):
        rng = make_rng(7)
        for _ in range(50):
            a = mg.haar_matchgate(rng)
            b = mg.haar_matchgate(rng)
            f = mg.fuse(a, b)
            ra, rb = mg.to_orthogonal(a), mg.to_orthogonal(b)
            assert np.abs(mg.to_orthogonal(f) - rb @ ra).max() < 1e-12
            # and the unitary product matches up to phase
            prod = mg.Matchgate(b.u @ a.u)
            assert mg.same_up_to_phase(f, prod, 1e-12)


class TestYangBaxter:
    @pytest.mark.parametrize("direction", ["ltr", "rtl"])
    def test_operator_identity(self, direction):
        rng = make_rng(23 if direction == "ltr" else 24)
        lo, hi = (0, 1) if direction == "ltr" else (1, 0)
        for _ in range(100):
            a, b, c = (mg.haar_matchgate(rng) for _ in range(3))
            v, vp, vpp = mg.yang_baxter(a, b, c, direction)
            m_in = dense3([(c.u, lo), (b.u, hi), (a.u, lo)])
            m_out = dense3([(vpp.u, hi), (vp.u, lo), (v.u, hi)])
            ij = np.unravel_index(np.argmax(np.abs(m_in)), m_in.shape)
            ph = m_in[ij] / m_out[ij]
            assert abs(abs(ph) - 1.0) < 1e-9
            assert np.abs(m_in - ph * m_out).max() < 1e-9

    def test_fswap_braid_relation(self):
        f = mg.fswap()
        v, vp, vpp = mg.yang_baxter(f, f, f, mg.Direction.LTR)
        for g in (v, vp, vpp):
            assert mg.same_up_to_phase(g, f, 1e-10)

    def test_direction_enum_and_string_agree(self):
        rng = make_rng(55)
        a, b, c = (mg.haar_matchgate(rng) for _ in range(3))
        t1 = mg.yang_baxter(a, b, c, mg.Direction.LTR)
        t2 = mg.yang_baxter(a, b, c, "ltr")
        for g1, g2 in zip(t1, t2):
            assert np.abs(g1.u - g2.u).max() == 0.0


class TestLeftRight:
    @pytest.mark.parametrize("direction", ["ltr", "rtl"])
    def test_vacuum_identity(self, direction):
        rng = make_rng(31 if direction == "ltr" else 32)
        lo, hi = (0, 1) if direction == "ltr" else (1, 0)
        vac = np.zeros(8, dtype=complex)
        vac[0] = 1.0
        for _ in range(100):
            a, b = mg.haar_matchgate(rng), mg.haar_matchgate(rng)
            v, vp = mg.left_right_move(a, b, direction)
            s_in = dense3([(b.u, hi), (a.u, lo)]) @ vac
            s_out = dense3([(vp.u, lo), (v.u, hi)]) @ vac
            assert abs(1.0 - oracle.fidelity(s_in, s_out)) < 1e-10

    @pytest.mark.parametrize("direction", ["ltr", "rtl"])
    def test_degenerate_amplitudes(self, direction):
        # G(X, X) empties one of the two amplitude pairs
        gx = mg.matchgate(np.array([[0, 1], [1, 0]]), np.array([[0, 1], [1, 0]]))
        rng = make_rng(77)
        lo, hi = (0, 1) if direction == "ltr" else (1, 0)
        vac = np.zeros(8, dtype=complex)
        vac[0] = 1.0
        for a, b in [(gx, mg.haar_matchgate(rng)),
                     (mg.haar_matchgate(rng), gx), (gx, gx)]:
            v, vp = mg.left_right_move(a, b, direction)
            s_in = dense3([(b.u, hi), (a.u, lo)]) @ vac
            s_out = dense3([(vp.u, lo), (v.u, hi)]) @ vac
            assert abs(1.0 - oracle.fidelity(s_in, s_out)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3.2, 3.2), min_size=6, max_size=6))
def test_from_params_always_matchgate(params):
    g = mg.from_params(*params)
    # re-validate through the checking constructor
    g2 = mg.Matchgate(g.u)
    r = mg.to_orthogonal(g2)
    assert np.abs(r @ r.T - np.eye(4)).max() < 1e-12
    assert abs(np.linalg.det(r) - 1.0) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 62))
def test_haar_round_trip_property(seed):
    rng = make_rng(seed)
    g = mg.haar_matchgate(rng)
    g2 = mg.from_orthogonal(mg.to_orthogonal(g))
    assert mg.same_up_to_phase(g, g2, 1e-10)
