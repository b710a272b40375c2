"""Reduced staircase form circuits.

A circuit on L qubits is a product D1 ... Dn of staircase diagonals applied
right to left (Dn first).  Diagonal i is a run of gates at bonds
k_i, k_i+1, ..., k_i+l_i-1 applied left to right, and the first bonds are
sparse: k_{i+1} >= k_i + 2.  Every matchgate circuit acting on the vacuum
can be brought to this form, which caps the gate count at floor(L^2/4).

Absorbing a gate walks it down the staircase with exchange and vacuum-fold
moves; when the walk ends in a fusion the count stays put (or drops), and a
reduction at a bond is exactly an absorption walk run backwards from such a
fusion.  All indices in this module are 1-based; kernels are 0-based.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (BondOutOfRange, FormatError, InvalidLayout,
                     NotDisentanglable)
from .matchgate import Matchgate, to_orthogonal

EPS_ID = 1e-8


def max_gate_count(L):
    return L * L // 4


@dataclass(frozen=True)
class RsfLayout:
    """Shape of a staircase circuit: ((k1, l1), (k2, l2), ...), 1-based."""
    L: int
    diagonals: tuple

    def gate_count(self):
        return sum(l for _, l in self.diagonals)


def validate_layout(layout):
    L = layout.L
    if L < 1:
        raise InvalidLayout("need at least one qubit")
    prev_k = -10
    for item in layout.diagonals:
        if len(item) != 2:
            raise InvalidLayout("diagonal entries must be (first bond, length)")
        k, l = item
        if l < 1:
            raise InvalidLayout("diagonal length %r < 1" % (l,))
        if k < 1 or k + l - 1 > L - 1:
            raise InvalidLayout("diagonal (%r, %r) leaves bonds 1..%d" % (k, l, L - 1))
        if k < prev_k + 2:
            raise InvalidLayout("first bonds %d, %d closer than 2" % (prev_k, k))
        prev_k = k
    if layout.gate_count() > max_gate_count(L):
        raise InvalidLayout("gate count exceeds L^2/4")
    return layout


class RsfCircuit:
    """Mutable staircase circuit; the module-level operations are pure."""

    __slots__ = ("L", "_meta", "_ks", "_ls", "_rg", "_ug", "_uok")

    def __init__(self, L):
        if L < 2:
            raise InvalidLayout("need at least two qubits")
        self.L = int(L)
        cap_d = L // 2 + 2
        cap_g = max_gate_count(L) + 4
        self._meta = np.zeros(1, dtype=np.int64)
        self._ks = np.zeros(cap_d, dtype=np.int64)
        self._ls = np.zeros(cap_d, dtype=np.int64)
        self._rg = np.zeros((cap_g, 4, 4))
        self._ug = np.zeros((cap_g, 4, 4), dtype=np.complex128)
        self._uok = np.zeros(cap_g, dtype=np.bool_)

    # -- views ------------------------------------------------------------

    @property
    def gate_count(self):
        return int(kernels.rsf_total(self._ls, int(self._meta[0])))

    @property
    def layout(self):
        nd = int(self._meta[0])
        return RsfLayout(self.L, tuple(
            (int(self._ks[d]) + 1, int(self._ls[d])) for d in range(nd)))

    def gate(self, d, j):
        """Gate j (0-based within diagonal d, 0-based) as a Matchgate."""
        nd = int(self._meta[0])
        if not 0 <= d < nd or not 0 <= j < self._ls[d]:
            raise IndexError("no gate (%r, %r)" % (d, j))
        pos = int(kernels.rsf_gstart(self._ls, d)) + j
        kernels.rsf_ensure_u(self._rg, self._ug, self._uok, pos)
        return Matchgate._wrap(self._ug[pos].copy())

    def gates(self):
        """[(bond, Matchgate)] in application order (first applied first)."""
        nd = int(self._meta[0])
        out = []
        for d in range(nd - 1, -1, -1):
            k = int(self._ks[d])
            for j in range(int(self._ls[d])):
                out.append((k + j + 1, self.gate(d, j)))
        return out

    def copy(self):
        c = RsfCircuit.__new__(RsfCircuit)
        c.L = self.L
        c._meta = self._meta.copy()
        c._ks = self._ks.copy()
        c._ls = self._ls.copy()
        c._rg = self._rg.copy()
        c._ug = self._ug.copy()
        c._uok = self._uok.copy()
        return c

    def __repr__(self):
        return "RsfCircuit(L=%d, gates=%d, diagonals=%d)" % (
            self.L, self.gate_count, int(self._meta[0]))

    # -- in-place core (used by the pure wrappers and the game loop) ------

    def _absorb_inplace(self, r, u, u_ok, bond0):
        return int(kernels.rsf_absorb(self._ks, self._ls, self._meta,
                                      self._rg, self._ug, self._uok,
                                      r, u, u_ok, bond0, self.L))

    def _event_buffers(self):
        n = self.L // 2 + 2
        return np.empty(n, dtype=np.int64), np.empty(n, dtype=np.int64)


def empty_circuit(L):
    return RsfCircuit(L)


def _check_bond(circ, bond):
    if not 1 <= bond <= circ.L - 1:
        raise BondOutOfRange("bond %r outside 1..%d" % (bond, circ.L - 1))


def _recanonicalize(circ):
    """Rebuild by re-absorbing all non-identity gates in application order.

    Used when a fusion produced an identity that could not be dropped in
    place without breaking the layout constraints."""
    cur = circ
    for _ in range(3):
        nxt = RsfCircuit(cur.L)
        status = 0
        nd = int(cur._meta[0])
        for d in range(nd - 1, -1, -1):
            k = int(cur._ks[d])
            off = int(kernels.rsf_gstart(cur._ls, d))
            for j in range(int(cur._ls[d])):
                pos = off + j
                if kernels.is_id_r(cur._rg[pos], EPS_ID):
                    continue
                if cur._uok[pos]:
                    status |= nxt._absorb_inplace(
                        cur._rg[pos].copy(), cur._ug[pos].copy(), True, k + j)
                else:
                    status |= nxt._absorb_inplace(
                        cur._rg[pos].copy(), _DUMMY_U, False, k + j)
        if status == 0:
            return nxt
        cur = nxt
    return cur


_DUMMY_U = np.zeros((4, 4), dtype=np.complex128)


def absorb(circ, gate, bond):
    """Circuit for gate . circ (gate applied after everything), same form."""
    _check_bond(circ, bond)
    c = circ.copy()
    r = to_orthogonal(gate)
    status = c._absorb_inplace(r, np.ascontiguousarray(gate.u), True, bond - 1)
    if status:
        c = _recanonicalize(c)
    return c


def can_disentangle(circ, bond):
    """Whether a gate at this bond can lower the gate count."""
    _check_bond(circ, bond)
    evd, evq = circ._event_buffers()
    tt, _, _ = kernels.rsf_probe(circ._ks, circ._ls, int(circ._meta[0]),
                                 bond - 1, evd, evq)
    return int(tt) != 0


def disentangle_gate(circ, bond):
    """Find a gate v at `bond` with count(v . circ) = count(circ) - 1.

    Returns (v, reduced_circuit); raises NotDisentanglable when no gate at
    this bond lowers the count."""
    _check_bond(circ, bond)
    c = circ.copy()
    evd, evq = c._event_buffers()
    out_r = np.empty((4, 4))
    out_u = np.empty((4, 4), dtype=np.complex128)
    ok = kernels.rsf_disentangle(c._ks, c._ls, c._meta, c._rg, c._ug, c._uok,
                                 bond - 1, evd, evq, out_r, out_u)
    if not ok:
        raise NotDisentanglable("no reduction at bond %d" % bond)
    v = Matchgate._wrap(np.asarray(kernels.phasenorm(out_u.conj().T.copy())))
    return v, c


def renyi0_profile(obj):
    """Integer rank-entropy profile over bonds 1..L-1 from the layout alone.

    Accepts an RsfCircuit or an RsfLayout; the payloads never matter."""
    if isinstance(obj, RsfCircuit):
        ks = obj._ks
        ls = obj._ls
        nd = int(obj._meta[0])
        L = obj.L
    else:
        validate_layout(obj)
        L = obj.L
        nd = len(obj.diagonals)
        ks = np.array([k - 1 for k, _ in obj.diagonals], dtype=np.int64)
        ls = np.array([l for _, l in obj.diagonals], dtype=np.int64)
    out = np.empty(max(L - 1, 0), dtype=np.int64)
    kernels.rsf_renyi0_profile(ks, ls, nd, L, out)
    return out


def evaluate_covariance(circ):
    """Covariance matrix of circ |vac>."""
    g = np.empty((2 * circ.L, 2 * circ.L))
    kernels.rsf_eval_cov(circ._ks, circ._ls, int(circ._meta[0]),
                         circ._rg, circ.L, g)
    return g


def random_circuit(L, n_gates, rng):
    """Absorb n_gates Haar gates at stream-chosen bonds (in place, fast)."""
    c = RsfCircuit(L)
    key_a = np.uint64(rng.key)
    key_b = np.uint64(rng.spawn_gate_stream().key)
    evd, evq = c._event_buffers()
    tmp_r = np.empty((4, 4))
    tmp_u = np.empty((4, 4), dtype=np.complex128)
    ctr_a, _ = kernels.rsf_game_chunk(
        c._ks, c._ls, c._meta, c._rg, c._ug, c._uok,
        key_a, rng.ctr, key_b, 0, n_gates, 0.0, L, evd, evq, tmp_r, tmp_u)
    rng.ctr = int(ctr_a)
    return c


# -- serialization ---------------------------------------------------------

def to_text(circ):
    lines = ["RSF L=%d" % circ.L]
    nd = int(circ._meta[0])
    for d in range(nd):
        k = int(circ._ks[d])
        l = int(circ._ls[d])
        lines.append("k=%d l=%d" % (k + 1, l))
        off = int(kernels.rsf_gstart(circ._ls, d))
        for j in range(l):
            pos = off + j
            kernels.rsf_ensure_u(circ._rg, circ._ug, circ._uok, pos)
            u = circ._ug[pos]
            vals = []
            for a in range(4):
                for b in range(4):
                    vals.append("%.17g" % u[a, b].real)
                    vals.append("%.17g" % u[a, b].imag)
            lines.append(" ".join(vals))
    return "\n".join(lines) + "\n"


def from_text(text):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("RSF "):
        raise FormatError("missing RSF header")
    head = lines[0].split()
    if len(head) != 2 or not head[1].startswith("L="):
        raise FormatError("bad RSF header %r" % lines[0])
    try:
        L = int(head[1][2:])
    except ValueError:
        raise FormatError("bad chain length in %r" % lines[0])
    if L < 2:
        raise FormatError("chain length %d too small" % L)
    circ = RsfCircuit(L)
    diags = []
    i = 1
    pos = 0
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 2 or not parts[0].startswith("k=") or not parts[1].startswith("l="):
            raise FormatError("expected 'k=<int> l=<int>', got %r" % lines[i])
        try:
            k = int(parts[0][2:])
            l = int(parts[1][2:])
        except ValueError:
            raise FormatError("bad diagonal header %r" % lines[i])
        diags.append((k, l))
        i += 1
        for _ in range(l):
            if i >= len(lines):
                raise FormatError("truncated circuit: diagonal (%d,%d) short" % (k, l))
            vals = lines[i].split()
            if len(vals) != 32:
                raise FormatError("gate line needs 32 floats, got %d" % len(vals))
            try:
                f = [float(v) for v in vals]
            except ValueError:
                raise FormatError("non-numeric gate entry in %r" % lines[i])
            u = np.empty((4, 4), dtype=np.complex128)
            for a in range(4):
                for b in range(4):
                    u[a, b] = complex(f[2 * (4 * a + b)], f[2 * (4 * a + b) + 1])
            try:
                g = Matchgate(u)
            except Exception as e:
                raise FormatError("gate %d is not a matchgate: %s" % (pos, e))
            circ._rg[pos] = to_orthogonal(g)
            circ._ug[pos] = u          # keep the exact parsed payload
            circ._uok[pos] = True
            pos += 1
            i += 1
    layout = RsfLayout(L, tuple(diags))
    validate_layout(layout)
    nd = len(diags)
    for d in range(nd):
        circ._ks[d] = diags[d][0] - 1
        circ._ls[d] = diags[d][1]
    circ._meta[0] = nd
    return circ
