"""Bell pair configurations and their update rules.

A configuration is a partial pairing of the chain's qubits: every qubit is
free or belongs to exactly one Bell pair.  Entangler and disentangler moves
act on a bond (b, b+1) by a small rule table; rank entropies are crossing
counts.  The model is the discrete shadow of the staircase circuits: the
bijection to layouts and back lives here too.

Qubits and bonds are 1-based in this API; serialized text uses 0 for free.
"""

import os
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (BondOutOfRange, FormatError, InvalidConfig, TooLarge)
from .rsf import RsfLayout, validate_layout

# test hook: when set, the entangler's rule table is deliberately wrong
# (the both-right swap fires on the inverted condition), so integrity
# checks must catch it.
_CORRUPT = os.environ.get("MGARENA_SELFTEST_CORRUPT", "") == "1"


class BellConfig:
    """Immutable partial pairing of qubits 1..L."""

    __slots__ = ("_p",)

    def __init__(self, partners):
        """`partners` lists, per qubit 1..L, its 1-based partner or 0."""
        arr = np.asarray([int(x) for x in partners], dtype=np.int64) - 1
        L = arr.shape[0]
        if L < 1:
            raise InvalidConfig("empty configuration")
        for i in range(L):
            q = arr[i]
            if q == i:
                raise InvalidConfig("qubit %d paired with itself" % (i + 1))
            if q >= 0:
                if q >= L:
                    raise InvalidConfig("partner %d outside 1..%d" % (q + 1, L))
                if arr[q] != i:
                    raise InvalidConfig("pairing is not an involution at %d" % (i + 1))
        self._p = arr
        self._p.setflags(write=False)

    @classmethod
    def from_pairs(cls, L, pairs):
        plist = [0] * L
        for a, b in pairs:
            plist[a - 1] = b
            plist[b - 1] = a
        return cls(plist)

    @classmethod
    def _wrap(cls, arr):
        self = object.__new__(cls)
        self._p = arr
        arr.setflags(write=False)
        return self

    @property
    def L(self):
        return self._p.shape[0]

    def partner(self, q):
        """1-based partner of qubit q, or None if free."""
        if not 1 <= q <= self.L:
            raise InvalidConfig("qubit %d outside 1..%d" % (q, self.L))
        v = int(self._p[q - 1])
        return None if v < 0 else v + 1

    def pairs(self):
        return tuple((i + 1, int(self._p[i]) + 1)
                     for i in range(self.L) if self._p[i] > i)

    def n_pairs(self):
        return len(self.pairs())

    def __eq__(self, other):
        if not isinstance(other, BellConfig):
            return NotImplemented
        return self._p.shape == other._p.shape and bool((self._p == other._p).all())

    def __hash__(self):
        return hash(self._p.tobytes())

    def __repr__(self):
        return "BellConfig(L=%d, pairs=%r)" % (self.L, list(self.pairs()))


def free_config(L):
    if L < 1:
        raise InvalidConfig("need at least one qubit")
    return BellConfig._wrap(np.full(L, -1, dtype=np.int64))


def entropy_at(config, m):
    """Number of pairs crossing the cut after qubit m (0 <= m <= L)."""
    if not 0 <= m <= config.L:
        raise ValueError("cut %r outside 0..%d" % (m, config.L))
    return int(kernels.bell_entropy(config._p, m))


def entropy_profile(config):
    out = np.zeros(max(config.L - 1, 1), dtype=np.int64)
    if config.L > 1:
        kernels.bell_profile(config._p, out)
    return out[: config.L - 1]


def _check_bond(config, bond):
    if not 1 <= bond <= config.L - 1:
        raise BondOutOfRange("bond %r outside 1..%d" % (bond, config.L - 1))


def _entangle_corrupt(p, b):
    # deliberately wrong both-right condition; everything else faithful
    pa, pb = p[b], p[b + 1]
    if pa == -1 and pb == -1:
        p[b], p[b + 1] = b + 1, b
    elif pa == -1 and pb > b + 1:
        p[b], p[pb], p[b + 1] = pb, b, -1
    elif pb == -1 and 0 <= pa < b:
        p[b + 1], p[pa], p[b] = pa, b + 1, -1
    elif 0 <= pa < b and pb > b + 1:
        p[pa], p[b + 1], p[pb], p[b] = b + 1, pa, b, pb
    elif pa > b + 1 and pb > b + 1:
        if pb < pa:
            p[b], p[pb], p[b + 1], p[pa] = pb, b, pa, b + 1
    elif 0 <= pa < b and 0 <= pb < b:
        if pa < pb:
            p[b], p[pb], p[b + 1], p[pa] = pb, b, pa, b + 1


def entangle_move(config, bond):
    _check_bond(config, bond)
    arr = config._p.copy()
    if _CORRUPT:
        _entangle_corrupt(arr, bond - 1)
    else:
        kernels.bell_move(arr, bond - 1, True)
    return BellConfig._wrap(arr)


def disentangle_move(config, bond):
    _check_bond(config, bond)
    arr = config._p.copy()
    kernels.bell_move(arr, bond - 1, False)
    return BellConfig._wrap(arr)


def _swap_roles(p, i, j):
    """Exchange the roles of qubits i and j (0-based) in the pairing."""
    pi, pj = p[i], p[j]
    if pi == j:
        return
    p[i], p[j] = pj, pi
    if pi >= 0:
        p[pi] = j
    if pj >= 0:
        p[pj] = i


def rsf_layout_to_bell(layout):
    """Image of a staircase layout under the circuit-to-pairing map.

    Each diagonal acts as one pair creation on its first bond followed by
    swaps walking the right end outward; diagonals listed later are applied
    earlier.
    """
    validate_layout(layout)
    p = [-1] * layout.L
    for k, l in reversed(layout.diagonals):
        p[k - 1], p[k] = k, k - 1
        for j in range(1, l):
            _swap_roles(p, k + j - 1, k + j)
    return BellConfig(np.asarray(p) + 1)


def bell_to_rsf_layout(config):
    """Inverse sweep: peel diagonals off the pairing left to right."""
    p = list(config._p)
    L = config.L
    diags = []
    k0 = 0
    while k0 < L:
        c0 = p[k0]
        if c0 < 0:
            k0 += 1
            continue
        l = c0 - k0
        diags.append((k0 + 1, l))
        for j in range(l - 1, 0, -1):
            _swap_roles(p, k0 + j, k0 + j + 1)
        p[k0], p[k0 + 1] = -1, -1
        k0 += 2
    layout = RsfLayout(L, tuple(diags))
    validate_layout(layout)
    return layout


def telephone(L):
    """Number of partial pairings of L qubits (exact integer)."""
    if L < 0:
        raise ValueError("negative length")
    t_prev, t = 1, 1
    for n in range(1, L + 1):
        t_prev, t = t, t + (n - 1) * t_prev
    return t if L > 0 else 1


def mean_critical_profile(L, m):
    """Exact mean crossing count at cut m under the uniform distribution."""
    if not 0 <= m <= L:
        raise ValueError("cut %r outside 0..%d" % (m, L))
    if L < 2 or m == 0 or m == L:
        return Fraction(0)
    return Fraction(m * (L - m) * telephone(L - 2), telephone(L))


def enumerate_configs(L):
    """All pairings of L qubits, deterministic order (free branch first)."""
    if L > 12:
        raise TooLarge("enumeration above L=12 (%d configs)" % telephone(L))
    if L < 1:
        raise InvalidConfig("need at least one qubit")
    out = []
    p = [-1] * L

    def rec(i):
        while i < L and p[i] >= 0:
            i += 1
        if i == L:
            out.append(BellConfig._wrap(np.asarray(p, dtype=np.int64)))
            return
        rec(i + 1)
        for j in range(i + 1, L):
            if p[j] < 0:
                p[i], p[j] = j, i
                rec(i + 1)
                p[i], p[j] = -1, -1

    rec(0)
    return out


def to_text(config):
    body = " ".join(str(int(x) + 1) for x in config._p)
    return "BELL L=%d\n%s\n" % (config.L, body)


def from_text(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("BELL L="):
        raise FormatError("missing BELL header")
    try:
        L = int(lines[0][7:])
    except ValueError:
        raise FormatError("bad length in %r" % lines[0])
    if L < 1 or len(lines) < 2:
        raise FormatError("missing partner line")
    fields = lines[1].split()
    if len(fields) != L:
        raise FormatError("expected %d partners, got %d" % (L, len(fields)))
    try:
        vals = [int(f) for f in fields]
    except ValueError:
        raise FormatError("non-integer partner index")
    return BellConfig(vals)
