"""Majorana pairings under braiding gates.

The state is a perfect matching on the 2L majorana modes (stabilizer signs
dropped).  A braid move relabels the four modes of a bond by a slot
permutation; the disentangler picks the best of all 24.  Entropies are
half the crossing counts.
"""

import numpy as np

from . import kernels
from .errors import BondOutOfRange, InvalidConfig


class MajoranaPairing:
    """Immutable fixed-point-free involution on modes 1..2L."""

    __slots__ = ("_p",)

    def __init__(self, partners):
        """`partners` lists, per mode 1..2L, its 1-based partner."""
        arr = np.asarray([int(x) for x in partners], dtype=np.int64) - 1
        n = arr.shape[0]
        if n < 2 or n % 2 != 0:
            raise InvalidConfig("need an even number of modes, got %d" % n)
        for i in range(n):
            q = arr[i]
            if q == i:
                raise InvalidConfig("mode %d paired with itself" % (i + 1))
            if not 0 <= q < n:
                raise InvalidConfig("partner %d outside 1..%d" % (q + 1, n))
            if arr[q] != i:
                raise InvalidConfig("pairing is not an involution at %d" % (i + 1))
        self._p = arr
        self._p.setflags(write=False)

    @classmethod
    def from_pairs(cls, L, pairs):
        plist = [0] * (2 * L)
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
        return self._p.shape[0] // 2

    def partner(self, i):
        if not 1 <= i <= 2 * self.L:
            raise InvalidConfig("mode %d outside 1..%d" % (i, 2 * self.L))
        return int(self._p[i - 1]) + 1

    def pairs(self):
        return tuple((i + 1, int(self._p[i]) + 1)
                     for i in range(2 * self.L) if self._p[i] > i)

    def __eq__(self, other):
        if not isinstance(other, MajoranaPairing):
            return NotImplemented
        return self._p.shape == other._p.shape and bool((self._p == other._p).all())

    def __hash__(self):
        return hash(self._p.tobytes())

    def __repr__(self):
        return "MajoranaPairing(L=%d, pairs=%r)" % (self.L, list(self.pairs()))


def product_state(L):
    """Every site's two modes paired with each other: zero entropy."""
    if L < 1:
        raise InvalidConfig("need at least one qubit")
    arr = np.arange(2 * L, dtype=np.int64)
    arr[0::2] += 1
    arr[1::2] -= 1
    return MajoranaPairing._wrap(arr)


def _check_bond(state, bond):
    if not 1 <= bond <= state.L - 1:
        raise BondOutOfRange("bond %r outside 1..%d" % (bond, state.L - 1))


def entropy_at(state, m):
    """Entropy (in bits, half-integer) across the cut after qubit m."""
    if not 0 <= m <= state.L:
        raise ValueError("cut %r outside 0..%d" % (m, state.L))
    return kernels.braid_entropy2(state._p, m) / 2.0


def entropy_profile(state):
    out2 = np.zeros(2 * state.L, dtype=np.int64)
    kernels.braid_profile2(state._p, out2)
    return out2[: state.L - 1] / 2.0


def apply_braid(state, bond, tau):
    """Relabel the four modes of `bond` by the slot permutation `tau`.

    tau lists the images of slots 0..3; slot s is mode 2*bond-1+s.
    """
    _check_bond(state, bond)
    t = [int(x) for x in tau]
    if sorted(t) != [0, 1, 2, 3]:
        raise InvalidConfig("not a permutation of 0..3: %r" % (tau,))
    arr = state._p.copy()
    w = np.asarray(t, dtype=np.int64) + 2 * (bond - 1)
    kernels._braid_relabel(arr, bond - 1, w)
    return MajoranaPairing._wrap(arr)


def random_braid(state, bond, rng):
    """Uniformly random slot permutation at `bond`, drawn from `rng`."""
    _check_bond(state, bond)
    arr = state._p.copy()
    rng.ctr = int(kernels.braid_random(arr, bond - 1, np.uint64(rng.key), rng.ctr))
    return MajoranaPairing._wrap(arr)


def braid_disentangle(state, bond):
    """The entropy-minimizing slot permutation at `bond` (deterministic)."""
    _check_bond(state, bond)
    arr = state._p.copy()
    kernels.braid_disentangle(arr, bond - 1, state.L)
    return MajoranaPairing._wrap(arr)
