"""Counter-based random streams.

Every trajectory owns two independent streams derived from the global seed:
stream A decides bonds and coins (two values per move in every model), and
stream B feeds gate randomness.  Keeping the consumption pattern of stream A
identical across models makes runs with the same seed directly comparable.
"""

import numpy as np

from . import kernels

MASK64 = (1 << 64) - 1
GATE_STREAM_SALT = 0xD1B54A32D192ED03


def derive_key(seed, index):
    """Stream-A key of trajectory `index` under the global seed."""
    return int(kernels.ctr_value(np.uint64(int(seed) & MASK64), int(index)))


def gate_key(traj_key):
    """Stream-B key belonging to a stream-A key."""
    return int(kernels.mix64(np.uint64((int(traj_key) ^ GATE_STREAM_SALT) & MASK64)))


class CounterRng:
    """Stateful view on one counter stream."""

    __slots__ = ("key", "ctr")

    def __init__(self, key, ctr=0):
        self.key = int(key) & MASK64
        self.ctr = int(ctr)

    def u01(self):
        v = float(kernels.u01(np.uint64(self.key), self.ctr))
        self.ctr += 1
        return v

    def integers(self, n):
        """Uniform int in 0..n-1."""
        return int(self.u01() * n)

    def normals(self, n):
        out = np.empty(n)
        self.ctr = int(kernels.gauss_fill(np.uint64(self.key), self.ctr, out))
        return out

    def haar_rotation(self):
        out = np.empty((4, 4))
        self.ctr = int(kernels.haar_r(np.uint64(self.key), self.ctr, out))
        return out

    def spawn_gate_stream(self):
        return CounterRng(gate_key(self.key))


def make_rng(seed, index=0):
    return CounterRng(derive_key(seed, index))
