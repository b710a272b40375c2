"""Plain-python splitmix64 primitives for the numpy backend.

numpy >= 1.24 emits RuntimeWarning on uint64 scalar overflow, which the
finalizer relies on.  These variants wrap explicitly with a mask and must
produce bit-identical values to the jitted uint64 versions in _impl.
"""

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
	z = int(z) & _MASK
	z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
	z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
	return z ^ (z >> 31)


def ctr_value(key, ctr):
	return mix64((int(key) + (int(ctr) + 1) * _GOLDEN) & _MASK)
