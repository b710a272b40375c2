"""Fermionic Gaussian states as majorana covariance matrices.

A chain of L qubits carries 2L majorana modes; the state is encoded in the
real antisymmetric matrix Gamma_kl = (i/2) <[gamma_k, gamma_l]>.  The
vacuum is a direct sum of 2x2 blocks [[0,-1],[1,0]] and gates act by
conjugating four adjacent rows and columns with their SO(4) rotation.

Bonds and qubit indices are 1-based here; bond m cuts the chain between
qubits m and m+1.
"""

import numpy as np

from . import kernels
from .errors import (AsymmetryTooLarge, BondOutOfRange, NotAntisymmetric,
                     NotPure, OddCount, OddDimension, RangeError)
from .matchgate import Matchgate, to_orthogonal

EPS_ASYM = 1e-9
EPS_PURE = 1e-7
EPS_RANK = 1e-8


def vacuum_covariance(L):
	if L < 1:
		raise ValueError("need at least one qubit")
	return np.asarray(kernels.cov_vacuum(L))


def chain_length(gamma):
	n = gamma.shape[0]
	if gamma.ndim != 2 or gamma.shape[1] != n or n % 2 != 0:
		raise NotAntisymmetric("covariance matrix must be square with even dimension")
	return n // 2


def check_antisymmetric(gamma, eps=EPS_ASYM):
	"""Raise if the accumulated asymmetry is too large to silently fix."""
	chain_length(gamma)
	dev = np.abs(gamma + gamma.T).max()
	if dev > eps:
		raise AsymmetryTooLarge("asymmetry %g exceeds %g" % (dev, eps))
	return dev


def _symmetrized(gamma):
	check_antisymmetric(gamma)
	return 0.5 * (gamma - gamma.T)


def purity_check(gamma, eps=EPS_PURE):
	"""True iff Gamma Gamma^T = 1 within eps (pure Gaussian state)."""
	return float(kernels.cov_purity_dev(np.ascontiguousarray(gamma, dtype=np.float64))) <= eps


def require_pure(gamma, eps=EPS_PURE):
	dev = float(kernels.cov_purity_dev(np.ascontiguousarray(gamma, dtype=np.float64)))
	if dev > eps:
		raise NotPure("Gamma Gamma^T deviates from 1 by %g" % dev)


def apply_gate(gamma, bond, gate):
	"""Return the covariance matrix after acting with `gate` at `bond`.

	`gate` may be a Matchgate or an SO(4) rotation acting on the four
	majoranas of qubits (bond, bond+1).
	"""
	L = chain_length(gamma)
	if not 1 <= bond <= L - 1:
		raise BondOutOfRange("bond %r outside 1..%d" % (bond, L - 1))
	if isinstance(gate, Matchgate):
		r = to_orthogonal(gate)
	else:
		r = np.ascontiguousarray(gate, dtype=np.float64)
	out = np.ascontiguousarray(gamma, dtype=np.float64).copy()
	kernels.cov_apply(out, bond - 1, r)
	return out


def reduced(gamma, first, last):
	"""Covariance of the reduced state on qubits first..last (inclusive)."""
	L = chain_length(gamma)
	if not (1 <= first <= last <= L):
		raise RangeError("range %r..%r outside 1..%d" % (first, last, L))
	lo, hi = 2 * (first - 1), 2 * last
	return gamma[lo:hi, lo:hi].copy()


def williamson_eigenvalues(gamma_reduced):
	"""Pairing spectrum of a (reduced) covariance matrix, descending in [0,1].

	The singular values of an antisymmetric matrix come in equal pairs; each
	pair is one Williamson value.  Roundoff splits the pairs by O(eps), so
	the two are averaged.
	"""
	g = _symmetrized(gamma_reduced)
	s = np.linalg.svd(g, compute_uv=False)
	lam = 0.5 * (s[0::2] + s[1::2])
	return np.clip(lam, 0.0, 1.0)


def renyi_entropy(lambdas, n=1):
	"""Renyi-n entropy in bits of a Williamson spectrum.

	n=0 counts the eigenvalues different from 1 (rank entropy), n=1 is the
	von Neumann limit; any real n >= 0 works.
	"""
	lam = np.clip(np.asarray(lambdas, dtype=np.float64), 0.0, 1.0)
	# the kernel expects the doubled singular values and halves the sum
	return float(kernels.ent_from_svals(np.ascontiguousarray(np.repeat(lam, 2)), float(n), EPS_RANK))


def window_entropy(lambdas, n, x, y):
	"""renyi_entropy restricted to the eigenvalues lying in [x, y)."""
	if not (0.0 <= x < y):
		raise ValueError("need 0 <= x < y")
	lam = np.asarray(lambdas, dtype=np.float64)
	return renyi_entropy(lam[(lam >= x) & (lam < y)], n)


def bond_entropy(gamma, bond, n=1):
	"""Entropy of qubits 1..bond."""
	L = chain_length(gamma)
	if not 1 <= bond <= L - 1:
		raise BondOutOfRange("bond %r outside 1..%d" % (bond, L - 1))
	g = _symmetrized(gamma)
	return float(kernels.cov_bond_entropy(np.ascontiguousarray(g), bond, L, float(n), EPS_RANK))


def entanglement_profile(gamma, n=1):
	"""Entropies of the L-1 contiguous left regions of a pure state."""
	L = chain_length(gamma)
	require_pure(gamma)
	g = np.ascontiguousarray(_symmetrized(gamma))
	out = np.empty(L - 1)
	kernels.cov_profile(g, L, float(n), EPS_RANK, out)
	return out


def pfaffian(a):
	a = np.asarray(a, dtype=np.float64)
	n = a.shape[0]
	if a.ndim != 2 or a.shape[1] != n:
		raise NotAntisymmetric("pfaffian needs a square matrix")
	if n % 2 == 1:
		raise OddDimension("pfaffian needs even dimension, got %d" % n)
	dev = np.abs(a + a.T).max() if n else 0.0
	if dev > EPS_ASYM * max(1.0, np.abs(a).max()):
		raise NotAntisymmetric("matrix is not antisymmetric (dev %g)" % dev)
	work = np.ascontiguousarray(0.5 * (a - a.T))
	return float(kernels.pfaffian(work))


def majorana_expectation(gamma, indices):
	"""i^s <gamma_i1 ... gamma_is> of a Gaussian state, for strictly
	increasing 1-based mode indices of even count s.  The result is the
	pfaffian of the corresponding submatrix of Gamma^T.
	"""
	gamma = _symmetrized(gamma)
	idx = [int(i) for i in indices]
	if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
		raise ValueError("mode indices must be strictly increasing")
	if len(idx) % 2 == 1:
		raise OddCount("majorana string of odd length %d" % len(idx))
	if len(idx) == 0:
		return 1.0
	n = gamma.shape[0]
	if idx[0] < 1 or idx[-1] > n:
		raise IndexError("mode index outside 1..%d" % n)
	sel = np.array(idx) - 1
	sub = gamma.T[np.ix_(sel, sel)]
	return float(kernels.pfaffian(np.ascontiguousarray(sub)))


def random_pure_covariance(L, rng, n_gates=None):
	"""Vacuum hit by n_gates Haar matchgates at stream-chosen bonds."""
	if n_gates is None:
		n_gates = 4 * L
	g = np.asarray(kernels.cov_vacuum(L))
	grng = rng.spawn_gate_stream()
	tmp = np.empty((4, 4))
	for _ in range(n_gates):
		b = rng.integers(L - 1)
		grng.ctr = int(kernels.haar_r(np.uint64(grng.key), grng.ctr, tmp))
		kernels.cov_apply(g, b, tmp)
	return g
