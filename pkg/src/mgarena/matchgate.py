"""Matchgates and the local moves that rewrite small products of them.

A matchgate acts on two adjacent qubits, couples |00>,|11> through one
SU(2) block and |01>,|10> through another with equal determinant, and is
stored phase-normalized: the first nonzero entry of the outer column is
real positive.  Gate identities in this module hold up to that phase.
"""

from enum import Enum

import numpy as np

from . import kernels
from .errors import (DeterminantMismatch, NonUnitary, NotAMatchgate,
                     NotSpecialOrthogonal)

EPS_UNITARY = 1e-10
EPS_ORTHO = 1e-9

_ZERO_PATTERN = (
	(0, 1), (0, 2), (1, 0), (1, 3),
	(2, 0), (2, 3), (3, 1), (3, 2),
)


class Direction(Enum):
	"""Which way a staircase move leans.

	LTR: the incoming gate sits one bond left of the structure it passes
	through.  RTL is the mirror image.
	"""
	LTR = "ltr"
	RTL = "rtl"


def _as_ltr(direction):
	if direction is Direction.LTR or direction == "ltr":
		return True
	if direction is Direction.RTL or direction == "rtl":
		return False
	raise ValueError("direction must be Direction.LTR/RTL or 'ltr'/'rtl'")


class Matchgate:
	__slots__ = ("u",)

	def __init__(self, u):
		u = np.asarray(u, dtype=np.complex128)
		if u.shape != (4, 4):
			raise NotAMatchgate("expected a 4x4 matrix, got shape %r" % (u.shape,))
		dev = np.abs(u.conj().T @ u - np.eye(4)).max()
		if dev > EPS_UNITARY:
			raise NonUnitary("not unitary within %g (deviation %g)" % (EPS_UNITARY, dev))
		for i, j in _ZERO_PATTERN:
			if abs(u[i, j]) > EPS_UNITARY:
				raise NotAMatchgate("entry (%d,%d) must vanish" % (i, j))
		det_a = u[0, 0] * u[3, 3] - u[0, 3] * u[3, 0]
		det_b = u[1, 1] * u[2, 2] - u[1, 2] * u[2, 1]
		if abs(det_a - det_b) > EPS_UNITARY:
			raise DeterminantMismatch("block determinants differ by %g" % abs(det_a - det_b))
		self.u = np.asarray(kernels.phasenorm(u))

	@classmethod
	def _wrap(cls, u):
		"""Skip validation for matrices built by our own kernels."""
		g = object.__new__(cls)
		g.u = np.asarray(u)
		return g

	@property
	def outer(self):
		u = self.u
		return np.array([[u[0, 0], u[0, 3]], [u[3, 0], u[3, 3]]])

	@property
	def inner(self):
		u = self.u
		return np.array([[u[1, 1], u[1, 2]], [u[2, 1], u[2, 2]]])

	def dagger(self):
		return Matchgate._wrap(kernels.phasenorm(self.u.conj().T.copy()))

	def rotation(self):
		return to_orthogonal(self)

	def __repr__(self):
		a = self.outer
		return "Matchgate(outer~[[%.3g%+.3gj, ...]])" % (a[0, 0].real, a[0, 0].imag)


def matchgate(a, b):
	"""Build a gate from its outer and inner SU(2) blocks."""
	a = np.asarray(a, dtype=np.complex128)
	b = np.asarray(b, dtype=np.complex128)
	if a.shape != (2, 2) or b.shape != (2, 2):
		raise NotAMatchgate("blocks must be 2x2")
	return Matchgate(np.asarray(kernels.mg_from_blocks(a, b)))


def identity():
	return Matchgate._wrap(np.eye(4, dtype=np.complex128))


def fswap():
	"""Fermionic swap: exchanges the qubits and flips the |11> sign."""
	u = np.zeros((4, 4), dtype=np.complex128)
	u[0, 0] = 1.0
	u[1, 2] = 1.0
	u[2, 1] = 1.0
	u[3, 3] = -1.0
	return Matchgate._wrap(u)


def from_params(alpha, beta, phi1, phi2, phi3=0.0, phi4=0.0):
	"""exp(i phi3 Z x 1 + i phi4 1 x Z) exp(i(alpha XX + beta YY)) exp(i phi2 Z x 1 + i phi1 1 x Z).

	The XX+YY exponential factorizes over the outer/inner blocks, so the
	whole product is a matchgate for any parameter values.
	"""
	u = kernels.params_to_u(float(alpha), float(beta), float(phi1),
	                        float(phi2), float(phi3), float(phi4))
	return Matchgate._wrap(np.asarray(kernels.phasenorm(u)))


def to_orthogonal(g):
	"""Adjoint action on the four majoranas of the two qubits; lands in SO(4)."""
	return np.asarray(kernels.to_r(g.u))


def from_orthogonal(r):
	"""Inverse of to_orthogonal up to global phase."""
	r = np.asarray(r, dtype=np.float64)
	if r.shape != (4, 4):
		raise NotSpecialOrthogonal("expected a 4x4 real matrix")
	dev = np.abs(r @ r.T - np.eye(4)).max()
	if dev > EPS_ORTHO:
		raise NotSpecialOrthogonal("not orthogonal within %g (deviation %g)" % (EPS_ORTHO, dev))
	if np.linalg.det(r) < 0.0:
		raise NotSpecialOrthogonal("determinant is -1; no matchgate lifts a reflection")
	return Matchgate._wrap(np.asarray(kernels.from_r_u(r)))


def fuse(g_first, g_after):
	"""Product of two gates on the same bond, g_first applied first."""
	return Matchgate._wrap(np.asarray(kernels.phasenorm(g_after.u @ g_first.u)))


def is_identity(g, tol=1e-8):
	return np.abs(g.u - np.eye(4)).max() <= tol


def same_up_to_phase(g1, g2, tol=1e-8):
	return np.abs(g1.u - g2.u).max() <= tol


def haar_matchgate(rng):
	"""Haar random matchgate rotation drawn from the rng's gate stream."""
	return Matchgate._wrap(np.asarray(kernels.from_r_u(rng.haar_rotation())))


def yang_baxter(u, u_prime, u_dprime, direction):
	"""Exchange move for a staircase triple.

	The operator is u . u' . u'' with u'' applied first.  For LTR the bonds
	are (b, b+1, b) and the returned triple (v, v', v'') satisfies
	u u' u'' = v v' v'' with bonds (b+1, b, b+1), v applied last.  RTL is
	the mirror image.  Equality holds up to global phase.
	"""
	ltr = _as_ltr(direction)
	ra = to_orthogonal(u)
	rb = to_orthogonal(u_prime)
	rc = to_orthogonal(u_dprime)
	rv, rvp, rvpp = kernels.yb_r(ra, rb, rc, ltr)
	return (Matchgate._wrap(np.asarray(kernels.from_r_u(rv))),
	        Matchgate._wrap(np.asarray(kernels.from_r_u(rvp))),
	        Matchgate._wrap(np.asarray(kernels.from_r_u(rvpp))))


def left_right_move(u, u_prime, direction):
	"""Vacuum fold: rewrite a two-gate product acting on |000>.

	u is applied last.  LTR: u on bond b, u' on bond b+1; the returned pair
	(v, v') reproduces the state with v on bond b+1 applied last and v' on
	bond b applied first.  RTL mirrors all four bonds.  The identity holds
	on the vacuum of the three qubits, not as an operator identity.
	"""
	ltr = _as_ltr(direction)
	va, vb = kernels.lr_u(u.u, u_prime.u, ltr)
	return Matchgate._wrap(np.asarray(va)), Matchgate._wrap(np.asarray(vb))
