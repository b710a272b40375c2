"""Exception types shared across the package."""


class MgError(Exception):
	"""Base class for all package errors."""


class NotAMatchgate(MgError):
	"""Matrix does not have the matchgate block structure."""


class NonUnitary(NotAMatchgate):
	"""Matrix fails the unitarity check."""


class DeterminantMismatch(NotAMatchgate):
	"""det(outer block) != det(inner block)."""


class NotSpecialOrthogonal(MgError):
	"""Matrix is not in SO(4) within tolerance."""


# older name, kept for callers that grew up with it
NotOrthogonal = NotSpecialOrthogonal


class NumericalBreakdown(MgError):
	"""A pivot or amplitude fell below the breakdown threshold."""


class NotAntisymmetric(MgError):
	"""Covariance matrix fails the antisymmetry check."""


class AsymmetryTooLarge(NotAntisymmetric):
	"""Accumulated asymmetry exceeds what re-symmetrization may silently fix."""


class NotPure(MgError):
	"""Covariance matrix fails the purity test Gamma Gamma^T = 1."""


class OddDimension(MgError):
	"""Pfaffian requested for an odd-dimensional matrix."""


class OddCount(MgError):
	"""Majorana expectation requested for an odd number of operators."""


class RangeError(MgError):
	"""Qubit range outside 1..L or empty."""


class InvalidLayout(MgError):
	"""Staircase layout violates the ordering or bound constraints."""


class BondOutOfRange(MgError):
	"""Bond index outside 1..L-1."""


# older name, kept for callers that grew up with it
InvalidBond = BondOutOfRange


class InvalidConfig(MgError):
	"""Pairing or Bell configuration is not a valid involution."""


class DegenerateAmplitudes(MgError):
	"""Left/right move hit a state outside its domain."""


class NotDisentanglable(MgError):
	"""No gate at this bond can lower the entropy."""


class TooLarge(MgError):
	"""Exhaustive enumeration requested above the supported size."""


class EmptyInput(MgError):
	"""Aggregation over an empty collection."""


class InsufficientOverlap(MgError):
	"""Collapse score undefined: no overlapping rescaled abscissas."""


class ConfigError(MgError):
	"""Bad run configuration (CLI exit code 2)."""


class FormatError(MgError):
	"""Malformed serialized circuit or configuration."""


class IoError(MgError):
	"""Result file could not be written (CLI exit code 3)."""
