"""Exception types shared across the package."""


class MatrepError(Exception):
    """Base class for numerical-contract violations raised by this package."""


class UnsupportedDegreeError(MatrepError):
    """Hermite-function degree outside the validated recurrence range."""


class IllConditionedBasisError(MatrepError):
    """Overlap matrix too close to singular (near-dependent expansion functions)."""


class QuadratureError(MatrepError):
    """Quadrature failed to converge (refined rule disagrees with the requested one)."""


class OutOfRangeError(MatrepError):
    """Requested abscissa lies outside the sampled grid."""


class OutsideTrustRegionError(MatrepError):
    """Diagnostic requested where the truncated expansion carries no weight."""


class ResolventPoleError(MatrepError):
    """Trial energy coincides with an eigenvalue of the excluded block."""


class ConvergenceError(MatrepError):
    """Iteration exhausted its budget without meeting the tolerance."""


class ResolutionError(MatrepError):
    """Grid resolution insufficient for the requested eigenvalue accuracy."""


class ContractViolationError(MatrepError):
    """Input violates a structural precondition (e.g. non-symmetric matrix)."""


class DegenerateInputError(MatrepError):
    """Input carries no usable signal (e.g. identically zero wave)."""
