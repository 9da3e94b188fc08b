"""Exception types shared across the package."""


class OutpostLabError(Exception):
    """Base class for all package errors."""


class InvalidGeometry(OutpostLabError):
    """Model parameters produce an inadmissible geometry (overlapping
    collars, outpost curve too close to the droplet, node inside the
    finite-potential region, ...)."""


class NoAdmissibleRoot(OutpostLabError):
    """The exterior-map quartic has no real root giving a well-defined map."""


class Supercritical(OutpostLabError):
    """The droplet develops a boundary cusp before the requested capacity;
    no univalent exterior map exists."""


class ResolutionExceeded(OutpostLabError):
    """The harmonic solver could not meet the residual tolerance at the
    maximum Laurent order."""


class TooCloseToDiagonalCircle(OutpostLabError):
    """S_1 evaluated where |phi_1(z) conj(phi_1(w))| is within tolerance
    of the unit circle (the kernel's singular set)."""


class OutsideDomainD(OutpostLabError):
    """S_{1,2} requested outside its domain of definition."""


class NonConvergent(OutpostLabError):
    """A kernel series failed to converge within the term budget."""


class QuadratureNotConverged(OutpostLabError):
    """Grid doubling did not stabilize a quadrature value."""


class PrecisionBudgetExceeded(OutpostLabError):
    """Extended-precision retries exhausted without a usable result."""


class NotPositiveDefinite(OutpostLabError):
    """A Gram matrix failed its Cholesky factorization."""


class OutOfRegime(OutpostLabError):
    """An asymptotic approximant was requested outside its index window."""


class EnvelopeViolation(OutpostLabError):
    """A rejection-sampling proposal exceeded its envelope."""


class MaxRejections(OutpostLabError):
    """Rejection sampling exhausted its proposal budget."""


class PreconditionViolated(OutpostLabError):
    """A verification check was invoked outside its stated preconditions."""


class Inconclusive(OutpostLabError):
    """Sign arbitration could not separate the candidate conventions."""
