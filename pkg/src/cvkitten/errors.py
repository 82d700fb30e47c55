"""Exception types raised by the simulator."""


class CvKittenError(Exception):
    """Base class for all numerical errors raised by this package."""


class DegenerateModes(CvKittenError):
    """The two trigger packets are too close to span an orthonormal pair."""


class NonConvergence(CvKittenError):
    """An adaptive quadrature failed to reach the requested tolerance."""


class AboveThreshold(CvKittenError):
    """The oscillator is at or above threshold, so zeta(eps) <= 0."""


class NotPositiveDefinite(CvKittenError):
    """A covariance matrix failed its Cholesky factorization."""


class DegenerateConditioning(CvKittenError):
    """Trigger-mode normalizers b(-eps) * b(+eps) are not positive."""


class NegativePdet(CvKittenError):
    """The coincidence probability is not positive."""


class SingularCovariance(CvKittenError):
    """A term covariance is (numerically) singular."""
