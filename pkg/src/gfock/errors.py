"""Exception types raised by the library."""


class PolynomialParseError(ValueError):
    """A polynomial or symbol literal could not be parsed."""


class NonHomogeneousGenerator(ValueError):
    """An ideal or submodule generator is not homogeneous."""


class NoSamplerAvailable(RuntimeError):
    """The model carries no boundary sampler (custom ideal without one)."""


class NoSpectralGap(RuntimeError):
    """No eigenvalue gap large enough to separate a spectral cluster."""


class NearSingularA(RuntimeError):
    """The compressed Toeplitz operator of the metric is numerically singular."""


class OffVarietyPoint(ValueError):
    """A point handed to an evaluation routine does not lie on the variety."""


class CertificateFailed(RuntimeError):
    """An operation required a passing orbit certificate and none was available."""


class ContainmentViolation(RuntimeError):
    """The sub-quotient ranges are not nested as required."""
