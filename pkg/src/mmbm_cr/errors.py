"""Exception hierarchy shared by every layer of the package."""


class MmbmError(Exception):
    """Base class for all errors raised by mmbm_cr."""


class SingularMatrix(MmbmError, ArithmeticError):
    """A reconstructed GTH pivot was exactly zero."""


class NotSingular(MmbmError):
    """A kernel vector was requested for a nonsingular M-matrix."""


class Reducible(MmbmError):
    """The matrix (or generator) is reducible."""


class InvalidTriplet(MmbmError, ValueError):
    """A triplet representation violates its sign constraints."""


class Breakdown(MmbmError):
    """Cyclic reduction met an iterate that is not a valid M-matrix triplet."""


class NoConvergence(MmbmError):
    """An iteration hit its iteration cap."""


class ModelError(MmbmError, ValueError):
    """Base class for rejected model parameters."""


class InvalidGenerator(ModelError):
    pass


class AssumptionA2(ModelError):
    """All variances are zero."""


class AssumptionA3(ModelError):
    """Some state has both zero variance and zero drift."""


class HViolation(MmbmError, ValueError):
    """The step parameter makes a discretized coefficient negative."""


class NotPositiveRecurrent(MmbmError):
    pass


class OracleInconclusive(MmbmError):
    """The extended-precision rerun failed its own residual check."""


class DimensionMismatch(MmbmError, ValueError):
    pass


class ParseError(MmbmError, ValueError):
    pass


class BadSize(MmbmError, ValueError):
    pass
