"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and an ``exit_code``
used by the command line front end (1 = invalid input, 2 = runtime failure).
"""

from __future__ import annotations


class GenExpError(Exception):
    code = "error"
    exit_code = 2

    def __init__(self, message: str = "") -> None:
        super().__init__(message or self.code)


class InvalidInput(GenExpError):
    code = "invalid_input"
    exit_code = 1


# curve
class NonMonotoneArgument(InvalidInput):
    code = "non_monotone_argument"


class PointOutsideHalfDisc(InvalidInput):
    code = "point_outside_half_disc"


class EndpointMismatch(InvalidInput):
    code = "endpoint_mismatch"


class DegenerateLipschitz(InvalidInput):
    code = "degenerate_lipschitz"


class NotDifferentiableHere(GenExpError):
    code = "not_differentiable_here"


# growth
class NotIncreasing(InvalidInput):
    code = "not_increasing"


class DerivativeNotMonotone(InvalidInput):
    code = "derivative_not_monotone"


class NoGrowth(InvalidInput):
    code = "no_growth"


class OutOfRange(GenExpError):
    code = "out_of_range"


class BelowThreshold(GenExpError):
    code = "below_threshold"


# map and constants
class CertificationFailed(InvalidInput):
    code = "certification_failed"


class NoSuchM(InvalidInput):
    code = "no_such_m"


class NotCertified(InvalidInput):
    code = "not_certified"


class NoConvergence(GenExpError):
    code = "no_convergence"


# symbolic dynamics and pullbacks
class NotInH(GenExpError):
    code = "not_in_h"


class NotGBounded(GenExpError):
    code = "not_g_bounded"


class AddressMismatch(GenExpError):
    code = "address_mismatch"


class OrbitOverflow(GenExpError):
    """An orbit left the range where its imaginary part is representable."""

    code = "orbit_overflow"


# rendering and I/O
class ResolutionTooLarge(InvalidInput):
    code = "resolution_too_large"


class InvalidWindow(InvalidInput):
    code = "invalid_window"


class IoFailure(GenExpError):
    code = "io_failure"


# configuration
class ParseError(InvalidInput):
    code = "parse_error"

    def __init__(self, line: int | None, reason: str) -> None:
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class ValidationError(InvalidInput):
    code = "validation_error"

    def __init__(self, field: str, reason: str, line: int | None = None) -> None:
        self.field = field
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {reason}")
