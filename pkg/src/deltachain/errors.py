"""Exception hierarchy shared by all deltachain modules."""


class DeltachainError(Exception):
    """Base class for all errors raised by this package."""


class NotAMetric(DeltachainError):
    """A distance matrix violates symmetry, the zero diagonal, nonnegativity
    or the triangle inequality.  ``witness`` names the violating entry/triple."""

    def __init__(self, reason, witness=None):
        self.reason = reason
        self.witness = witness
        msg = reason if witness is None else f"{reason} at {witness}"
        super().__init__(msg)


class InsufficientWindow(DeltachainError):
    """A trajectory does not cover the coordinate range an operation needs."""


class SizeOverflow(DeltachainError):
    """A constructed object would exceed the configured size cap."""


class NoChain(DeltachainError):
    """No walk of the requested exact length exists in a chain graph."""

    def __init__(self, x, y, length):
        self.x = x
        self.y = y
        self.length = length
        super().__init__(f"no chain of length {length} from {x} to {y}")


class NotMixing(DeltachainError):
    """An operation requires a primitive (chain mixing) graph but the
    certificate carries no mixing constant."""


class InsufficientSpacing(DeltachainError):
    """Segment spacing falls below the required gluing constant."""


class InsufficientMargin(DeltachainError):
    """A segment source does not cover the margin its interval declares."""


class BadHorizon(DeltachainError):
    """A horizon/window parameter is inconsistent with the data length."""


class EmptySet(DeltachainError):
    """Hausdorff distance of an empty set is undefined."""


class DepthMismatch(DeltachainError):
    """Cylinder distributions were not computed to the requested depth."""


class DegenerateWeights(DeltachainError):
    """A mixture weight rounds to zero blocks at the requested scale."""


class Infeasible(DeltachainError):
    """An LP solve reported infeasibility (should not happen on valid input)."""


class SolverIterationCap(DeltachainError):
    """An LP solve hit its iteration limit; reported as a diagnostic."""


class SchemaError(DeltachainError):
    """A config or data file violates its schema.  ``pointer`` is a
    JSON-pointer-style path to the offending field."""

    def __init__(self, pointer, reason):
        self.pointer = pointer
        self.reason = reason
        super().__init__(f"{pointer}: {reason}")
