"""Exception hierarchy. Every library error derives from ``SemistableError``."""


class SemistableError(Exception):
    """Base class for all errors raised by this package."""


class NotSublattice(SemistableError):
    pass


class ZeroVector(SemistableError):
    pass


class NotStrictlyConvex(SemistableError):
    pass


class RankMismatch(SemistableError):
    pass


class NotSimplicial(SemistableError):
    pass


class NotAFan(SemistableError):
    pass


class InvalidComplex(SemistableError):
    """A complex or morphism violates its structural invariants."""


class PreconditionFailed(SemistableError):
    """An operation was called on input outside its documented domain."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class PointOnBoundary(SemistableError):
    pass


class PointOutside(SemistableError):
    pass


class SchemaError(SemistableError):
    """A document failed to parse; ``path`` locates the offending node."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path or '<root>'}: {reason}")
        self.path = path
        self.reason = reason
