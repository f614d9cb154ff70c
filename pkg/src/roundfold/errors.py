"""Exception hierarchy shared by all modules.

Every error carries a plain-text message; the CLI turns them into
diagnostics rather than tracebacks.
"""


class RoundFoldError(Exception):
    """Base class for all library errors."""


class StructuralError(RoundFoldError):
    """A value violates a structural invariant (bad dims, empty lists, ...)."""


class InvariantUnavailableError(RoundFoldError):
    """A requested invariant is not defined for the given expression."""


class HypothesisError(RoundFoldError):
    """An operation's mathematical hypothesis is not satisfied or not asserted."""


class SiteError(RoundFoldError):
    """A surgery site does not exist or has the wrong fiber type."""


class ScopeError(RoundFoldError):
    """The operation is only defined for other (m, n) or input kinds."""


class ValidationFailure(RoundFoldError):
    """An operation was applied to a descriptor that does not validate."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))
