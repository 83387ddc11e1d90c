"""Exception types shared across the package."""


class VertiflowError(Exception):
    """Base class for all package errors."""


class ValidationError(VertiflowError):
    """Input data violates a model invariant or precondition."""


class SolverError(VertiflowError):
    """A solver failed in a way that prevents returning a trustworthy answer."""


class SimplexStalledError(SolverError):
    """The simplex iteration limit was exceeded before reaching optimality."""


class FileFormatError(VertiflowError):
    """A data file is malformed; carries enough context to locate the problem."""

    def __init__(self, message: str, *, path: str | None = None, location: str | None = None):
        self.path = path
        self.location = location
        prefix = ""
        if path:
            prefix += f"{path}: "
        if location:
            prefix += f"at {location}: "
        super().__init__(prefix + message)
