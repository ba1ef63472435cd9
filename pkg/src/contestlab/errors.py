"""Exception hierarchy shared by the solvers, simulators and the CLI."""


class ContestError(Exception):
    """Base class for domain failures (CLI exit code 1)."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ContractError(ValueError):
    """A caller violated a documented precondition."""


class InfeasibleError(ContestError):
    """A requested threshold cannot be reached by any reward scale."""


class DegenerateError(ContestError):
    """An estimation problem is not identified (corner frequency, singular system)."""


class VerificationError(ContestError):
    """A candidate equilibrium failed best-response verification."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
