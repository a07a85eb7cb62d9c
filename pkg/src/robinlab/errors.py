"""Exception types raised by robinlab."""


class RobinLabError(Exception):
    """Base class for all robinlab errors."""


class DomainError(RobinLabError, ValueError):
    """An argument lies outside the domain of a geometric function."""


class UnsupportedParameterError(RobinLabError, ValueError):
    """A parameter value the solvers deliberately do not handle (e.g. alpha > 0)."""


class IntegrationError(RobinLabError, RuntimeError):
    """The radial ODE integration failed before reaching the end point."""

    def __init__(self, message, last_r=None):
        super().__init__(message)
        self.last_r = last_r


class BracketError(RobinLabError, RuntimeError):
    """No sign change was found while bracketing a root."""


class DegenerateMeshError(RobinLabError, ValueError):
    """A mesh violates the Mesh2D invariants (zero-area triangle, bad boundary, ...)."""


class SolverError(RobinLabError, RuntimeError):
    """An iterative eigensolver or fixed-point iteration did not converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
