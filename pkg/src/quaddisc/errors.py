"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies on a pole, branch point or outside a function's domain."""


class ConvergenceError(RuntimeError):
    """A numerical procedure (bisection, quadrature, scan) failed to converge."""
