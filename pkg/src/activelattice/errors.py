"""Exception hierarchy shared by every module."""


class ActiveLatticeError(Exception):
    """Base class for errors raised by this package."""


class StructuralError(ActiveLatticeError, ValueError):
    """Shapes or block layouts do not fit the requested operation."""


class DomainError(ActiveLatticeError, ValueError):
    """An input lies outside the domain of an operation (not a projection, det != 1, ...)."""


class NumericError(ActiveLatticeError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class ReconstructionError(ActiveLatticeError):
    """A step of morphism reconstruction degenerated.

    ``step`` names the pipeline stage so callers can report it.
    """

    def __init__(self, step: str, message: str):
        super().__init__(f"{step}: {message}")
        self.step = step
