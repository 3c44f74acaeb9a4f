"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes or block partitions do not fit together."""


class IllPosedError(ArithmeticError):
    """A feedback resolvent is singular or too badly conditioned to invert."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class ProjectionError(ValueError):
    """A matrix declared to be an orthogonal projection is not one."""


class BlockDiagonalError(ValueError):
    """An open-loop operator expected to be block diagonal has coupling blocks."""

    def __init__(self, message, off_diagonal_norm):
        super().__init__(message)
        self.off_diagonal_norm = off_diagonal_norm


class NoRootError(RuntimeError):
    """A bracketing root search found no sign change."""


class NoConvergenceError(RuntimeError):
    """A fixed-point iteration ran out of iterations."""


class ParadoxError(ArithmeticError):
    """Post-selection onto an outcome of (numerically) zero probability."""

    def __init__(self, message, probability):
        super().__init__(message)
        self.probability = probability


class NetworkSyntaxError(ValueError):
    """Network file is not well-formed JSON."""

    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset


class SchemaError(ValueError):
    """Network file violates the schema; ``errors`` holds (path, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"{path or '<root>'}: {msg}" for path, msg in self.errors]
        super().__init__("; ".join(lines))


class NetworkValueError(ValueError):
    """Network file parses but carries an invalid numeric value."""
