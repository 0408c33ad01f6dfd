"""Exception types shared across the package."""


class SsmapError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SsmapError):
    """Syntax error in a model file, with 1-based position."""

    def __init__(self, message: str, line: int, col: int = 0):
        super().__init__(f"line {line}: {message}" if col == 0 else f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class SemanticError(SsmapError):
    """Structurally valid input that violates a model constraint."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class MarginTooLarge(SsmapError):
    """Inset margin leaves no room inside some threshold interval."""

    def __init__(self, var: int, message: str):
        super().__init__(message)
        self.var = var


class ThresholdMismatch(SsmapError):
    """Distinct term thresholds of a variable do not match its level count."""

    def __init__(self, var: int, found: int, expected: int):
        super().__init__(
            f"variable index {var}: found {found} distinct term thresholds, expected {expected}"
        )
        self.var = var
        self.found = found
        self.expected = expected


class UndeclaredThreshold(SsmapError):
    """A term threshold falls strictly inside a region interval."""

    def __init__(self, var: int, threshold: float):
        super().__init__(
            f"threshold {threshold} on variable index {var} is not one of its declared thresholds"
        )
        self.var = var
        self.threshold = threshold


class TooLarge(SsmapError):
    """Input exceeds an enumeration guard."""


class DivergedOutsideCube(SsmapError):
    """Integration left the unit cube by more than the allowed overshoot."""

    def __init__(self, step: int, point):
        super().__init__(f"trajectory left [0,1]^N at step {step}: {point}")
        self.step = step
        self.point = point


class SingularNewtonStep(SsmapError):
    """Newton linear solve hit a singular Jacobian."""


class RangeViolationWarning(UserWarning):
    """A system value exceeded 1; the map is assumed to stay in [0,1]^N."""
