"""Exception types raised across the package."""


class BelsError(Exception):
    """Base class for all package errors."""


class InvalidConfig(BelsError, ValueError):
    pass


class ShapeMismatch(BelsError, ValueError):
    pass


class SingularSystem(BelsError, ArithmeticError):
    """A linear system could not be factorized, even with ridge damping."""


class EmptyStream(BelsError):
    pass


class ParseError(BelsError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonNumericFeature(BelsError, ValueError):
    def __init__(self, column: str, line: int, value: str):
        super().__init__(f"column {column!r} is not numeric (line {line}: {value!r})")
        self.column = column
        self.line = line
