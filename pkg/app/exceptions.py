from typing import Iterable, Optional


class ETLError(ValueError):
    """Base class for every error the toolkit reports to callers."""

    code = "etl-error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DimensionMismatchError(ETLError):
    code = "dimension-mismatch"


class NonFiniteEntryError(ETLError):
    code = "non-finite-entry"


class IndexOutOfRangeError(ETLError):
    code = "index-out-of-range"


class NegativeThresholdError(ETLError):
    code = "negative-threshold"


class ZeroVectorError(ETLError):
    code = "zero-vector"


class EmptySetError(ETLError):
    code = "empty-set"


class IncompatibleMetricError(ETLError):
    code = "incompatible-metric"


class InvalidInputError(ETLError):
    code = "invalid-input"


class SpecSyntaxError(ETLError):
    """Lexer or parser failure, positioned as ``line:col: message``"""

    code = "spec-syntax"

    def __init__(self, message: str, line: int, column: int, expected: Optional[Iterable[str]] = None):
        self.line = line
        self.column = column
        self.expected = sorted(expected) if expected else []
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


class UnresolvedIdentifierError(ETLError):
    code = "unresolved-identifier"

    def __init__(self, name: str, line: Optional[int] = None, column: Optional[int] = None):
        self.name = name
        prefix = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{prefix}unresolved identifier '{name}'")


class ManifestIOError(ETLError):
    code = "io-error"


class ManifestSchemaError(ETLError):
    code = "schema-error"


class WindowTooLargeError(ETLError):
    code = "window-too-large"


class FormulaTooDeepError(ETLError):
    code = "formula-too-deep"


class InvalidDimensionError(ETLError):
    code = "invalid-dimension"


class NonFiniteInputError(ETLError):
    code = "non-finite-input"


class InsufficientHistoryError(ETLError):
    code = "insufficient-history"


class ActionOutOfBoundsError(ETLError):
    code = "action-out-of-bounds"


class ConfigError(ETLError):
    code = "config-error"
