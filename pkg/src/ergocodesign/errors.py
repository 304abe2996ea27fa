"""Exception types shared across the package."""


class ErgoCodesignError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(ErgoCodesignError, ValueError):
    """Input is numerically degenerate (e.g. a zero quaternion)."""


class InvalidShapeError(ErgoCodesignError, ValueError):
    """Shape primitive with invalid dimensions or axis."""


class FrameLookupError(ErgoCodesignError, KeyError):
    """Named frame, link or joint does not exist."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ModelError(ErgoCodesignError, ValueError):
    """Model description is structurally inconsistent."""


class ContractError(ErgoCodesignError, ValueError):
    """Caller violated a documented precondition (dimensions, status, layout)."""


class ParseError(ErgoCodesignError, ValueError):
    """Structured-text input could not be parsed; carries location information."""

    def __init__(self, message: str, source: str = "", line: int | None = None, column: int | None = None, field: str | None = None):
        self.source, self.line, self.column, self.field = source, line, column, field
        where = source
        if line is not None:
            where += f":{line}" if column is None else f":{line}:{column}"
        if field:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}" if where else message)
