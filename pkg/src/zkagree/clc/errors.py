from __future__ import annotations


class ContractError(Exception):
    """Base class for contract compilation and validation failures."""


class ParseError(ContractError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 source: str | None = None) -> None:
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.source or "<logic>"
        if self.line is not None:
            where += f":{self.line}"
            if self.col is not None:
                where += f":{self.col}"
        return f"{where}: {self.message}"


class TypeCheckError(ContractError):
    def __init__(self, message: str, expr: str = "", line: int | None = None) -> None:
        self.expr = expr
        self.line = line
        loc = f" (line {line})" if line is not None else ""
        detail = f" in `{expr}`" if expr else ""
        super().__init__(f"{message}{detail}{loc}")


class SchemaError(ContractError):
    pass


class SchemaViolation(ContractError):
    """External inputs do not conform to the contract's data schema."""
