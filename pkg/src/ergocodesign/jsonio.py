"""JSON reading/writing helpers with located parse errors and schema checks."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ParseError

__all__ = ["Diagnostic", "read_json", "write_json", "load_schema", "schema_diagnostics", "dumps"]


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding with a stable machine-readable ``code``."""

    code: str
    message: str
    path: str = ""

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "path": self.path}

    def __str__(self) -> str:
        loc = f" at {self.path}" if self.path else ""
        return f"{self.code}{loc}: {self.message}"


def read_json(path) -> dict:
    """Parse a JSON file, raising ParseError with line/column on malformed input."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", source=str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source=str(path), line=exc.lineno, column=exc.colno) from None


def dumps(data) -> str:
    """Deterministic JSON text (sorted keys, repr floats, trailing newline)."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data))


def load_schema(name: str) -> dict:
    text = resources.files("ergocodesign").joinpath("data", "schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def schema_diagnostics(data, schema_name: str) -> list[Diagnostic]:
    """Schema violations of ``data`` as diagnostics with code ``schema.invalid``."""
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    out = []
    for err in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path))):
        path = "/".join(str(p) for p in err.absolute_path)
        out.append(Diagnostic("schema.invalid", err.message, path))
    return out
