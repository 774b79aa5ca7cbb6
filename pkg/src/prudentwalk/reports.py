"""Serializable result records."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from ._version import CODE_VERSION

REPORT_SCHEMA = 1


def _plain(value: Any) -> Any:
    """JSON-ready copy: Fractions become "p/q", tuples lists, NaN/inf strings."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if math.isfinite(value):
            return value
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):  # numpy scalar
        return _plain(value.item())
    raise TypeError(f"cannot serialise {type(value).__name__}")


@dataclass
class Report:
    operation: str
    inputs: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    passed: bool | None = None
    witness: Any = None
    tail_allowance: Any = None
    warnings: list = field(default_factory=list)
    seed: int | None = None
    code_version: str = CODE_VERSION

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "operation": self.operation,
            "code_version": self.code_version,
            "inputs": _plain(self.inputs),
            "values": _plain(self.values),
            "witness": _plain(self.witness),
            "tail_allowance": _plain(self.tail_allowance),
            "seed": self.seed,
            "warnings": list(self.warnings),
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "Report":
        return cls(
            operation=doc["operation"],
            inputs=doc.get("inputs", {}),
            values=doc.get("values", {}),
            passed=doc.get("pass"),
            witness=doc.get("witness"),
            tail_allowance=doc.get("tail_allowance"),
            warnings=doc.get("warnings", []),
            seed=doc.get("seed"),
            code_version=doc.get("code_version", CODE_VERSION),
        )


def csv_text(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_plain(v) if isinstance(v, Fraction) else v for v in row])
    return buf.getvalue()
