"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, Field

Rational = List[int]


def rational(value: Any) -> Rational:
    """[numerator, denominator] of an exact value."""
    value = Fraction(value)
    return [value.numerator, value.denominator]


class CheckResult(BaseModel):
    name: str
    passed: bool
    expected: Optional[str] = None
    actual: Optional[str] = None
    tolerance: Optional[float] = None
    seconds: float = 0.0
    detail: Optional[str] = None


class RunReport(BaseModel):
    kind: Literal["run-report"] = "run-report"
    command: str
    level: str
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


class MomentRow(BaseModel):
    """One even moment; count is |OV²(order)| when the method yields it."""

    order: int
    numerator: int
    denominator: int
    decimal: float
    count: Optional[int] = None
    printed_count: Optional[int] = None
    N: Optional[int] = None
    extrapolated: Optional[float] = None

    @classmethod
    def of(cls, order: int, value: Any, **extra: Any) -> "MomentRow":
        value = Fraction(value)
        return cls(order=order, numerator=value.numerator, denominator=value.denominator,
                   decimal=float(value), **extra)


class MomentTableReport(BaseModel):
    kind: Literal["moment-table"] = "moment-table"
    method: str
    rows: List[MomentRow]


class LabeledPartitionRow(BaseModel):
    blocks: List[List[int]]
    labels: List[int]


class EnumerationReport(BaseModel):
    kind: Literal["enumeration"] = "enumeration"
    family: str
    seq: Optional[List[int]] = None
    order: Optional[int] = None
    k: Optional[int] = None
    count: int
    partitions: List[LabeledPartitionRow]


class PolynomialTerm(BaseModel):
    vars: List[List[int]]
    coeff: int


class UniversalPolynomialReport(BaseModel):
    kind: Literal["universal-polynomial"] = "universal-polynomial"
    seq: List[int]
    terms: List[PolynomialTerm]


class MgfRow(BaseModel):
    z: float
    M: Optional[float] = None
    residual: Optional[float] = None
    error: Optional[str] = None


class MgfReport(BaseModel):
    kind: Literal["mgf"] = "mgf"
    rows: List[MgfRow]
    series: Dict[int, float] = Field(default_factory=dict)


def _open_output(output: Optional[str]):
    if output:
        directory = os.path.dirname(os.path.abspath(output))
        os.makedirs(directory, exist_ok=True)
        return open(output, "w", encoding="utf-8", newline="")
    return None


def render_csv(rows: Sequence[BaseModel], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        data = row.model_dump()
        writer.writerow(["" if data.get(column) is None else data.get(column) for column in columns])
    return buffer.getvalue()


def render_json(report: BaseModel) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def emit(text: str, output: Optional[str] = None) -> str:
    """Write text to output, or to stdout when no path is given. Returns the destination."""
    handle = _open_output(output)
    if handle is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return "<stdout>"
    with handle:
        handle.write(text)
    return output  # type: ignore[return-value]
