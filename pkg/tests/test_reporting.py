# © 2024 Carlos Manzanedo Rueda
# MIT License

import json
from fractions import Fraction

import jsonschema
import pytest

from reporting import (
    CheckResult,
    EnumerationReport,
    LabeledPartitionRow,
    MgfReport,
    MgfRow,
    MomentRow,
    MomentTableReport,
    RunReport,
    emit,
    rational,
    render_csv,
    render_json,
)


def test_rational():
    assert rational(Fraction(14, 3)) == [14, 3]
    assert rational(2) == [2, 1]


def test_moment_row_of():
    row = MomentRow.of(6, Fraction(28, 6), count=28)
    assert (row.numerator, row.denominator) == (14, 3)
    assert row.decimal == pytest.approx(14 / 3)
    assert row.count == 28
    assert row.N is None


def test_run_report_failures():
    report = RunReport(command="verify", level="fast", seed=1, checks=[
        CheckResult(name="a", passed=True),
        CheckResult(name="b", passed=False, expected="1", actual="2"),
    ])
    assert not report.passed
    assert [c.name for c in report.failures] == ["b"]
    assert RunReport(command="verify", level="fast", seed=1).passed


def test_render_csv_blanks_missing_values():
    rows = [MomentRow.of(2, 1, count=1), MomentRow.of(4, 2)]
    text = render_csv(rows, ["order", "numerator", "denominator", "count"])
    assert text.splitlines() == ["order,numerator,denominator,count", "2,1,1,1", "4,2,1,"]
    assert text.endswith("\n")


def test_render_json_matches_schema(schema):
    report = MomentTableReport(method="recurrence", rows=[MomentRow.of(2, 1), MomentRow.of(4, 2)])
    text = render_json(report)
    assert text.endswith("}\n")
    data = json.loads(text)
    assert data["kind"] == "moment-table"
    jsonschema.validate(data, schema)


def test_enumeration_and_mgf_reports_match_schema(schema):
    enumeration = EnumerationReport(
        family="ov2", order=2, count=1,
        partitions=[LabeledPartitionRow(blocks=[[1, 2]], labels=[1])],
    )
    jsonschema.validate(json.loads(render_json(enumeration)), schema)
    mgf_report = MgfReport(rows=[MgfRow(z=0.0, M=1.0), MgfRow(z=0.6, error="out of range")],
                           series={0: 1.0, 1: 0.0, 2: 1.0})
    jsonschema.validate(json.loads(render_json(mgf_report)), schema)


def test_schema_rejects_unknown_kind(schema):
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"kind": "something-else", "rows": []}, schema)


def test_emit_to_file(tmp_path):
    target = tmp_path / "nested" / "out.csv"
    assert emit("a,b\n", str(target)) == str(target)
    assert target.read_text(encoding="utf-8") == "a,b\n"


def test_emit_to_stdout(capsys):
    assert emit("hello\n") == "<stdout>"
    assert capsys.readouterr().out == "hello\n"
