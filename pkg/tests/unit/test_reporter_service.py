"""Unit tests for ReporterService."""

import csv
import json
from io import StringIO

import numpy as np
import pytest
from rich.console import Console

from mradon.reporters import ReporterService, ReportFormat, ReportTable, format_number


@pytest.fixture
def sample_table():
    """Create a small error-per-level table."""
    table = ReportTable(title="Spline inversion", columns=["level", "error", "passed"])
    table.add_row(0, 0.125, True)
    table.add_row(1, np.float64(1.0 / 3.0), False)
    table.notes.append("t = 1.5")
    return table


def test_format_number():
    """Test the text form of table cells."""
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(True) == "true"
    assert format_number(np.int64(3)) == "3"
    assert format_number("S2") == "S2"


def test_add_row_checks_width():
    """Test that rows must match the columns."""
    table = ReportTable(title="t", columns=["a", "b"])

    with pytest.raises(ValueError):
        table.add_row(1)


def test_generate_tsv_report(sample_table):
    """Test TSV report generation."""
    report = ReporterService().render(sample_table, ReportFormat.TSV)
    rows = list(csv.reader(StringIO(report), delimiter="\t"))

    assert rows[0] == ["level", "error", "passed"]
    assert rows[1] == ["0", "0.125", "true"]
    assert float(rows[2][1]) == 1.0 / 3.0
    assert len(rows) == 3


def test_generate_json_report(sample_table):
    """Test JSON report generation."""
    data = json.loads(ReporterService().render(sample_table, ReportFormat.JSON))

    assert data[0] == {"level": 0, "error": 0.125, "passed": True}
    assert data[1]["error"] == 1.0 / 3.0


def test_generate_console_report(sample_table):
    """Test console rendering with title and notes."""
    report = ReporterService().render(sample_table, ReportFormat.CONSOLE)

    assert "Spline inversion" in report
    assert "t = 1.5" in report
    assert "PASS" in report
    assert "FAIL" in report


def test_save_report(sample_table, tmp_path):
    """Test that rendering with a path writes the file."""
    output = tmp_path / "nested" / "errors.tsv"

    content = ReporterService().render(sample_table, ReportFormat.TSV, output)

    assert output.read_text(encoding="utf-8") == content


def test_display(sample_table):
    """Test printing to the service console."""
    console = Console(file=StringIO(), width=100)
    ReporterService(console=console).display(sample_table)

    assert "level" in console.file.getvalue()


def test_unsupported_format(sample_table):
    """Test that unknown formats are refused."""
    with pytest.raises(ValueError):
        ReporterService().render(sample_table, "xml")  # type: ignore[arg-type]
