"""Unit tests for the built-in self-test checks."""

import pytest

from mradon.checks import all_passed, check_names, run_checks
from mradon.reporters import ReportTable


def test_check_names_are_unique():
    """Test that every check has its own name."""
    names = check_names()

    assert len(names) == len(set(names))
    assert "round_trips" in names
    assert "multipliers" in names


def test_single_check():
    """Test running just one check."""
    table = run_checks(seed=0, only="round_trips")

    assert table.columns == ["check", "passed", "detail"]
    assert [row[0] for row in table.rows] == ["round_trips"]
    assert all_passed(table)


def test_multiplier_oracle():
    """Test the closed-form multiplier values."""
    assert all_passed(run_checks(only="multipliers"))


def test_unknown_check():
    """Test that an unknown name is refused."""
    with pytest.raises(KeyError):
        run_checks(only="nonexistent")


def test_all_passed_detects_failure():
    """Test that one failed row fails the table."""
    table = ReportTable(title="t", columns=["check", "passed", "detail"])
    table.add_row("a", True, "")
    table.add_row("b", False, "broken")

    assert not all_passed(table)


def test_every_criterion_has_a_check():
    """Test that convergence and frame iteration are part of the self-test."""
    names = check_names()

    assert any("convergence" in name for name in names)
    assert "frame_algorithm" in names
    assert "discrete_inversion" in names
    assert "parseval_frame" in names


def test_frame_algorithm_check():
    """Test the frame iteration check on its own."""
    table = run_checks(seed=0, only="frame_algorithm")

    assert all_passed(table)
    assert "measured ratio" in table.rows[0][2]
