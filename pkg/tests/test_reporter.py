import pandas as pd

from conevortex.reporter import build_report, checks_passed, format_table


def test_report_contains_summary() -> None:
    report = build_report("minimize", {"epsilon": 0.05, "dbar": 2})
    assert report.startswith("# conevortex report: minimize")
    assert "## Summary" in report
    assert "- epsilon: 0.05" in report
    assert "- dbar: 2" in report


def test_report_includes_tables_and_checks() -> None:
    frame = pd.DataFrame({"r": [0.5], "theta": [1.0], "degree": [1]})
    report = build_report("minimize", {}, {"Vortices": frame}, {"tip_vanishes": True, "boundary_degree": False})
    assert "## Vortices" in report
    assert "| tip_vanishes" in report
    assert "FAIL" in report


def test_report_handles_warnings() -> None:
    """Warnings land in their own section."""
    report = build_report("growth", {"rule": "exact"}, warnings=["falling back to the ramp initialization"])
    assert "## Notes and Warnings" in report
    assert "falling back" in report


def test_report_omits_empty_sections() -> None:
    report = build_report("mtable", {"rows": 3})
    assert "## Checks" not in report
    assert "## Notes and Warnings" not in report


def test_format_table_truncates() -> None:
    frame = pd.DataFrame({"d": range(60)})
    table = format_table(frame, max_rows=10)
    assert "... and 50 more rows" in table
    assert table.startswith("|")


def test_checks_passed() -> None:
    assert checks_passed({})
    assert checks_passed({"a": True})
    assert not checks_passed({"a": True, "b": False})
