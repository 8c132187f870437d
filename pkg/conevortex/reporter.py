"""Markdown report generation."""

from __future__ import annotations

from typing import Dict, List, Mapping

import pandas as pd
from tabulate import tabulate


def _format_value(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_table(frame: pd.DataFrame, max_rows: int = 50) -> str:
    """Github table of ``frame``, truncated to ``max_rows`` rows."""
    shown = frame.head(max_rows)
    table = tabulate(shown, headers="keys", tablefmt="github", showindex=False, floatfmt=".6g")
    if len(frame) > max_rows:
        table += f"\n\n... and {len(frame) - max_rows} more rows"
    return table


def build_report(
    command: str,
    summary: Mapping[str, object],
    tables: Mapping[str, pd.DataFrame] | None = None,
    checks: Mapping[str, bool] | None = None,
    warnings: List[str] | None = None,
) -> str:
    """Return a markdown report string for one run."""
    lines = [f"# conevortex report: {command}", "", "## Summary"]
    lines += [f"- {key}: {_format_value(value)}" for key, value in summary.items()]

    for title, frame in (tables or {}).items():
        lines += ["", f"## {title}", format_table(frame)]

    if checks:
        rows = [[name, "pass" if ok else "FAIL"] for name, ok in checks.items()]
        lines += ["", "## Checks", tabulate(rows, headers=["Check", "Result"], tablefmt="github")]

    if warnings:
        lines += ["", "## Notes and Warnings"]
        lines += [f"- {warning}" for warning in warnings]

    return "\n".join(lines) + "\n"


def checks_passed(checks: Dict[str, bool]) -> bool:
    return all(checks.values())
