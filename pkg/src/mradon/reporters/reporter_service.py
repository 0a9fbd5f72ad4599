"""Report generation for plot-ready experiment tables."""

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from io import StringIO
from pathlib import Path
from typing import Any, List, Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table


class ReportFormat(Enum):
    """Supported report output formats."""
    TSV = "tsv"
    JSON = "json"
    CONSOLE = "console"


@dataclass
class ReportTable:
    """A titled table of experiment results.

    Attributes:
        title: Caption shown on the console and ignored in TSV
        columns: Column names
        rows: Row values in column order
        notes: Extra lines shown under the console table
    """

    title: str
    columns: List[str]
    rows: List[Sequence[Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(values)


def format_number(value: Any) -> str:
    """Text form of a cell; floats keep 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    if hasattr(value, "item"):
        return format_number(value.item())
    return str(value)


def _json_value(value: Any) -> Any:
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    return value


class ReporterService:
    """Service rendering :class:`ReportTable` objects.

    TSV output has a one-line header; JSON is a list of records; the console
    format draws a rich table inside a panel.
    """

    def __init__(self, console: Optional[Console] = None):
        """Initialize the reporter service.

        Args:
            console: Console used by :meth:`display`; defaults to stdout
        """
        self.console = console or Console()

    def render(self, table: ReportTable, format: ReportFormat, output_path: Optional[Path] = None) -> str:
        """Render a table and optionally save it.

        Args:
            table: Table to render
            format: Output format
            output_path: Optional path to save the rendered text to

        Returns:
            The rendered text

        Raises:
            ValueError: If an unsupported format is specified
        """
        if format == ReportFormat.TSV:
            content = self._format_tsv(table)
        elif format == ReportFormat.JSON:
            content = self._format_json(table)
        elif format == ReportFormat.CONSOLE:
            content = self._format_console(table)
        else:
            raise ValueError(f"Unsupported report format: {format}")

        if output_path:
            self.save_report(content, output_path)
        return content

    def _format_tsv(self, table: ReportTable) -> str:
        output = StringIO()
        writer = csv.writer(output, delimiter="\t", lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_number(value) for value in row])
        return output.getvalue()

    def _format_json(self, table: ReportTable) -> str:
        records = [
            {column: _json_value(value) for column, value in zip(table.columns, row)}
            for row in table.rows
        ]
        return json.dumps(records, indent=2, sort_keys=True)

    def _build_rich_table(self, table: ReportTable) -> Table:
        rich_table = Table(show_header=True, header_style="bold magenta")
        for i, column in enumerate(table.columns):
            rich_table.add_column(column, style="cyan" if i == 0 else "green", justify="left" if i == 0 else "right")
        for row in table.rows:
            rich_table.add_row(*(self._console_cell(value) for value in row))
        return rich_table

    @staticmethod
    def _console_cell(value: Any) -> str:
        if isinstance(value, bool):
            return "[green]PASS[/green]" if value else "[red]FAIL[/red]"
        if isinstance(value, float) or hasattr(value, "item"):
            return f"{float(value):.6g}"
        return str(value)

    def _format_console(self, table: ReportTable) -> str:
        console = Console(file=StringIO(), force_terminal=True, width=100)
        console.print(Panel(self._build_rich_table(table), title=f"[bold cyan]{table.title}[/bold cyan]", border_style="cyan"))
        for note in table.notes:
            console.print(f"  {note}")
        return console.file.getvalue()  # type: ignore[attr-defined]

    def display(self, table: ReportTable) -> None:
        """Print a table to the service console."""
        self.console.print(Panel(self._build_rich_table(table), title=f"[bold cyan]{table.title}[/bold cyan]", border_style="cyan"))
        for note in table.notes:
            self.console.print(f"  {note}")

    def save_report(self, content: str, output_path: Path) -> None:
        """Save report to file.

        Args:
            content: The report content to save
            output_path: Path where the report should be saved

        Raises:
            IOError: If the file cannot be written
        """
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(content, encoding="utf-8")
