"""Output formatting for CLI results and data files."""

import csv
import io
import json
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence

import typer
from rich.console import Console
from rich.table import Table

# Diagnostics go to stderr; stdout carries command results only.
err_console = Console(stderr=True, highlight=False)


class OutputFormat(str, Enum):
    json = "json"
    table = "table"
    csv = "csv"


def format_output(
    data: Any,
    fmt: OutputFormat = OutputFormat.json,
    columns: Optional[list[str]] = None,
) -> None:
    """Format and print data in the requested format."""
    if data is None:
        typer.echo("{}")
        return

    if fmt == OutputFormat.json:
        typer.echo(json.dumps(data, indent=2, default=str))
    elif fmt == OutputFormat.table:
        _print_table(data, columns)
    elif fmt == OutputFormat.csv:
        _print_csv(data, columns)


def _cell(value: Any) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, default=str)
    return str(value)


def _print_table(data: Any, columns: Optional[list[str]] = None) -> None:
    """Print data as a rich table."""
    console = Console()
    if isinstance(data, list):
        if not data:
            typer.echo("(no results)")
            return
        cols = columns or list(data[0].keys())[:8]
        table = Table()
        for col in cols:
            table.add_column(col)
        for row in data:
            table.add_row(*[_cell(row.get(c, "")) for c in cols])
        console.print(table)
    elif isinstance(data, dict):
        table = Table(show_header=False)
        table.add_column("Field")
        table.add_column("Value")
        for k, v in data.items():
            table.add_row(str(k), _cell(v))
        console.print(table)


def _print_csv(data: Any, columns: Optional[list[str]] = None) -> None:
    """Print data as CSV."""
    rows = data if isinstance(data, list) else [data]
    if not rows:
        return
    cols = columns or list(rows[0].keys())
    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=cols, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: _cell(row.get(c, "")) for c in cols})
    typer.echo(output.getvalue().strip())


def diagnostic(message: str, verbose: bool, tag: str = "io") -> None:
    """Bracket-tagged progress line on stderr when verbose."""
    if verbose:
        err_console.print(f"[{tag}] {message}", markup=False)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[dict]) -> Path:
    """Write rows with an exact header; floats keep full repr precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(header), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return path


def read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Header and rows of a CSV file; an empty file gives ([], [])."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def write_json(path: Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path
