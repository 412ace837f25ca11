"""Render CSV outputs as static line plots."""

from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer

from nonmarkov.commands import FormatOption, output_format, verbose
from nonmarkov.core.dynamics import RwaTrace, Trajectory
from nonmarkov.core.measures import MeasureTrace
from nonmarkov.core.positivity import PositivityReport
from nonmarkov.core.tcl_coefficients import TRACE_HEADER
from nonmarkov.models.errors import PlotError, error_boundary
from nonmarkov.output import diagnostic, format_output, read_csv

# Coefficient quantities are plotted as II + IV totals.
COEFFICIENT_PARTS = {
    "S+": ("S+II", "S+IV"),
    "S-": ("S-II", "S-IV"),
    "G-": ("G-II", "G-IV"),
    "G+": ("G+II", "G+IV"),
    "G0": ("G0",),
    "alpha": ("alphaII", "alphaIV"),
    "beta": ("betaII", "betaIV"),
}

LABELS = {
    "S+": r"$S_+$", "S-": r"$S_-$",
    "G-": r"$\Gamma_-$", "G+": r"$\Gamma_+$", "G0": r"$\Gamma_0$",
    "alpha": r"$\alpha$", "beta": r"$\beta$",
    "g": r"$g(t)$", "sigma": r"$\sigma(t)$", "G": r"$G(t)$",
    "gamma": r"$\gamma(t)$", "Gamma_accum": r"$\Gamma(t)$",
}

LINE_STYLES = ("-", ":", "--", "-.")


@dataclass(frozen=True)
class CsvKind:
    name: str
    header: tuple[str, ...]
    defaults: tuple[str, ...]


KINDS = (
    CsvKind("coefficients", tuple(TRACE_HEADER), ("G-", "G+", "G0")),
    CsvKind("measures", MeasureTrace.HEADER, ("sigma",)),
    CsvKind("positivity", PositivityReport.HEADER, ("G",)),
    CsvKind("trajectory", Trajectory.HEADER, ("bx", "by", "bz")),
    CsvKind("rwa", RwaTrace.HEADER, ("gamma",)),
)


@dataclass(frozen=True, eq=False)
class Panel:
    source: Path
    kind: str
    times: np.ndarray
    curves: dict[str, np.ndarray]


def _kind_of(path: Path, header: list[str]) -> CsvKind:
    for kind in KINDS:
        if set(kind.header) <= set(header):
            return kind
    raise PlotError("unrecognized CSV columns", detail=f"{path}: {', '.join(header) or '(none)'}")


def _column(rows: list[dict], name: str) -> np.ndarray:
    return np.array([float(row[name]) for row in rows])


def load_panel(path: Path, columns: Optional[list[str]] = None) -> Panel:
    """Read one CSV and pick the curves to draw; raises PlotError before any drawing."""
    path = Path(path)
    if not path.is_file():
        raise PlotError("CSV file not found", detail=str(path))
    header, rows = read_csv(path)
    if not header or not rows:
        raise PlotError("CSV file is empty", detail=str(path))
    if "t" not in header:
        raise PlotError("CSV has no t column", detail=str(path))
    kind = _kind_of(path, header)

    curves = {}
    for name in columns or kind.defaults:
        if kind.name == "coefficients" and name in COEFFICIENT_PARTS:
            curves[name] = sum(_column(rows, part) for part in COEFFICIENT_PARTS[name])
        elif name in header and name != "t":
            curves[name] = _column(rows, name)
        else:
            raise PlotError(f"missing column {name!r}", detail=str(path))
    return Panel(path, kind.name, _column(rows, "t"), curves)


def render(panels: list[Panel], target: Path, overlay: bool = False) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n_axes = 1 if overlay else len(panels)
    fig, axes = plt.subplots(1, n_axes, figsize=(4.8 * n_axes, 3.6), constrained_layout=True,
                             squeeze=False)
    for i, panel in enumerate(panels):
        ax = axes[0][0 if overlay else i]
        style = LINE_STYLES[i % len(LINE_STYLES)] if overlay else "-"
        for j, (name, values) in enumerate(panel.curves.items()):
            label = LABELS.get(name, name)
            if overlay:
                label = f"{label} ({panel.source.stem})"
            ax.plot(panel.times, values, linestyle=style, color=f"C{j}", label=label)
        if not overlay:
            ax.set_title(panel.source.stem)
    for ax in axes[0]:
        ax.axhline(0.0, color="0.6", linewidth=0.6)
        ax.set_xlabel(r"$t\ [\gamma_0^{-1}]$")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)

    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def plot(
    csv_files: Annotated[list[Path], typer.Argument(help="CSV files written by the other commands")],
    image: Annotated[
        Optional[Path], typer.Option("--image", help="Output image (default: first CSV as .png)")
    ] = None,
    overlay: Annotated[
        bool, typer.Option("--overlay", help="Draw all CSVs in one panel, one line style each")
    ] = False,
    columns: Annotated[
        Optional[str], typer.Option("--columns", help="Comma-separated quantities, e.g. alpha,beta")
    ] = None,
    output: FormatOption = None,
):
    """Render one panel per CSV, or a single overlaid panel."""
    with error_boundary():
        selected = [c.strip() for c in columns.split(",") if c.strip()] if columns else None
        panels = [load_panel(path, selected) for path in csv_files]
        target = image or csv_files[0].with_suffix(".png")
        render(panels, target, overlay)
        diagnostic(f"wrote {target}", verbose())

    format_output(
        {"image": str(target), "panels": 1 if overlay else len(panels),
         "sources": [str(p.source) for p in panels]},
        output_format(output),
    )
