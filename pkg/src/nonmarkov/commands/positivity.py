"""Complete-positivity diagnostics command."""

import numpy as np

from nonmarkov.commands import (
    ConfigOption,
    FigureOption,
    FormatOption,
    GridOption,
    OrderOption,
    OutOption,
    TmaxOption,
    check_strict,
    compute_trace,
    output_format,
    run_configs,
    verbose,
)
from nonmarkov.core.positivity import PositivityReport, positivity_report
from nonmarkov.models.errors import error_boundary
from nonmarkov.output import diagnostic, format_output, write_csv


def positivity(
    figure: FigureOption = None,
    config: ConfigOption = None,
    order: OrderOption = None,
    tmax: TmaxOption = None,
    grid: GridOption = None,
    out: OutOption = None,
    output: FormatOption = None,
):
    """Evaluate G(t) and the positivity conditions; --figure 4 runs all three sets."""
    traces = []
    summaries = []
    with error_boundary():
        for cfg in run_configs(figure, config, order=order, tmax=tmax, grid=grid, out=out):
            trace = compute_trace(cfg)
            traces.append(trace)
            report = positivity_report(trace)
            path = write_csv(cfg.out / f"positivity_{cfg.label}.csv",
                             PositivityReport.HEADER, report.to_rows())
            diagnostic(f"wrote {path}", verbose())
            summaries.append(_summary(cfg.label, cfg.params.correlation_time, report, str(path)))

    format_output(summaries[0] if len(summaries) == 1 else summaries, output_format(output))
    check_strict(traces)


def _summary(label: str, correlation_time: float, report: PositivityReport, path: str) -> dict:
    window = (report.times > 0) & (report.times <= correlation_time)
    min_g = float(report.G[window].min()) if window.any() else None
    return {
        "label": label,
        "csv": path,
        "min_G_within_correlation_time": min_g,
        "necessary_hold": bool(np.all(report.nec1 & report.nec2)),
        "sufficient_points": int(report.suff.sum()),
        "relaxed_points": int(report.relaxed.sum()),
        "violations": report.violations,
    }
