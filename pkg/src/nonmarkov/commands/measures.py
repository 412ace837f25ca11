"""Non-Markovianity measure command."""

from typing import Annotated, Optional

import typer

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
    run_config,
    verbose,
)
from nonmarkov.core.measures import (
    MeasureTrace,
    Variant,
    integrated_measures,
    measure_trace,
    rwa_measure_trace,
)
from nonmarkov.models.errors import error_boundary
from nonmarkov.output import diagnostic, format_output, write_csv, write_json


def measures(
    figure: FigureOption = None,
    config: ConfigOption = None,
    order: OrderOption = None,
    variant: Annotated[Optional[Variant], typer.Option("--variant", help="Model variant")] = None,
    compare_rwa: Annotated[
        bool, typer.Option("--compare-rwa", help="Also write the rotating-wave curves")
    ] = False,
    second_order_only: Annotated[
        bool, typer.Option("--second-order-only", help="Drop the fourth-order parts first")
    ] = False,
    tmax: TmaxOption = None,
    grid: GridOption = None,
    out: OutOption = None,
    output: FormatOption = None,
):
    """Compute g(t) and σ(t), their intervals and integrated measures.

    Writes measures_<label>_<variant>.csv and a matching _intervals.json per
    variant; --compare-rwa adds the rotating-wave variant.
    """
    traces = []
    with error_boundary():
        cfg = run_config(figure, config, order=order, variant=variant, tmax=tmax,
                         grid=grid, out=out)
        variants = [cfg.variant]
        if compare_rwa and Variant.rwa not in variants:
            variants.append(Variant.rwa)

        summaries = []
        for v in variants:
            if v is Variant.rwa:
                result = rwa_measure_trace(cfg.params, cfg.time_grid)
            else:
                if not traces:
                    traces.append(compute_trace(cfg))
                result = measure_trace(traces[0], v, second_order_only=second_order_only,
                                       ode_rtol=cfg.ode_rtol, verbose=verbose())
            summaries.append(_write(cfg.out, f"measures_{cfg.label}_{v.value}", result))

    format_output(summaries[0] if len(summaries) == 1 else summaries, output_format(output))
    check_strict(traces)


def _write(out, stem: str, result: MeasureTrace) -> dict:
    csv_path = write_csv(out / f"{stem}.csv", MeasureTrace.HEADER, result.to_rows())
    json_path = write_json(out / f"{stem}_intervals.json", result.intervals())
    diagnostic(f"wrote {csv_path} and {json_path}", verbose())
    n_blp, i_rhp = integrated_measures(result)
    return {
        "variant": result.variant.value,
        "csv": str(csv_path),
        "intervals": str(json_path),
        "idi": result.intervals()["idi"],
        "ibi": result.intervals()["ibi"],
        "N_blp": n_blp,
        "I_rhp": i_rhp,
        "violations": result.violations,
        "tol": result.tol,
    }
