"""Root CLI application with Typer."""

from typing import Annotated, Optional

import click
import typer

from nonmarkov import __version__
from nonmarkov.models.errors import ExitCode, NonMarkovError, exit_code_for, handle_error
from nonmarkov.output import OutputFormat

app = typer.Typer(
    name="nonmarkov",
    help="TCL4 qubit dynamics and non-Markovianity measures beyond the rotating-wave approximation.",
    no_args_is_help=True,
    invoke_without_command=True,
    pretty_exceptions_enable=False,
)

# Global state set by the main callback
_output_format: OutputFormat = OutputFormat.json
_verbose: bool = False
_workers: Optional[int] = None
_strict: bool = False


def get_output_format() -> OutputFormat:
    """Get the globally-configured output format."""
    return _output_format


def is_verbose() -> bool:
    return _verbose


def get_workers() -> Optional[int]:
    return _workers


def is_strict() -> bool:
    return _strict


# Register commands (imported here to avoid circular imports)
from nonmarkov.commands import config_cmd  # noqa: E402
from nonmarkov.commands.coefficients import coefficients  # noqa: E402
from nonmarkov.commands.measures import measures  # noqa: E402
from nonmarkov.commands.plot import plot  # noqa: E402
from nonmarkov.commands.positivity import positivity  # noqa: E402
from nonmarkov.commands.trajectory import trajectory  # noqa: E402

app.command("coefficients")(coefficients)
app.command("measures")(measures)
app.command("positivity")(positivity)
app.command("trajectory")(trajectory)
app.command("plot")(plot)
app.add_typer(config_cmd.app, name="config")


@app.callback()
def main(
    output: Annotated[
        OutputFormat,
        typer.Option("-o", "--output", help="Output format"),
    ] = OutputFormat.json,
    verbose: Annotated[
        bool,
        typer.Option("-v", "--verbose", help="Progress diagnostics on stderr"),
    ] = False,
    workers: Annotated[
        Optional[int],
        typer.Option("--workers", min=1, help="Processes for the coefficient sweep"),
    ] = None,
    strict: Annotated[
        bool,
        typer.Option("--strict", help="Exit 2 when any cubature point was flagged"),
    ] = False,
    version: Annotated[
        bool,
        typer.Option("--version", help="Show version and exit", is_eager=True),
    ] = False,
):
    """TCL4 qubit dynamics and non-Markovianity measures."""
    global _output_format, _verbose, _workers, _strict

    if version:
        typer.echo(f"nonmarkov v{__version__}")
        raise typer.Exit()

    _output_format = output
    _verbose = verbose
    _workers = workers
    _strict = strict


def main_entrypoint():
    """Entry point for the CLI (used by pyproject.toml scripts)."""
    try:
        code = app(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        raise SystemExit(ExitCode.USAGE.value)
    except click.exceptions.Abort:
        raise SystemExit(ExitCode.USAGE.value)
    except NonMarkovError as e:
        handle_error(exit_code_for(e), e.message, detail=e.detail)
    if isinstance(code, int) and code:
        raise SystemExit(code)
