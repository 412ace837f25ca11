"""Config commands: init, show."""

from pathlib import Path
from typing import Annotated, Optional

import typer

from nonmarkov.commands import ConfigOption, FigureOption, FormatOption, output_format, run_configs
from nonmarkov.config import get_config_dir, save_default_config
from nonmarkov.models.errors import error_boundary
from nonmarkov.output import format_output

app = typer.Typer(help="Configuration management.")


@app.command()
def init(
    config_dir: Annotated[Optional[Path], typer.Option("--config-dir", help="Config directory override")] = None,
    force: Annotated[bool, typer.Option("--force", help="Overwrite an existing file")] = False,
    output: FormatOption = None,
):
    """Write a commented default config file.

    The file goes to --config-dir, else $NONMARKOV_CONFIG_DIR, else ~/.nonmarkov.
    """
    with error_boundary():
        path = save_default_config(config_dir, force=force)
    format_output({"status": "written", "config_file": str(path)}, output_format(output))


@app.command()
def show(
    figure: FigureOption = None,
    config: ConfigOption = None,
    output: FormatOption = None,
):
    """Display the fully resolved run configuration."""
    with error_boundary():
        resolved = [cfg.as_dict() for cfg in run_configs(figure, config)]
    for entry in resolved:
        entry["config_dir"] = str(get_config_dir())
    format_output(resolved[0] if len(resolved) == 1 else resolved, output_format(output))
