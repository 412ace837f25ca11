"""Run configuration: defaults, figure presets, config file and environment.

Precedence: command-line flag > environment variable > config file >
figure preset > defaults.
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from nonmarkov.core.measures import Variant
from nonmarkov.core.spectral import FrequencyConvention, SpectralParams
from nonmarkov.core.tcl_coefficients import TclOrder
from nonmarkov.models.errors import ConfigError

DEFAULT_CONFIG_DIR = Path.home() / ".nonmarkov"
CONFIG_FILE = "config.txt"
ENV_PREFIX = "NONMARKOV_"


def _positive_int(value: str) -> int:
    number = int(value)
    if number <= 0:
        raise ValueError("must be a positive integer")
    return number


def _order_cap(value: str) -> Optional[int]:
    """Cubature order cap; "auto" scales it with the start order."""
    if value.lower() == "auto":
        return None
    return _positive_int(value)


KEYS: dict[str, Callable[[str], Any]] = {
    "gamma0": float,
    "lambda": float,
    "delta": float,
    "omega0": float,
    "frequency_convention": FrequencyConvention,
    "order": TclOrder,
    "variant": Variant,
    "tmax": float,
    "grid": _positive_int,
    "out": Path,
    "rtol_1d": float,
    "rtol_3d": float,
    "max_order": _order_cap,
    "workers": _positive_int,
    "ode_rtol": float,
}

DEFAULTS: dict[str, Any] = {
    "gamma0": 1.0,
    "lambda": 0.2,
    "delta": 2.0,
    "omega0": 100.0,
    "frequency_convention": FrequencyConvention.full,
    "order": TclOrder.tcl4,
    "variant": Variant.full,
    "tmax": 30.0,
    "grid": 400,
    "out": Path("results"),
    "rtol_1d": 1e-6,
    "rtol_3d": 1e-4,
    "max_order": None,
    "workers": 1,
    "ode_rtol": 1e-9,
}

# Bath parameter sets (λ, Δ) and display windows; ω₀ = 100, γ₀ = 1 throughout.
PARAMETER_SETS: dict[str, dict[str, float]] = {
    "a": {"lambda": 0.2, "delta": 2.0, "tmax": 30.0},
    "b": {"lambda": 5.0, "delta": 50.0, "tmax": 1.5},
    "c": {"lambda": 400.0, "delta": 10.0, "tmax": 0.05},
}

FIGURES: dict[str, tuple[str, ...]] = {
    "1a": ("a",), "1b": ("b",), "1c": ("c",), "1d": ("a",),
    "2a": ("a",), "2b": ("b",), "2c": ("c",),
    "3a": ("a",), "3b": ("b",), "3c": ("c",),
    "4": ("a", "b", "c"),
}


def figure_presets(figure: str) -> list[dict[str, Any]]:
    """Preset values for a figure id; Fig. 4 yields one entry per parameter set."""
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}",
                          detail=f"choose from {', '.join(FIGURES)}")
    presets = []
    for key in FIGURES[figure]:
        preset = {"gamma0": 1.0, "omega0": 100.0, "grid": 400, **PARAMETER_SETS[key]}
        if figure == "4":
            # two correlation times per set
            preset["tmax"] = 2.0 / preset["lambda"]
        preset["label"] = figure if len(FIGURES[figure]) == 1 else f"{figure}{key}"
        presets.append(preset)
    return presets


def get_config_dir(override: Optional[Path] = None) -> Path:
    """Resolve config directory: CLI flag > env var > default."""
    if override:
        return override
    env_dir = os.environ.get(f"{ENV_PREFIX}CONFIG_DIR")
    if env_dir:
        return Path(env_dir)
    return DEFAULT_CONFIG_DIR


def parse_value(key: str, raw: str, source: str) -> Any:
    if key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}", detail=source)
    try:
        return KEYS[key](raw.strip())
    except ValueError as e:
        raise ConfigError(f"invalid value for {key}: {raw.strip()!r}", detail=f"{source}: {e}")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", detail=f"{source}:{number}: {line}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = parse_value(key, raw, f"{source}:{number}")
    return values


def load_config(path: Optional[Path] = None, config_dir: Optional[Path] = None) -> dict[str, Any]:
    """Values from the config file, or {} when none exists.

    An explicit ``path`` must exist; the default location is optional.
    """
    if path is not None:
        if not path.is_file():
            raise ConfigError("config file not found", detail=str(path))
        return parse_config_text(path.read_text(), str(path))
    default = get_config_dir(config_dir) / CONFIG_FILE
    if default.is_file():
        return parse_config_text(default.read_text(), str(default))
    return {}


def env_overrides() -> dict[str, Any]:
    values = {}
    for key in KEYS:
        raw = os.environ.get(f"{ENV_PREFIX}{key.upper()}")
        if raw is not None and raw.strip():
            values[key] = parse_value(key, raw, f"${ENV_PREFIX}{key.upper()}")
    return values


@dataclass(frozen=True)
class RunConfig:
    params: SpectralParams
    tmax: float
    grid: int
    order: TclOrder = TclOrder.tcl4
    variant: Variant = Variant.full
    convention: FrequencyConvention = FrequencyConvention.full
    out: Path = Path("results")
    rtol_1d: float = 1e-6
    rtol_3d: float = 1e-4
    max_order: Optional[int] = None
    workers: int = 1
    ode_rtol: float = 1e-9
    label: str = "custom"

    def __post_init__(self):
        if self.grid < 2:
            raise ConfigError("grid must have at least 2 points", detail=f"grid={self.grid}")
        if not self.tmax > 0:
            raise ConfigError("tmax must be positive", detail=f"tmax={self.tmax!r}")
        if self.workers < 1 or (self.max_order is not None and self.max_order < 2):
            raise ConfigError("workers must be >= 1 and max_order >= 2")

    @property
    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tmax, self.grid)

    def as_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "gamma0": self.params.gamma0,
            "lambda": self.params.lam,
            "delta": self.params.delta,
            "omega0": self.params.omega0,
            "frequency_convention": self.convention.value,
            "order": self.order.value,
            "variant": self.variant.value,
            "tmax": self.tmax,
            "grid": self.grid,
            "out": str(self.out),
            "rtol_1d": self.rtol_1d,
            "rtol_3d": self.rtol_3d,
            "max_order": "auto" if self.max_order is None else self.max_order,
            "workers": self.workers,
            "ode_rtol": self.ode_rtol,
        }


def _build(values: dict[str, Any], label: str) -> RunConfig:
    return RunConfig(
        params=SpectralParams(
            lam=float(values["lambda"]),
            delta=float(values["delta"]),
            omega0=float(values["omega0"]),
            gamma0=float(values["gamma0"]),
        ),
        tmax=float(values["tmax"]),
        grid=int(values["grid"]),
        order=TclOrder(values["order"]),
        variant=Variant(values["variant"]),
        convention=FrequencyConvention(values["frequency_convention"]),
        out=Path(values["out"]),
        rtol_1d=float(values["rtol_1d"]),
        rtol_3d=float(values["rtol_3d"]),
        max_order=None if values["max_order"] is None else int(values["max_order"]),
        workers=int(values["workers"]),
        ode_rtol=float(values["ode_rtol"]),
        label=label,
    )


def resolve_configs(
    figure: Optional[str] = None,
    config_path: Optional[Path] = None,
    config_dir: Optional[Path] = None,
    flags: Optional[dict[str, Any]] = None,
) -> list[RunConfig]:
    """Layer defaults, preset, file, environment and flags into run configs.

    Returns one config, or one per parameter set for multi-set figures.
    """
    file_values = load_config(config_path, config_dir)
    env_values = env_overrides()
    flag_values = {k: v for k, v in (flags or {}).items() if v is not None}
    unknown = set(flag_values) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(sorted(unknown))}")

    presets = figure_presets(figure) if figure else [{"label": "custom"}]
    configs = []
    for preset in presets:
        label = preset.pop("label")
        values = {**DEFAULTS, **preset, **file_values, **env_values, **flag_values}
        configs.append(_build(values, label))
    return configs


def resolve_config(figure: Optional[str] = None, **kwargs) -> RunConfig:
    configs = resolve_configs(figure, **kwargs)
    if len(configs) != 1:
        raise ConfigError(f"figure {figure!r} has several parameter sets",
                          detail="use the positivity command for it")
    return configs[0]


def default_config_text() -> str:
    lines = ["# nonmarkov run configuration (key = value)", ""]
    for key, value in DEFAULTS.items():
        shown = value.value if hasattr(value, "value") else value
        if value is None:
            shown = "auto"
        lines.append(f"{key} = {shown}")
    return "\n".join(lines) + "\n"


def save_default_config(config_dir: Optional[Path] = None, force: bool = False) -> Path:
    """Write a commented default config file. Returns its path."""
    d = get_config_dir(config_dir)
    path = d / CONFIG_FILE
    if path.exists() and not force:
        raise ConfigError("config file already exists", detail=str(path))
    d.mkdir(parents=True, exist_ok=True)
    path.write_text(default_config_text())
    return path
