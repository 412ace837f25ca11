import numpy as np
import pytest

from nonmarkov.config import KEYS
from nonmarkov.core.spectral import ClosedFormKernels, SpectralParams
from nonmarkov.core.tcl_coefficients import CoefficientSet, CoefficientTrace


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep tests away from the user's config and NONMARKOV_* variables."""
    for key in KEYS:
        monkeypatch.delenv(f"NONMARKOV_{key.upper()}", raising=False)
    config_dir = tmp_path / "config-home"
    monkeypatch.setenv("NONMARKOV_CONFIG_DIR", str(config_dir))
    return config_dir


@pytest.fixture
def params_a():
    return SpectralParams(lam=0.2, delta=2.0, omega0=100.0, gamma0=1.0)


@pytest.fixture
def params_b():
    return SpectralParams(lam=5.0, delta=50.0, omega0=100.0, gamma0=1.0)


@pytest.fixture
def params_c():
    return SpectralParams(lam=400.0, delta=10.0, omega0=100.0, gamma0=1.0)


@pytest.fixture
def kernels_a(params_a):
    return ClosedFormKernels(params_a)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_set(rng, t=0.0, nonsecular=True):
    values = rng.normal(size=7)
    return CoefficientSet.from_totals(
        t,
        s_plus=values[0],
        s_minus=values[1],
        gamma_minus=values[2],
        gamma_plus=values[3],
        gamma_zero=values[4],
        alpha=values[5] if nonsecular else 0.0,
        beta=values[6] if nonsecular else 0.0,
    )


def laplace_window(z, t):
    """∫₀ᵗ e^{−zτ} dτ for complex z."""
    return (1 - np.exp(-z * t)) / z


def tcl2_closed_form(params, t):
    """Second-order coefficients of the full-line Lorentzian in closed form."""
    g0, lam = params.gamma0, params.lam
    lower = laplace_window(lam + 1j * params.delta, t)
    upper = laplace_window(lam - 1j * (params.omega_c + params.omega0), t)
    return {
        "gamma_minus": g0 * lam * np.real(lower),
        "gamma_plus": g0 * lam * np.real(upper),
        "s_plus": -0.5 * g0 * lam * np.imag(lower),
        "s_minus": -0.5 * g0 * lam * np.imag(upper),
    }


@pytest.fixture
def synthetic_secular_trace(params_a):
    """Smooth coefficient columns on the Fig. 1(a) window, α = β = 0."""
    grid = np.linspace(0.0, 30.0, 400)
    columns = tcl2_closed_form(params_a, grid)
    columns["gamma_zero"] = 0.05 * np.sin(0.3 * grid) ** 2
    return CoefficientTrace.from_totals(grid, **columns)
