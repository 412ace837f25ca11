import math

import numpy as np
import pytest
from scipy.integrate import quad

from nonmarkov.core.oracles import dense_kernel_oracle
from nonmarkov.core.spectral import (
    ClosedFormKernels,
    FrequencyConvention,
    KernelMode,
    LorentzianDensity,
    QuadratureKernels,
    SpectralParams,
    TabulatedKernels,
    kernels_for,
    lorentzian_density,
)
from nonmarkov.models.errors import ConfigError, InterpolationRangeError


@pytest.mark.parametrize("field", ["gamma0", "lam", "omega0"])
@pytest.mark.parametrize("value", [0.0, -1.0, math.nan, math.inf])
def test_params_reject_nonpositive(field, value):
    values = {"lam": 0.2, "delta": 2.0, "omega0": 100.0, "gamma0": 1.0, field: value}
    with pytest.raises(ConfigError):
        SpectralParams(**values)


def test_params_derived_times(params_a):
    assert params_a.omega_c == 98.0
    assert params_a.correlation_time == pytest.approx(5.0)
    assert params_a.relaxation_time == 1.0
    assert params_a.with_gamma0(2.0).gamma0 == 2.0


def test_density_peak_and_width(params_a):
    peak = lorentzian_density(params_a.omega_c, params_a)
    assert peak == pytest.approx(params_a.gamma0 / (2 * math.pi))
    half = lorentzian_density(params_a.omega_c + params_a.lam, params_a)
    assert half == pytest.approx(0.5 * peak)
    values = lorentzian_density(np.array([90.0, 98.0, 106.0]), params_a)
    assert values.shape == (3,)
    assert values[0] == pytest.approx(values[2])


def test_resonant_density_gives_markov_rate():
    params = SpectralParams(lam=0.2, delta=0.0, omega0=100.0)
    assert 2 * math.pi * lorentzian_density(params.omega0, params) == pytest.approx(1.0)


def test_closed_form_kernels(params_a):
    kernels = ClosedFormKernels(params_a)
    assert kernels.mode is KernelMode.closed_form
    assert kernels.c(0.0) == pytest.approx(kernels.amplitude)
    assert kernels.s(0.0) == 0.0
    t = np.linspace(-3, 3, 13)
    # c even, s odd
    np.testing.assert_allclose(kernels.c(t), kernels.c(-t))
    np.testing.assert_allclose(kernels.s(t), -kernels.s(-t))
    np.testing.assert_allclose(np.abs(kernels.complex(t)), kernels.amplitude * np.exp(-0.2 * np.abs(t)))


def test_closed_form_matches_dense_quadrature(params_a):
    kernels = ClosedFormKernels(params_a)
    for t in [0.0, 0.37, 1.0, 2.5, 5.0, 7.3, 10.0]:
        exact = complex(kernels.complex(t))
        reference = dense_kernel_oracle(t, params_a)
        assert abs(exact - reference) / abs(exact) < 1e-8


def test_kernels_for_conventions(params_a):
    assert isinstance(kernels_for(params_a), ClosedFormKernels)
    pointwise = kernels_for(params_a, FrequencyConvention.half)
    assert isinstance(pointwise, QuadratureKernels)
    assert isinstance(kernels_for(params_a, "half", t_max=1.0), TabulatedKernels)


def test_half_line_differs_little_from_full_line(params_a):
    # the density carries ~λ/(πω_c) of its weight below ω = 0
    half = QuadratureKernels(LorentzianDensity(params_a), omega0=params_a.omega0)
    full = ClosedFormKernels(params_a)
    t = np.array([0.0, 0.5, 1.0])
    difference = np.abs(half.complex(t) - full.complex(t))
    assert np.all(difference < 0.01 * full.amplitude)
    assert half.s(0.0) == 0.0


def test_tabulated_kernels_follow_quadrature(params_a):
    pointwise = QuadratureKernels(LorentzianDensity(params_a), omega0=params_a.omega0)
    table = pointwise.tabulated(0.5)
    t = np.array([0.013, 0.21, 0.499])
    np.testing.assert_allclose(table.complex(t), pointwise.complex(t), rtol=1e-5, atol=1e-8)
    np.testing.assert_allclose(table.complex(-t), np.conj(table.complex(t)))
    with pytest.raises(InterpolationRangeError):
        table.complex(0.6)


@pytest.mark.parametrize("lam", [0.2, 5.0, 400.0])
def test_density_normalization(lam):
    params = SpectralParams(lam=lam, delta=2.0, omega0=100.0)
    core = (params.omega_c - 50 * lam, params.omega_c + 50 * lam)
    density = LorentzianDensity(params)
    total = (quad(density, -np.inf, core[0], epsabs=0, epsrel=1e-10)[0]
             + quad(density, *core, points=[params.omega_c], epsabs=0, epsrel=1e-10, limit=200)[0]
             + quad(density, core[1], np.inf, epsabs=0, epsrel=1e-10)[0])
    assert total == pytest.approx(params.gamma0 * lam / 2, rel=1e-6)


def test_kernels_are_linear_in_coupling(params_a):
    t = np.linspace(-4.0, 4.0, 17)
    single = ClosedFormKernels(params_a).complex(t)
    double = ClosedFormKernels(params_a.with_gamma0(2.0)).complex(t)
    np.testing.assert_array_equal(double, 2 * single)
    half = QuadratureKernels(LorentzianDensity(params_a), omega0=params_a.omega0)
    half_double = QuadratureKernels(LorentzianDensity(params_a.with_gamma0(2.0)), omega0=params_a.omega0)
    samples = np.array([0.0, 0.3, 1.1])
    np.testing.assert_allclose(half_double.complex(samples), 2 * half.complex(samples), rtol=1e-9)
