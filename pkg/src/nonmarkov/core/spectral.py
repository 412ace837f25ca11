"""Spectral densities and the bath correlation kernels c(t), s(t).

Rates and frequencies are measured in units of the coupling rate gamma0 and
times in units of 1/gamma0. The kernels are

    c(t) = ∫ dω J(ω) cos(ωt),    s(t) = ∫ dω J(ω) sin(ωt).

Under the full-line convention the Lorentzian kernels are exact closed forms.
The half-line convention integrates over ω >= 0 numerically and tabulates the
result on a dense time grid so the cubature can evaluate it cheaply.
"""

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

from nonmarkov.models.errors import ConfigError, InterpolationRangeError, QuadratureError


class FrequencyConvention(str, Enum):
    full = "full"
    half = "half"


class KernelMode(str, Enum):
    closed_form = "closed-form"
    quadrature = "quadrature"


@dataclass(frozen=True)
class SpectralParams:
    """Lorentzian bath parameters.

    Args:
        lam: Half-width of the Lorentzian (inverse correlation time).
        delta: Atom-cavity detuning, delta = omega0 - omega_c.
        omega0: Atomic transition frequency.
        gamma0: Coupling rate; 1 by convention.
    """

    lam: float
    delta: float
    omega0: float
    gamma0: float = 1.0

    def __post_init__(self):
        for name in ("gamma0", "lam", "omega0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(
                    f"{name} must be a positive finite number",
                    detail=f"{name}={value!r}",
                )
        if not math.isfinite(self.delta):
            raise ConfigError("delta must be finite", detail=f"delta={self.delta!r}")

    @property
    def omega_c(self) -> float:
        return self.omega0 - self.delta

    @property
    def correlation_time(self) -> float:
        """tau_R = 1/lambda."""
        return 1.0 / self.lam

    @property
    def relaxation_time(self) -> float:
        """tau_S = 1/gamma0."""
        return 1.0 / self.gamma0

    def with_gamma0(self, gamma0: float) -> "SpectralParams":
        return replace(self, gamma0=gamma0)


def lorentzian_density(omega, params: SpectralParams):
    """J(ω) = γ₀λ² / (2π[(ω − ω_c)² + λ²]); scalar in, scalar out."""
    detuning = np.asarray(omega, dtype=float) - params.omega_c
    value = params.gamma0 * params.lam**2 / (
        2.0 * np.pi * (detuning**2 + params.lam**2)
    )
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class LorentzianDensity:
    """J(ω) as a hashable callable, so densities can key caches."""

    params: SpectralParams

    def __call__(self, omega):
        return lorentzian_density(omega, self.params)

    @property
    def center(self) -> float:
        return self.params.omega_c

    @property
    def width(self) -> float:
        return self.params.lam


class CorrelationKernels:
    """The kernel pair (c, s) plus the system frequency it is paired with.

    Subclasses implement ``complex(t)`` returning c(t) + i s(t); ``c`` and
    ``s`` are its real and imaginary parts. Instances are immutable and every
    evaluation is pure.
    """

    mode: KernelMode
    omega0: float

    def complex(self, t) -> np.ndarray:
        raise NotImplementedError

    def c(self, t) -> np.ndarray:
        return self.complex(t).real

    def s(self, t) -> np.ndarray:
        return self.complex(t).imag

    @property
    def bandwidth(self) -> float:
        """Largest frequency carried by the kernels with appreciable weight."""
        raise NotImplementedError


@dataclass(frozen=True)
class ClosedFormKernels(CorrelationKernels):
    """c(t) + i s(t) = (γ₀λ/2) exp(−λ|t| + iω_c t) for the full-line Lorentzian."""

    params: SpectralParams
    mode = KernelMode.closed_form

    @property
    def omega0(self) -> float:
        return self.params.omega0

    @property
    def bandwidth(self) -> float:
        return abs(self.params.omega_c) + self.params.lam

    @property
    def amplitude(self) -> float:
        """c(0) = γ₀λ/2, the envelope prefactor."""
        return 0.5 * self.params.gamma0 * self.params.lam

    def complex(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        p = self.params
        return 0.5 * p.gamma0 * p.lam * np.exp(-p.lam * np.abs(t) + 1j * p.omega_c * t)


def quad_checked(func, a, b, **kwargs) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, error = quad(func, a, b, **kwargs)[:2]
    if any(issubclass(w.category, IntegrationWarning) for w in caught):
        raise QuadratureError("frequency quadrature did not converge", value, error)
    return value


@lru_cache(maxsize=65536)
def _half_line_pair(density, t: float, lower: float, split: float, epsrel: float):
    """(c, s) at t >= 0 from adaptive quadrature over [lower, ∞)."""
    if t == 0.0:
        core = quad_checked(density, lower, split, epsrel=epsrel, limit=500)
        tail = quad_checked(density, split, np.inf, epsrel=epsrel, limit=500)
        return core + tail, 0.0
    pair = []
    for weight in ("cos", "sin"):
        core = quad_checked(
            density, lower, split, weight=weight, wvar=t, epsrel=epsrel, limit=2000
        )
        tail = quad_checked(density, split, np.inf, weight=weight, wvar=t, limlst=200)
        pair.append(core + tail)
    return pair[0], pair[1]


@dataclass(frozen=True)
class QuadratureKernels(CorrelationKernels):
    """Kernels of an arbitrary density J by adaptive quadrature over [lower, ∞).

    ``density`` must be hashable (``LorentzianDensity`` is) and expose
    ``center`` and ``width`` so the frequency range can be split around its
    peak. Pointwise evaluation is exact but slow; ``tabulated`` builds a
    spline over a dense time grid for the cubature.
    """

    density: Callable
    omega0: float
    lower: float = 0.0
    epsrel: float = 1e-10
    mode = KernelMode.quadrature

    @property
    def _split(self) -> float:
        return max(self.lower, self.density.center) + 50.0 * self.density.width

    @property
    def bandwidth(self) -> float:
        return abs(self.density.center) + self.density.width

    def complex(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape, dtype=complex)
        for index, value in np.ndenumerate(t):
            c, s = _half_line_pair(
                self.density, abs(float(value)), self.lower, self._split, self.epsrel
            )
            out[index] = complex(c, s if value >= 0 else -s)
        return out

    def tabulated(self, t_max: float, nodes_per_period: int = 32) -> "TabulatedKernels":
        step = 2.0 * np.pi / (nodes_per_period * (self.bandwidth + self.density.width))
        count = max(8, int(math.ceil(t_max / step)) + 1)
        times = np.linspace(0.0, t_max, count)
        spline = CubicSpline(times, self.complex(times))
        return TabulatedKernels(spline=spline, t_max=t_max, omega0=self.omega0,
                                max_frequency=self.bandwidth)


@dataclass(frozen=True)
class TabulatedKernels(CorrelationKernels):
    """Quadrature kernels interpolated from a dense table on [0, t_max]."""

    spline: CubicSpline
    t_max: float
    omega0: float
    max_frequency: float
    mode = KernelMode.quadrature

    @property
    def bandwidth(self) -> float:
        return self.max_frequency

    def complex(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        magnitude = np.abs(t)
        if magnitude.size and magnitude.max() > self.t_max * (1 + 1e-12):
            raise InterpolationRangeError(
                "kernel requested beyond its tabulated range",
                detail=f"t={magnitude.max()!r} t_max={self.t_max!r}",
            )
        values = self.spline(magnitude)
        values = np.where(t < 0, np.conj(values), values)
        # s(0) = 0 exactly
        return np.where(t == 0, values.real + 0j, values)


def kernels_for(
    params: SpectralParams,
    convention: FrequencyConvention = FrequencyConvention.full,
    t_max: Optional[float] = None,
) -> CorrelationKernels:
    """Build the kernels of the Lorentzian bath.

    The full-line convention gives exact closed forms. The half-line
    convention integrates over ω >= 0; with ``t_max`` the result is tabulated
    on [0, t_max], otherwise every evaluation runs the quadrature.
    """
    if FrequencyConvention(convention) is FrequencyConvention.full:
        return ClosedFormKernels(params)
    kernels = QuadratureKernels(LorentzianDensity(params), omega0=params.omega0)
    if t_max is None:
        return kernels
    return kernels.tabulated(t_max)
