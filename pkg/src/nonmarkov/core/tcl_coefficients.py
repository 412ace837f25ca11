"""Time-dependent coefficients of the TCL master equation.

Seven coefficients enter the generator: the Lamb shifts S±, the transition
rates Γ±, the pure-decoherence rate Γ₀ and the nonsecular pair α, β. Each is
a second-order part (single integrals over the kernels) plus a fourth-order
part (triple integrals over the ordered simplex 0 <= t3 <= t2 <= t1 <= t).
Γ₀ has no second-order part.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, partial
from typing import NamedTuple, Optional, Sequence

import numpy as np

from nonmarkov.core.quadrature import (
    CANCELLATION_FLOOR,
    Estimate,
    integrate_1d,
    ladder,
    simplex_slabs,
    unit_rule,
)
from nonmarkov.core.spectral import (
    CorrelationKernels,
    FrequencyConvention,
    SpectralParams,
    kernels_for,
)
from nonmarkov.models.errors import ConfigError, CubatureError, QuadratureError
from nonmarkov.output import diagnostic

DEFAULT_RTOL_1D = 1e-6
DEFAULT_RTOL_3D = 1e-4
# None lets the cubature cap follow the start order (8x start).
DEFAULT_MAX_ORDER: Optional[int] = None
MIN_CUBATURE_ORDER = 24


class Coefficient(str, Enum):
    s_plus = "S+"
    s_minus = "S-"
    gamma_minus = "G-"
    gamma_plus = "G+"
    gamma_zero = "G0"
    alpha = "alpha"
    beta = "beta"

    @property
    def field_name(self) -> str:
        return self.name


class TclOrder(str, Enum):
    tcl2 = "tcl2"
    tcl4 = "tcl4"


class Sign(str, Enum):
    plus = "+"
    minus = "-"

    @property
    def factor(self) -> float:
        return 1.0 if self is Sign.plus else -1.0


class CoefficientValue(NamedTuple):
    second_order: float = 0.0
    fourth_order: float = 0.0

    @property
    def total(self) -> float:
        return self.second_order + self.fourth_order


ZERO = CoefficientValue()
FIELDS = tuple(c.field_name for c in Coefficient)


@dataclass(frozen=True)
class CoefficientSet:
    """All seven coefficients at one time t."""

    t: float
    s_plus: CoefficientValue = ZERO
    s_minus: CoefficientValue = ZERO
    gamma_minus: CoefficientValue = ZERO
    gamma_plus: CoefficientValue = ZERO
    gamma_zero: CoefficientValue = ZERO
    alpha: CoefficientValue = ZERO
    beta: CoefficientValue = ZERO

    def __post_init__(self):
        for name in FIELDS:
            value = CoefficientValue(*getattr(self, name))
            if not all(math.isfinite(part) for part in value):
                raise ConfigError(f"coefficient {name} is not finite", detail=repr(value))
            object.__setattr__(self, name, value)
        if self.gamma_zero.second_order != 0.0:
            raise ConfigError("gamma_zero has no second-order part",
                              detail=repr(self.gamma_zero))

    @classmethod
    def from_totals(cls, t: float = 0.0, **totals: float) -> "CoefficientSet":
        """Build a set from total values; Γ₀ goes to the fourth-order slot."""
        values = {}
        for name, total in totals.items():
            if name not in FIELDS:
                raise ConfigError(f"unknown coefficient {name!r}")
            if name == "gamma_zero":
                values[name] = CoefficientValue(0.0, float(total))
            else:
                values[name] = CoefficientValue(float(total), 0.0)
        return cls(t=t, **values)

    def value(self, which: Coefficient) -> CoefficientValue:
        return getattr(self, Coefficient(which).field_name)

    def totals(self) -> dict[str, float]:
        return {name: getattr(self, name).total for name in FIELDS}

    def second_order_only(self) -> "CoefficientSet":
        return replace(self, **{
            name: CoefficientValue(getattr(self, name).second_order, 0.0)
            for name in FIELDS
        })

    def secular(self) -> "CoefficientSet":
        """The same set with the nonsecular coefficients dropped."""
        return replace(self, alpha=ZERO, beta=ZERO)

    def max_magnitude(self) -> float:
        return max(abs(v) for v in self.totals().values())


# CSV header -> (field, part)
CSV_COLUMNS: dict[str, tuple[str, str]] = {
    "S+II": ("s_plus", "second_order"),
    "S+IV": ("s_plus", "fourth_order"),
    "S-II": ("s_minus", "second_order"),
    "S-IV": ("s_minus", "fourth_order"),
    "G-II": ("gamma_minus", "second_order"),
    "G-IV": ("gamma_minus", "fourth_order"),
    "G+II": ("gamma_plus", "second_order"),
    "G+IV": ("gamma_plus", "fourth_order"),
    "G0": ("gamma_zero", "fourth_order"),
    "alphaII": ("alpha", "second_order"),
    "alphaIV": ("alpha", "fourth_order"),
    "betaII": ("beta", "second_order"),
    "betaIV": ("beta", "fourth_order"),
}
TRACE_HEADER = ["t", *CSV_COLUMNS]


def validate_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError("time grid must be a non-empty 1-D sequence")
    if grid[0] != 0.0:
        raise ConfigError("time grid must start at t = 0", detail=f"t0={grid[0]!r}")
    if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
        raise ConfigError("time grid must be finite and strictly increasing")
    return grid


@dataclass(frozen=True, eq=False)
class CoefficientTrace:
    """Coefficient sets on a time grid, with per-point cubature metadata.

    ``cubature_order`` is the per-axis order of the accepted fourth-order
    estimate (0 for TCL2 or t = 0), ``cubature_error`` the largest error
    bound over the seven selectors and ``converged`` whether every selector
    met its tolerance.
    """

    sets: tuple[CoefficientSet, ...]
    params: Optional[SpectralParams] = None
    order: TclOrder = TclOrder.tcl4
    cubature_order: Optional[np.ndarray] = None
    cubature_error: Optional[np.ndarray] = None
    converged: Optional[np.ndarray] = None
    grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        object.__setattr__(self, "grid", validate_grid([s.t for s in self.sets]))
        n = len(self.sets)
        if self.cubature_order is None:
            object.__setattr__(self, "cubature_order", np.zeros(n, dtype=int))
        if self.cubature_error is None:
            object.__setattr__(self, "cubature_error", np.zeros(n))
        if self.converged is None:
            object.__setattr__(self, "converged", np.ones(n, dtype=bool))

    def __len__(self) -> int:
        return len(self.sets)

    @classmethod
    def from_totals(cls, grid, **columns) -> "CoefficientTrace":
        """Synthetic trace from total-value columns (arrays or scalars)."""
        grid = validate_grid(grid)
        arrays = {k: np.broadcast_to(np.asarray(v, dtype=float), grid.shape)
                  for k, v in columns.items()}
        sets = [
            CoefficientSet.from_totals(float(t), **{k: a[i] for k, a in arrays.items()})
            for i, t in enumerate(grid)
        ]
        return cls(sets=sets)

    def column(self, which: Coefficient, part: str = "total") -> np.ndarray:
        name = Coefficient(which).field_name
        return np.array([getattr(getattr(s, name), part) for s in self.sets])

    def totals(self) -> dict[str, np.ndarray]:
        return {name: self.column(Coefficient[name]) for name in FIELDS}

    @property
    def flagged(self) -> list[float]:
        """Times whose fourth-order cubature did not converge."""
        return [float(t) for t, ok in zip(self.grid, self.converged) if not ok]

    def max_magnitude(self) -> float:
        return max((s.max_magnitude() for s in self.sets), default=0.0)

    def map_sets(self, func) -> "CoefficientTrace":
        return replace(self, sets=tuple(func(s) for s in self.sets))

    def secular(self) -> "CoefficientTrace":
        return self.map_sets(CoefficientSet.secular)

    def second_order_only(self) -> "CoefficientTrace":
        return self.map_sets(CoefficientSet.second_order_only)

    def to_rows(self) -> list[dict[str, float]]:
        rows = []
        for s in self.sets:
            row = {"t": s.t}
            for header, (name, part) in CSV_COLUMNS.items():
                row[header] = getattr(getattr(s, name), part)
            rows.append(row)
        return rows

    @classmethod
    def from_rows(cls, rows: Sequence[dict], params: Optional[SpectralParams] = None,
                  order: TclOrder = TclOrder.tcl4) -> "CoefficientTrace":
        sets = []
        for row in rows:
            parts: dict[str, list[float]] = {name: [0.0, 0.0] for name in FIELDS}
            for header, (name, part) in CSV_COLUMNS.items():
                parts[name][0 if part == "second_order" else 1] = float(row[header])
            sets.append(CoefficientSet(
                t=float(row["t"]),
                **{name: CoefficientValue(*p) for name, p in parts.items()},
            ))
        return cls(sets=sets, params=params, order=order)


# --- second order -----------------------------------------------------------

def _start_panels(t: float, kernels: CorrelationKernels) -> int:
    return max(1, math.ceil(t * (kernels.omega0 + kernels.bandwidth) / (2 * math.pi)))


def _checked(estimate: Estimate, what: str) -> float:
    if not estimate.converged:
        raise QuadratureError(f"{what} did not converge", estimate.value, estimate.error)
    return estimate.value


def lamb_shift_2(t: float, kernels: CorrelationKernels, sign: Sign,
                 rtol: float = DEFAULT_RTOL_1D) -> float:
    """S±ᴵᴵ(t) = ±∫₀ᵗ dτ [sin(ω₀τ) c(τ) ∓ cos(ω₀τ) s(τ)]."""
    if t == 0:
        return 0.0
    sign = Sign(sign)
    w = kernels.omega0

    def integrand(tau):
        k = kernels.complex(tau)
        return np.sin(w * tau) * k.real - sign.factor * np.cos(w * tau) * k.imag

    estimate = integrate_1d(integrand, 0.0, t, rtol=rtol,
                            panels=_start_panels(t, kernels))
    return sign.factor * _checked(estimate, f"S{sign.value} second order")


def gamma_2(t: float, kernels: CorrelationKernels, sign: Sign,
            rtol: float = DEFAULT_RTOL_1D) -> float:
    """Γ±ᴵᴵ(t) = 2∫₀ᵗ dτ [cos(ω₀τ) c(τ) ∓ sin(ω₀τ) s(τ)]."""
    if t == 0:
        return 0.0
    sign = Sign(sign)
    w = kernels.omega0

    def integrand(tau):
        k = kernels.complex(tau)
        return np.cos(w * tau) * k.real - sign.factor * np.sin(w * tau) * k.imag

    estimate = integrate_1d(integrand, 0.0, t, rtol=rtol,
                            panels=_start_panels(t, kernels))
    return 2.0 * _checked(estimate, f"G{sign.value} second order")


def nonsecular_2(t: float, kernels: CorrelationKernels,
                 rtol: float = DEFAULT_RTOL_1D) -> tuple[float, float]:
    """(αᴵᴵ, βᴵᴵ) = 2∫₀ᵗ dτ c(t−τ) (cos, sin)[ω₀(t+τ)]."""
    if t == 0:
        return 0.0, 0.0
    w = kernels.omega0
    panels = _start_panels(2 * t, kernels)
    values = []
    for trig in (np.cos, np.sin):
        estimate = integrate_1d(
            lambda tau, trig=trig: kernels.c(t - tau) * trig(w * (t + tau)),
            0.0, t, rtol=rtol, panels=panels,
        )
        values.append(2.0 * _checked(estimate, "nonsecular second order"))
    return values[0], values[1]


# --- fourth order -----------------------------------------------------------

class SimplexFactors:
    """Kernel and phase factors on one slab of simplex nodes, built on demand."""

    def __init__(self, kernels: CorrelationKernels, t: float, t1, t2, t3):
        self.kernels = kernels
        self.w = kernels.omega0
        self.t, self.t1, self.t2, self.t3 = t, t1, t2, t3

    def _k(self, arg):
        return self.kernels.complex(arg)

    def _phase(self, arg):
        return np.exp(1j * self.w * arg)

    @cached_property
    def k02(self):
        return self._k(self.t - self.t2)

    @cached_property
    def k03(self):
        return self._k(self.t - self.t3)

    @cached_property
    def k12(self):
        return self._k(self.t1 - self.t2)

    @cached_property
    def k13(self):
        return self._k(self.t1 - self.t3)

    @cached_property
    def k_t2(self):
        return self._k(self.t + self.t2)

    @cached_property
    def k_t3(self):
        return self._k(self.t + self.t3)

    @cached_property
    def e01(self):
        return self._phase(self.t - self.t1)

    @cached_property
    def e02(self):
        return self._phase(self.t - self.t2)

    @cached_property
    def e03(self):
        return self._phase(self.t - self.t3)

    @cached_property
    def e12(self):
        return self._phase(self.t1 - self.t2)

    @cached_property
    def e13(self):
        return self._phase(self.t1 - self.t3)

    @cached_property
    def e23(self):
        return self._phase(self.t2 - self.t3)

    @cached_property
    def e_t1(self):
        return self._phase(self.t + self.t1)

    @cached_property
    def e_t2(self):
        return self._phase(self.t + self.t2)

    @cached_property
    def e_t3(self):
        return self._phase(self.t + self.t3)


def _s_iv(f: SimplexFactors, sign: Sign):
    C02, S02 = f.k02.real, f.k02.imag
    C03, S03 = f.k03.real, f.k03.imag
    C12, S12 = f.k12.real, f.k12.imag
    C13, S13 = f.k13.real, f.k13.imag
    # S+ carries -3C cos where S- carries +C cos
    m = -3.0 if sign is Sign.plus else 1.0
    return 2.0 * (
        (S02 * f.e03.imag + m * C02 * f.e03.real) * C13 * f.e12.imag
        + (C02 * f.e03.imag - S02 * f.e03.real) * S13 * f.e12.imag
        + (S03 * f.e02.imag + m * C03 * f.e02.real) * C12 * f.e13.imag
        + (C03 * f.e02.imag - S03 * f.e02.real) * S12 * f.e13.imag
        + (-S03 * f.e01.imag - C03 * f.e01.real) * C12 * f.e23.imag
        + (-C03 * f.e01.imag + S03 * f.e01.real) * S12 * f.e23.imag
    )


def _gamma_iv(f: SimplexFactors, sign: Sign):
    p = sign.factor
    C02 = f.k02.real
    C03, S03 = f.k03.real, f.k03.imag
    C12, S12 = f.k12.real, f.k12.imag
    C13, S13 = f.k13.real, f.k13.imag
    return -8.0 * (
        (C13 * f.e03.imag + p * S13 * f.e03.real) * C02 * f.e12.imag
        + (C12 * f.e02.imag + p * S12 * f.e02.real) * C03 * f.e13.imag
        - p * (S03 * C12 + C03 * S12) * f.e23.imag * f.e01.real
    )


def _gamma_zero(f: SimplexFactors):
    C02, S02 = f.k02.real, f.k02.imag
    C03, S03 = f.k03.real, f.k03.imag
    C12, S12 = f.k12.real, f.k12.imag
    C13, S13 = f.k13.real, f.k13.imag
    return 16.0 * (
        (C02 * C13 + S02 * S13) * f.e03.imag * f.e12.imag
        + (C03 * C12 + S03 * S12) * f.e02.imag * f.e13.imag
        + (C03 * C12 - S03 * S12) * f.e01.imag * f.e23.imag
    )


def _alpha_iv(f: SimplexFactors):
    C03, S03 = f.k03.real, f.k03.imag
    C12, S12 = f.k12.real, f.k12.imag
    S13 = f.k13.imag
    return -8.0 * (
        f.k_t2.imag * S13 * f.e_t3.imag * f.e12.imag
        + f.k_t3.imag * S12 * f.e_t2.imag * f.e13.imag
        + (C03 * C12 - S03 * S12) * f.e_t1.imag * f.e23.imag
    )


def _beta_iv(f: SimplexFactors):
    S02 = f.k02.imag
    C03, S03 = f.k03.real, f.k03.imag
    C12, S12 = f.k12.real, f.k12.imag
    S13 = f.k13.imag
    return 8.0 * (
        S02 * S13 * f.e_t3.real * f.e12.imag
        + S03 * S12 * f.e_t2.real * f.e13.imag
        + (C03 * C12 - S03 * S12) * f.e_t1.real * f.e23.imag
    )


INTEGRANDS = {
    Coefficient.s_plus: partial(_s_iv, sign=Sign.plus),
    Coefficient.s_minus: partial(_s_iv, sign=Sign.minus),
    Coefficient.gamma_minus: partial(_gamma_iv, sign=Sign.minus),
    Coefficient.gamma_plus: partial(_gamma_iv, sign=Sign.plus),
    Coefficient.gamma_zero: _gamma_zero,
    Coefficient.alpha: _alpha_iv,
    Coefficient.beta: _beta_iv,
}


def simplex_sums(
    t: float,
    kernels: CorrelationKernels,
    selectors: Sequence[Coefficient],
    nodes: np.ndarray,
    weights: np.ndarray,
    chunk: Optional[int] = None,
) -> tuple[dict[Coefficient, float], dict[Coefficient, float]]:
    """One cubature pass: (∫f, ∫|f|) per selector for the given 1-D rule."""
    sums = dict.fromkeys(selectors, 0.0)
    scales = dict.fromkeys(selectors, 0.0)
    for t1, t2, t3, weight in simplex_slabs(t, nodes, weights, chunk):
        factors = SimplexFactors(kernels, t, t1, t2, t3)
        for which in selectors:
            values = INTEGRANDS[which](factors)
            sums[which] += float(np.sum(weight * values))
            scales[which] += float(np.sum(weight * np.abs(values)))
    return sums, scales


def start_order(t: float, omega0: float) -> int:
    return max(MIN_CUBATURE_ORDER, math.ceil(omega0 * t / 2))


def fourth_order_all(
    t: float,
    kernels: CorrelationKernels,
    selectors: Sequence[Coefficient] = tuple(Coefficient),
    rtol: float = DEFAULT_RTOL_3D,
    max_order: Optional[int] = DEFAULT_MAX_ORDER,
) -> dict[Coefficient, Estimate]:
    """Fourth-order parts of several coefficients from shared cubature passes.

    The per-axis Gauss-Legendre order doubles until every selector's estimate
    changes by less than ``rtol`` between passes. Selectors that never settle
    come back with ``converged=False`` and the last difference as error.
    """
    selectors = [Coefficient(s) for s in selectors]
    if t == 0:
        return {s: Estimate(0.0, 0.0, 0, True) for s in selectors}
    results: dict[Coefficient, Estimate] = {}
    pending = list(selectors)
    previous: dict[Coefficient, float] = {}
    latest: dict[Coefficient, Estimate] = {}
    for order in ladder(start_order(t, kernels.omega0), max_order):
        nodes, weights = unit_rule(order)
        sums, scales = simplex_sums(t, kernels, pending, nodes, weights)
        for which in list(pending):
            if which not in previous:
                latest[which] = Estimate(sums[which], math.inf, order, False)
                continue
            error = abs(sums[which] - previous[which])
            tol = max(rtol * abs(sums[which]), CANCELLATION_FLOOR * scales[which])
            latest[which] = Estimate(sums[which], error, order, error <= tol)
            if error <= tol:
                results[which] = latest[which]
                pending.remove(which)
        if not pending:
            break
        previous = sums
    results.update({which: latest[which] for which in pending})
    return {s: results[s] for s in selectors}


def fourth_order(
    t: float,
    kernels: CorrelationKernels,
    which: Coefficient,
    rtol: float = DEFAULT_RTOL_3D,
    max_order: Optional[int] = DEFAULT_MAX_ORDER,
    strict: bool = False,
) -> Estimate:
    """Fourth-order part of one coefficient.

    Returns the best estimate with its error bound; ``converged`` is False
    when the maximum order was reached first. With ``strict`` that case
    raises CubatureError instead.
    """
    estimate = fourth_order_all(t, kernels, (which,), rtol, max_order)[Coefficient(which)]
    if strict and not estimate.converged:
        raise CubatureError(
            f"fourth-order {Coefficient(which).value} did not converge at t={t!r}",
            estimate.value, estimate.error, estimate.order,
        )
    return estimate


# --- trace ------------------------------------------------------------------

class PointResult(NamedTuple):
    coefficients: CoefficientSet
    order: int
    error: float
    converged: bool


def evaluate_point(
    t: float,
    kernels: CorrelationKernels,
    order: TclOrder = TclOrder.tcl4,
    rtol_1d: float = DEFAULT_RTOL_1D,
    rtol_3d: float = DEFAULT_RTOL_3D,
    max_order: Optional[int] = DEFAULT_MAX_ORDER,
) -> PointResult:
    """All seven coefficients at one time. Pure; safe to run in a worker process."""
    t = float(t)
    second = {
        Coefficient.s_plus: lamb_shift_2(t, kernels, Sign.plus, rtol_1d),
        Coefficient.s_minus: lamb_shift_2(t, kernels, Sign.minus, rtol_1d),
        Coefficient.gamma_minus: gamma_2(t, kernels, Sign.minus, rtol_1d),
        Coefficient.gamma_plus: gamma_2(t, kernels, Sign.plus, rtol_1d),
        Coefficient.gamma_zero: 0.0,
    }
    second[Coefficient.alpha], second[Coefficient.beta] = nonsecular_2(t, kernels, rtol_1d)

    if TclOrder(order) is TclOrder.tcl4 and t > 0:
        fourth = fourth_order_all(t, kernels, rtol=rtol_3d, max_order=max_order)
    else:
        fourth = {c: Estimate(0.0, 0.0, 0, True) for c in Coefficient}

    coefficients = CoefficientSet(t=t, **{
        c.field_name: CoefficientValue(second[c], fourth[c].value) for c in Coefficient
    })
    return PointResult(
        coefficients,
        max(e.order for e in fourth.values()),
        max(e.error for e in fourth.values()),
        all(e.converged for e in fourth.values()),
    )


def evaluate_trace(
    params: SpectralParams,
    grid,
    order: TclOrder = TclOrder.tcl4,
    convention: FrequencyConvention = FrequencyConvention.full,
    rtol_1d: float = DEFAULT_RTOL_1D,
    rtol_3d: float = DEFAULT_RTOL_3D,
    max_order: Optional[int] = DEFAULT_MAX_ORDER,
    workers: int = 1,
    verbose: bool = False,
) -> CoefficientTrace:
    """Coefficient trace of the Lorentzian bath on ``grid``.

    Grid points are independent. With ``workers > 1`` they are spread over a
    process pool; results come back in grid order and are identical to a
    serial run.
    """
    grid = validate_grid(grid)
    order = TclOrder(order)
    # α^IV samples the kernels at t + t2, up to twice the last grid time
    kernels = kernels_for(params, convention, t_max=2.0 * float(grid[-1]) or 1.0)
    task = partial(evaluate_point, kernels=kernels, order=order, rtol_1d=rtol_1d,
                   rtol_3d=rtol_3d, max_order=max_order)

    diagnostic(f"{order.value} on {grid.size} points, t_max={grid[-1]!r}, workers={workers}",
               verbose, tag="tcl")

    if workers > 1 and grid.size > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, grid.tolist(), chunksize=max(1, grid.size // (4 * workers))))
    else:
        results = [task(t) for t in grid.tolist()]

    if verbose:
        for t, result in zip(grid, results):
            if not result.converged:
                diagnostic(f"t={t!r}: cubature stopped at order {result.order}, "
                           f"error {result.error:.3e}", verbose, tag="tcl")

    return CoefficientTrace(
        sets=tuple(r.coefficients for r in results),
        params=params,
        order=order,
        cubature_order=np.array([r.order for r in results], dtype=int),
        cubature_error=np.array([r.error for r in results], dtype=float),
        converged=np.array([r.converged for r in results], dtype=bool),
    )
