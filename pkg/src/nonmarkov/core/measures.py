"""Non-Markovianity measures: RHP indivisibility g(t) and BLP backflow σ(t).

Each measure comes in three variants. ``full`` uses the complete generator
(nonsecular α, β included), ``secular`` drops α and β, and ``rwa`` is the
exactly solvable rotating-wave model. Intervals where g > tol are
indivisible dynamical intervals (IDIs); intervals where σ > tol are
information-backflow intervals (IBIs).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from nonmarkov.core.dynamics import (
    BlochVector,
    SecularIntegrals,
    bloch_from_density,
    propagate,
    rwa_F_from_accum,
    rwa_decay_rate,
    rwa_gamma,
    rwa_trace,
    secular_integrals,
)
from nonmarkov.core.spectral import SpectralParams
from nonmarkov.core.tcl_coefficients import CoefficientSet, CoefficientTrace
from nonmarkov.models.errors import (
    ConfigError,
    DegeneratePairError,
    NumericalError,
    StateError,
)

# Interval threshold relative to the largest coefficient magnitude.
RELATIVE_TOL = 1e-9
G_FLOOR = -1e-12


class Variant(str, Enum):
    full = "full"
    secular = "secular"
    rwa = "rwa"


@dataclass(frozen=True)
class StatePair:
    """Two initial states, compared through their Bloch difference."""

    first: BlochVector
    second: BlochVector

    @property
    def delta(self) -> BlochVector:
        return self.first - self.second

    @property
    def a(self) -> float:
        """Difference of excited-state populations, Δbz/2."""
        return 0.5 * self.delta.bz

    @property
    def b_coh(self) -> float:
        """Modulus of the difference of coherences, |Δρ_eg|."""
        d = self.delta
        return 0.5 * math.hypot(d.bx, d.by)

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self.delta.as_array())


CANONICAL_PAIR = StatePair(BlochVector.EXCITED, BlochVector.GROUND)

StateLike = Union[BlochVector, np.ndarray, Sequence[float]]


def _as_bloch(state: StateLike) -> BlochVector:
    if isinstance(state, BlochVector):
        return state
    array = np.asarray(state)
    if array.shape == (2, 2):
        return bloch_from_density(array)
    if array.shape == (3,):
        return BlochVector.from_array(array.real)
    raise StateError("state must be a Bloch vector or a 2x2 density matrix",
                     detail=f"shape={array.shape}")


def pair_from_states(first: StateLike, second: StateLike) -> StatePair:
    """Build a pair from Bloch vectors, 3-sequences or density matrices."""
    pair = StatePair(_as_bloch(first), _as_bloch(second))
    for state in (pair.first, pair.second):
        if not state.is_physical():
            raise StateError("state lies outside the Bloch ball",
                             detail=repr(state))
    return pair


def _require_pair(pair: StatePair) -> None:
    if pair.is_degenerate:
        raise DegeneratePairError("identical states: trace distance is identically zero")


# --- point measures ---------------------------------------------------------

def rhp_g_full(coeffs: CoefficientSet) -> float:
    """g from Γ±, Γ₀, α, β; the Lamb shifts do not enter."""
    c = coeffs.totals()
    gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
    root = math.sqrt((gm - gp) ** 2 + 4 * (c["alpha"] ** 2 + c["beta"] ** 2))
    g = 0.25 * (abs(gm + gp + root) + abs(gm + gp - root)) \
        + 0.25 * (abs(g0) - g0 - 2 * gm - 2 * gp)
    return _nonnegative(g)


def rhp_g_secular(coeffs: CoefficientSet) -> float:
    c = coeffs.totals()
    gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
    return _nonnegative(0.25 * (2 * abs(gm) + 2 * abs(gp) + abs(g0) - 2 * gm - 2 * gp - g0))


def rhp_g_rwa(t: float, params: SpectralParams) -> float:
    return max(0.0, -rwa_gamma(t, params))


def _nonnegative(g: float) -> float:
    if g < G_FLOOR:
        raise NumericalError("negative indivisibility measure", detail=f"g={g!r}")
    return max(g, 0.0)


def trace_distance(s1: BlochVector, s2: BlochVector) -> float:
    return 0.5 * (s1 - s2).norm()


def blp_sigma_full(delta: Union[BlochVector, Sequence[float]], coeffs: CoefficientSet) -> float:
    """dD/dt from the Bloch difference of the propagated states at time t."""
    dx, dy, dz = (delta.bx, delta.by, delta.bz) if isinstance(delta, BlochVector) else delta
    norm = math.sqrt(dx * dx + dy * dy + dz * dz)
    if norm == 0:
        raise DegeneratePairError("zero Bloch difference: σ is undefined")
    c = coeffs.totals()
    gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
    alpha, beta = c["alpha"], c["beta"]
    bracket = (
        (gm + gp + g0 - 2 * alpha) * dx * dx
        + (gm + gp + g0 + 2 * alpha) * dy * dy
        + 4 * beta * dx * dy
        + 2 * (gm + gp) * dz * dz
    )
    return -0.25 * bracket / norm


def blp_sigma_secular(pair: StatePair, integrals: SecularIntegrals,
                      coeffs: CoefficientSet) -> float:
    """σ of the secular model from the initial differences and Θ, Λ."""
    _require_pair(pair)
    d = pair.delta
    transverse = d.bx**2 + d.by**2
    chi = math.exp(-2 * integrals.theta)
    decay = math.exp(-2 * integrals.lam)
    c = coeffs.totals()
    gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
    norm = math.sqrt(chi * transverse + decay * d.bz**2)
    bracket = chi * (gm + gp + g0) * transverse + 2 * decay * (gm + gp) * d.bz**2
    return -0.25 * bracket / norm


def blp_sigma_rwa(t: float, params: SpectralParams, pair: StatePair) -> float:
    _require_pair(pair)
    gamma, gamma_accum = rwa_decay_rate(t, params)
    return -gamma * rwa_F_from_accum(gamma_accum, pair.a, pair.b_coh).value


# --- conditions and intervals -----------------------------------------------

class ConditionFlags(NamedTuple):
    backflow_sum3: bool
    backflow_sum2: bool
    indivisible_any: bool

    @property
    def implication(self) -> bool:
        """Backflow (either sum condition) implies indivisibility."""
        return self.indivisible_any or not (self.backflow_sum3 or self.backflow_sum2)


def check_conditions(coeffs: CoefficientSet) -> ConditionFlags:
    c = coeffs.totals()
    gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
    return ConditionFlags(
        backflow_sum3=gm + gp + g0 < 0,
        backflow_sum2=gm + gp < 0,
        indivisible_any=gm < 0 or gp < 0 or g0 < 0,
    )


Interval = tuple[float, float]


def _crossing(t0, t1, v0, v1, level) -> float:
    return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))


def detect_intervals(times, values, tol: float = 0.0) -> list[Interval]:
    """Maximal intervals where values > tol, ends located by linear interpolation."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if tol < 0:
        raise ConfigError("interval threshold must be non-negative", detail=f"tol={tol!r}")
    above = values > tol
    intervals: list[Interval] = []
    start: Optional[float] = float(times[0]) if above.size and above[0] else None
    for i in range(1, len(times)):
        if above[i] and not above[i - 1]:
            start = _crossing(times[i - 1], times[i], values[i - 1], values[i], tol)
        elif above[i - 1] and not above[i]:
            intervals.append((start, _crossing(times[i - 1], times[i],
                                               values[i - 1], values[i], tol)))
            start = None
    if start is not None:
        intervals.append((start, float(times[-1])))
    return intervals


def _membership(times, intervals: Sequence[Interval]) -> np.ndarray:
    inside = np.zeros(len(times), dtype=bool)
    for lo, hi in intervals:
        inside |= (times >= lo) & (times <= hi)
    return inside


# --- traces -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasureTrace:
    times: np.ndarray
    g: np.ndarray
    sigma: np.ndarray
    idis: list[Interval]
    ibis: list[Interval]
    variant: Variant
    tol: float = 0.0
    violations: int = 0
    in_idi: np.ndarray = field(init=False, repr=False)
    in_ibi: np.ndarray = field(init=False, repr=False)

    HEADER = ("t", "g", "sigma", "in_idi", "in_ibi")

    def __post_init__(self):
        object.__setattr__(self, "in_idi", _membership(self.times, self.idis))
        object.__setattr__(self, "in_ibi", _membership(self.times, self.ibis))

    def to_rows(self) -> list[dict]:
        return [
            {"t": float(t), "g": float(g), "sigma": float(s),
             "in_idi": int(i), "in_ibi": int(b)}
            for t, g, s, i, b in zip(self.times, self.g, self.sigma, self.in_idi, self.in_ibi)
        ]

    def intervals(self) -> dict[str, list[list[float]]]:
        return {
            "idi": [[lo, hi] for lo, hi in self.idis],
            "ibi": [[lo, hi] for lo, hi in self.ibis],
        }


def integrated_measures(trace: MeasureTrace) -> tuple[float, float]:
    """(N_blp, I_rhp): ∫σ over the backflow intervals and ∫g over the grid."""
    if len(trace.times) < 2:
        return 0.0, 0.0
    n_blp = trapezoid(np.clip(trace.sigma, 0.0, None), trace.times)
    i_rhp = trapezoid(trace.g, trace.times)
    return float(n_blp), float(i_rhp)


def _default_tol(scale: float) -> float:
    return RELATIVE_TOL * scale


def _full_sigma(trace: CoefficientTrace, pair: StatePair, ode_rtol: float,
                verbose: bool) -> np.ndarray:
    first = propagate(pair.first, trace, rtol=ode_rtol, verbose=verbose)
    second = propagate(pair.second, trace, rtol=ode_rtol, verbose=verbose)
    differences = first.states - second.states
    return np.array([blp_sigma_full(d, s) for d, s in zip(differences, trace.sets)])


def rwa_measure_trace(
    params: SpectralParams,
    grid,
    pair: StatePair = CANONICAL_PAIR,
    tol: Optional[float] = None,
) -> MeasureTrace:
    """g and σ of the rotating-wave model; no coefficient trace needed."""
    _require_pair(pair)
    reference = rwa_trace(params, grid)
    times, gamma = reference.times, reference.gamma
    tol = _default_tol(float(np.max(np.abs(gamma)))) if tol is None else tol
    g = np.maximum(0.0, -gamma)
    sigma = np.array([
        -gm * rwa_F_from_accum(acc, pair.a, pair.b_coh).value
        for gm, acc in zip(gamma, reference.gamma_accum)
    ])
    # F > 0, so σ and g are positive exactly where γ < 0
    intervals = detect_intervals(times, -gamma, tol)
    return MeasureTrace(times, g, sigma, intervals, list(intervals), Variant.rwa, tol)


def measure_trace(
    trace: CoefficientTrace,
    variant: Variant = Variant.full,
    pair: StatePair = CANONICAL_PAIR,
    second_order_only: bool = False,
    tol: Optional[float] = None,
    ode_rtol: float = 1e-9,
    verbose: bool = False,
) -> MeasureTrace:
    """g(t), σ(t) and their intervals on the trace grid.

    ``full`` propagates both states of ``pair`` through the Bloch equations,
    ``secular`` uses the closed-form solution with α = β = 0 and ``rwa``
    the rotating-wave model of the trace's bath parameters. With
    ``second_order_only`` the fourth-order parts are dropped first.
    """
    variant = Variant(variant)
    _require_pair(pair)
    if second_order_only:
        trace = trace.second_order_only()
    times = trace.grid

    if variant is Variant.rwa:
        if trace.params is None:
            raise ConfigError("the rwa variant needs bath parameters on the trace")
        return rwa_measure_trace(trace.params, times, pair, tol)

    tol = _default_tol(trace.max_magnitude()) if tol is None else tol
    if variant is Variant.secular:
        trace = trace.secular()
        series = secular_integrals(trace)
        g = np.array([rhp_g_secular(s) for s in trace.sets])
        sigma = np.array([blp_sigma_secular(pair, series[i], s)
                          for i, s in enumerate(trace.sets)])
    else:
        g = np.array([rhp_g_full(s) for s in trace.sets])
        sigma = _full_sigma(trace, pair, ode_rtol, verbose)

    violations = sum(not check_conditions(s).implication for s in trace.sets)
    return MeasureTrace(
        times, g, sigma,
        detect_intervals(times, g, tol),
        detect_intervals(times, sigma, tol),
        variant, tol, violations,
    )


# --- pair sweep -------------------------------------------------------------

class PairSweepResult(NamedTuple):
    pair: StatePair
    sigma: float
    samples: list[tuple[float, float, float]]


def _difference_flow(trace: CoefficientTrace, index: int, variant: Variant,
                     ode_rtol: float) -> np.ndarray:
    """Linear map Φ with Δb(t) = Φ Δb(0); the drift cancels in differences."""
    t = float(trace.grid[index])
    if variant is Variant.secular:
        integrals = secular_integrals(trace.secular())[index]
        cos_d, sin_d = math.cos(integrals.delta_phase), math.sin(integrals.delta_phase)
        damping = math.exp(-integrals.theta)
        return np.array([
            [damping * cos_d, -damping * sin_d, 0.0],
            [damping * sin_d, damping * cos_d, 0.0],
            [0.0, 0.0, math.exp(-integrals.lam)],
        ])
    origin = propagate(BlochVector(0.0, 0.0, 0.0), trace, t, rtol=ode_rtol).final.as_array()
    columns = [
        propagate(BlochVector.from_array(e), trace, t, rtol=ode_rtol).final.as_array() - origin
        for e in np.eye(3)
    ]
    return np.column_stack(columns)


def pair_sweep(
    trace: CoefficientTrace,
    t: float,
    variant: Variant = Variant.full,
    n_theta: int = 9,
    n_phi: int = 16,
    ode_rtol: float = 1e-9,
) -> PairSweepResult:
    """σ at time ``t`` for antipodal pure-state pairs on a Bloch-sphere grid.

    Returns the sampled pair with the largest σ plus every sample as
    (polar angle, azimuth, σ). A diagnostic, not a global maximization.
    """
    variant = Variant(variant)
    if variant is Variant.rwa:
        raise ConfigError("pair sweep supports the full and secular variants")
    index = int(np.argmin(np.abs(trace.grid - t)))
    coeffs = trace.sets[index]
    if variant is Variant.secular:
        coeffs = coeffs.secular()
    flow = _difference_flow(trace, index, variant, ode_rtol)

    samples = []
    best: Optional[tuple[float, StatePair]] = None
    for polar in np.linspace(0.0, math.pi, n_theta):
        azimuths = [0.0] if polar in (0.0, math.pi) else np.linspace(0, 2 * math.pi, n_phi,
                                                                    endpoint=False)
        for azimuth in azimuths:
            n = np.array([math.sin(polar) * math.cos(azimuth),
                          math.sin(polar) * math.sin(azimuth), math.cos(polar)])
            sigma = blp_sigma_full(flow @ (2 * n), coeffs)
            samples.append((float(polar), float(azimuth), sigma))
            if best is None or sigma > best[0]:
                best = (sigma, StatePair(BlochVector.from_array(n), BlochVector.from_array(-n)))
    return PairSweepResult(pair=best[1], sigma=best[0], samples=samples)
