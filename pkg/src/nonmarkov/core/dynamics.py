"""Bloch-vector dynamics of the qubit.

Three routes to b(t) = (bx, by, bz):

- ``propagate`` integrates the full Bloch equations, nonsecular terms
  included, with coefficients spline-interpolated from a trace;
- ``secular_solution`` evaluates the closed form that holds once α and β
  are dropped;
- the ``rwa_*`` functions give the exactly solvable rotating-wave model of
  the Lorentzian bath, used as the reference curve.

Everything is in the interaction picture. Basis order is (excited, ground),
σz = diag(1, −1), so the excited state has bz = +1 and ρ_eg = (bx − i·by)/2.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import CubicSpline

from nonmarkov.core.quadrature import integrate_1d, unit_rule
from nonmarkov.core.spectral import SpectralParams
from nonmarkov.core.tcl_coefficients import (
    FIELDS,
    CoefficientSet,
    CoefficientTrace,
)
from nonmarkov.models.errors import (
    ConfigError,
    InterpolationRangeError,
    PropagationError,
    StateError,
)
from nonmarkov.output import diagnostic

if TYPE_CHECKING:
    from nonmarkov.core.measures import StatePair

DEFAULT_ODE_RTOL = 1e-9
DEFAULT_ODE_ATOL = 1e-12
# Nonsecular terms count as present above this fraction of the largest rate.
NONSECULAR_THRESHOLD = 1e-6
# Gauss-Legendre order per grid interval for the drift integral of bz.
DRIFT_RULE_ORDER = 12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class BlochVector:
    bx: float
    by: float
    bz: float

    @classmethod
    def from_array(cls, values) -> "BlochVector":
        bx, by, bz = (float(v) for v in values)
        return cls(bx, by, bz)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def __sub__(self, other: "BlochVector") -> "BlochVector":
        return BlochVector(self.bx - other.bx, self.by - other.by, self.bz - other.bz)

    def is_physical(self, tol: float = 1e-9) -> bool:
        return self.norm() <= 1.0 + tol


BlochVector.EXCITED = BlochVector(0.0, 0.0, 1.0)
BlochVector.GROUND = BlochVector(0.0, 0.0, -1.0)


def density_from_bloch(state: BlochVector) -> np.ndarray:
    """ρ = (I + bx σx + by σy + bz σz) / 2."""
    return 0.5 * (np.eye(2) + state.bx * PAULI_X + state.by * PAULI_Y + state.bz * PAULI_Z)


def bloch_from_density(rho) -> BlochVector:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise StateError("density matrix must be 2x2", detail=f"shape={rho.shape}")
    return BlochVector(
        float(np.real(np.trace(rho @ PAULI_X))),
        float(np.real(np.trace(rho @ PAULI_Y))),
        float(np.real(np.trace(rho @ PAULI_Z))),
    )


# --- Bloch equations --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DampingSystem:
    """Affine form ḃ = M b + v of the Bloch equations at one time."""

    matrix: np.ndarray
    drift: np.ndarray

    @classmethod
    def assemble(cls, coeffs: CoefficientSet) -> "DampingSystem":
        return cls.from_totals(coeffs.totals())

    @classmethod
    def from_totals(cls, c: dict[str, float]) -> "DampingSystem":
        gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
        alpha, beta = c["alpha"], c["beta"]
        shift = c["s_minus"] - c["s_plus"]
        matrix = np.array([
            [-0.5 * (gm + gp + g0 - 2 * alpha), shift - beta, 0.0],
            [-(shift + beta), -0.5 * (gm + gp + g0 + 2 * alpha), 0.0],
            [0.0, 0.0, -(gm + gp)],
        ])
        return cls(matrix=matrix, drift=np.array([0.0, 0.0, gp - gm]))

    def apply(self, state: Union[BlochVector, np.ndarray]) -> np.ndarray:
        b = state.as_array() if isinstance(state, BlochVector) else np.asarray(state)
        return self.matrix @ b + self.drift


def bloch_rhs(state: BlochVector, coeffs: CoefficientSet) -> BlochVector:
    """Time derivative of the Bloch vector under the full generator."""
    c = coeffs.totals()
    gm, gp, g0 = c["gamma_minus"], c["gamma_plus"], c["gamma_zero"]
    alpha, beta = c["alpha"], c["beta"]
    s_plus, s_minus = c["s_plus"], c["s_minus"]
    bx, by, bz = state.bx, state.by, state.bz
    return BlochVector(
        -0.5 * (gm + gp + g0 - 2 * alpha) * bx + (s_minus - s_plus - beta) * by,
        -0.5 * (gm + gp + g0 + 2 * alpha) * by - (s_minus - s_plus + beta) * bx,
        -(gm + gp) * bz + gp - gm,
    )


class CoefficientInterpolant:
    """Cubic-spline interpolation of the coefficient totals of a trace."""

    def __init__(self, trace: CoefficientTrace):
        self.grid = trace.grid
        self.t_max = float(self.grid[-1])
        totals = trace.totals()
        self.values = np.column_stack([totals[name] for name in FIELDS])
        self._spline = CubicSpline(self.grid, self.values) if len(self.grid) > 1 else None

    def __call__(self, t: float) -> dict[str, float]:
        if t < 0 or t > self.t_max * (1 + 1e-12) + 1e-300:
            raise InterpolationRangeError(
                "time outside the coefficient trace",
                detail=f"t={t!r} span=[0, {self.t_max!r}]",
            )
        row = self.values[0] if self._spline is None else self._spline(min(t, self.t_max))
        return dict(zip(FIELDS, (float(v) for v in row)))

    def coefficients(self, t: float) -> CoefficientSet:
        return CoefficientSet.from_totals(t, **self(t))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Bloch vectors sampled on a time grid; ``states`` has shape (n, 3)."""

    times: np.ndarray
    states: np.ndarray

    HEADER = ("t", "bx", "by", "bz")

    def __len__(self) -> int:
        return len(self.times)

    def state(self, index: int) -> BlochVector:
        return BlochVector.from_array(self.states[index])

    @property
    def final(self) -> BlochVector:
        return self.state(-1)

    def to_rows(self) -> list[dict[str, float]]:
        return [
            {"t": float(t), "bx": float(b[0]), "by": float(b[1]), "bz": float(b[2])}
            for t, b in zip(self.times, self.states)
        ]

    @classmethod
    def from_rows(cls, rows: Sequence[dict]) -> "Trajectory":
        times = np.array([float(r["t"]) for r in rows])
        states = np.array([[float(r["bx"]), float(r["by"]), float(r["bz"])] for r in rows])
        return cls(times=times, states=states.reshape(-1, 3))


def _check_initial(initial: BlochVector) -> None:
    values = initial.as_array()
    if not np.all(np.isfinite(values)) or not initial.is_physical(1e-12):
        raise StateError("initial Bloch vector must lie in the unit ball",
                         detail=f"b={tuple(values)!r}")


def _max_step(trace: CoefficientTrace) -> float:
    step = float(np.min(np.diff(trace.grid))) if len(trace) > 1 else math.inf
    totals = trace.totals()
    scale = max((float(np.max(np.abs(v))) for v in totals.values()), default=0.0)
    nonsecular = float(np.max(np.abs(totals["alpha"]) + np.abs(totals["beta"])))
    if scale > 0 and nonsecular > NONSECULAR_THRESHOLD * scale and trace.params is not None:
        step = min(step, math.pi / (4 * trace.params.omega0))
    return step


def propagate(
    initial: BlochVector,
    trace: CoefficientTrace,
    t_final: Optional[float] = None,
    rtol: float = DEFAULT_ODE_RTOL,
    atol: float = DEFAULT_ODE_ATOL,
    verbose: bool = False,
) -> Trajectory:
    """Integrate the Bloch equations from t = 0 to ``t_final``.

    Uses the embedded Runge-Kutta 5(4) pair with the coefficient totals
    spline-interpolated from ``trace``. The result is sampled at the trace
    grid points up to ``t_final`` (and at ``t_final`` itself).
    """
    _check_initial(initial)
    grid = trace.grid
    t_final = float(grid[-1]) if t_final is None else float(t_final)
    if t_final < 0 or t_final > grid[-1] * (1 + 1e-12):
        raise InterpolationRangeError(
            "t_final outside the coefficient trace",
            detail=f"t_final={t_final!r} span=[0, {grid[-1]!r}]",
        )
    times = grid[grid <= t_final]
    if times[-1] < t_final:
        times = np.append(times, t_final)
    if t_final == 0.0:
        return Trajectory(times=np.array([0.0]), states=initial.as_array()[None, :])

    interpolant = CoefficientInterpolant(trace)

    def rhs(t, y):
        return DampingSystem.from_totals(interpolant(t)).apply(y)

    max_step = _max_step(trace)
    solution = solve_ivp(
        rhs, (0.0, t_final), initial.as_array(), method="RK45",
        t_eval=times, rtol=rtol, atol=atol, max_step=max_step,
    )
    if not solution.success:
        raise PropagationError("Bloch equation integration failed", detail=solution.message)
    diagnostic(f"RK45 to t={t_final!r}: {solution.nfev} evaluations, max_step={max_step!r}",
               verbose, tag="ode")
    return Trajectory(times=solution.t, states=solution.y.T.copy())


# --- secular solution -------------------------------------------------------

class SecularIntegrals(NamedTuple):
    """Accumulated integrals at one time.

    theta = ½∫(Γ₋+Γ₊+Γ₀), lam = ∫(Γ₋+Γ₊), delta_phase = ∫(S₊−S₋) and
    drift = ∫ e^{Λ(s)}(Γ₊−Γ₋) ds.
    """

    theta: float = 0.0
    lam: float = 0.0
    delta_phase: float = 0.0
    drift: float = 0.0


@dataclass(frozen=True, eq=False)
class SecularSeries:
    times: np.ndarray
    theta: np.ndarray
    lam: np.ndarray
    delta_phase: np.ndarray
    drift: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, index: int) -> SecularIntegrals:
        return SecularIntegrals(
            float(self.theta[index]), float(self.lam[index]),
            float(self.delta_phase[index]), float(self.drift[index]),
        )


def _spline_primitives(grid, values):
    """Antiderivative of the not-a-knot cubic interpolant, zero at t = 0."""
    spline = CubicSpline(grid, values)
    return spline, spline.antiderivative()


def secular_integrals(trace: CoefficientTrace, rule: str = "spline") -> SecularSeries:
    """Θ, Λ, δ and the bz drift integral on the trace grid.

    ``rule="spline"`` integrates the cubic interpolant exactly, matching what
    ``propagate`` sees between grid points. ``rule="trapezoid"`` applies the
    trapezoidal rule on the grid.
    """
    grid = trace.grid
    c = trace.totals()
    decay = c["gamma_minus"] + c["gamma_plus"]
    dephasing = 0.5 * (decay + c["gamma_zero"])
    rotation = c["s_plus"] - c["s_minus"]
    pump = c["gamma_plus"] - c["gamma_minus"]

    if len(grid) == 1:
        zeros = np.zeros(1)
        return SecularSeries(grid, zeros, zeros.copy(), zeros.copy(), zeros.copy())

    if rule == "trapezoid":
        lam = cumulative_trapezoid(decay, grid, initial=0.0)
        return SecularSeries(
            times=grid,
            theta=cumulative_trapezoid(dephasing, grid, initial=0.0),
            lam=lam,
            delta_phase=cumulative_trapezoid(rotation, grid, initial=0.0),
            drift=cumulative_trapezoid(np.exp(lam) * pump, grid, initial=0.0),
        )
    if rule != "spline":
        raise ConfigError(f"unknown integration rule {rule!r}", detail="use spline or trapezoid")

    _, lam_primitive = _spline_primitives(grid, decay)
    pump_spline = CubicSpline(grid, pump)
    x, w = unit_rule(DRIFT_RULE_ORDER)
    widths = np.diff(grid)
    nodes = grid[:-1, None] + widths[:, None] * x
    pieces = (widths[:, None] * w * np.exp(lam_primitive(nodes)) * pump_spline(nodes)).sum(axis=1)

    return SecularSeries(
        times=grid,
        theta=_spline_primitives(grid, dephasing)[1](grid),
        lam=lam_primitive(grid),
        delta_phase=_spline_primitives(grid, rotation)[1](grid),
        drift=np.concatenate([[0.0], np.cumsum(pieces)]),
    )


def secular_solution(initial: BlochVector, integrals: SecularIntegrals) -> BlochVector:
    """b(t) under the secular generator, from the accumulated integrals."""
    damping = math.exp(-integrals.theta)
    cos_d, sin_d = math.cos(integrals.delta_phase), math.sin(integrals.delta_phase)
    return BlochVector(
        damping * (initial.bx * cos_d - initial.by * sin_d),
        damping * (initial.bx * sin_d + initial.by * cos_d),
        math.exp(-integrals.lam) * (initial.bz + integrals.drift),
    )


def secular_trajectory(initial: BlochVector, series: SecularSeries) -> Trajectory:
    states = np.array([secular_solution(initial, series[i]).as_array()
                       for i in range(len(series))])
    return Trajectory(times=series.times, states=states.reshape(-1, 3))


# --- rotating-wave reference ------------------------------------------------

def _tanhc(x):
    """tanh(x)/x, continued to 1 at x = 0."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    series = 1 - x**2 / 3 + 2 * x**4 / 15
    return np.where(small, series, np.tanh(safe) / safe)


def rwa_gamma(t, params: SpectralParams, branch: int = 1):
    """Decay rate γ(t) of the rotating-wave model.

    γ(t) = Re[2γ₀λ tanh(dt/2) / (d + (λ − iΔ) tanh(dt/2))] with
    d = √((λ − iΔ)² − 2γ₀λ). Written as Re[2γ₀λ q / (1 + κq)] with
    q = (t/2)·tanh(dt/2)/(dt/2), which stays finite at the branch point d = 0.
    The rate is even in d, so ``branch=-1`` gives the same values.
    """
    t = np.asarray(t, dtype=float)
    kappa = params.lam - 1j * params.delta
    d = branch * np.sqrt(kappa**2 - 2 * params.gamma0 * params.lam + 0j)
    q = 0.5 * t * _tanhc(0.5 * d * t)
    value = np.real(2 * params.gamma0 * params.lam * q / (1 + kappa * q))
    if not np.all(np.isfinite(value)):
        raise PropagationError("rotating-wave decay rate is not finite",
                               detail=f"lambda={params.lam!r}, delta={params.delta!r}")
    return float(value) if value.ndim == 0 else value


def rwa_gamma_second_order(t, params: SpectralParams):
    """Second-order expansion of γ(t): γ₀λ Re[(1 − e^{−κt})/κ], κ = λ − iΔ."""
    t = np.asarray(t, dtype=float)
    kappa = params.lam - 1j * params.delta
    value = params.gamma0 * params.lam * np.real((1 - np.exp(-kappa * t)) / kappa)
    return float(value) if value.ndim == 0 else value


def _rwa_panels(t: float, params: SpectralParams) -> int:
    return max(1, math.ceil(t * (abs(params.delta) + params.lam) / (2 * math.pi)))


def rwa_decay_rate(t: float, params: SpectralParams, rtol: float = 1e-10) -> tuple[float, float]:
    """(γ(t), Γ(t) = ∫₀ᵗ γ)."""
    gamma = rwa_gamma(float(t), params)
    estimate = integrate_1d(lambda s: rwa_gamma(s, params), 0.0, float(t),
                            rtol=rtol, panels=_rwa_panels(t, params))
    return gamma, estimate.value


@dataclass(frozen=True, eq=False)
class RwaTrace:
    times: np.ndarray
    gamma: np.ndarray
    gamma_accum: np.ndarray

    HEADER = ("t", "gamma", "Gamma_accum")

    def to_rows(self) -> list[dict[str, float]]:
        return [
            {"t": float(t), "gamma": float(g), "Gamma_accum": float(a)}
            for t, g, a in zip(self.times, self.gamma, self.gamma_accum)
        ]


def rwa_trace(params: SpectralParams, grid, rtol: float = 1e-10) -> RwaTrace:
    """γ and Γ on a grid; Γ accumulated interval by interval."""
    grid = np.asarray(grid, dtype=float)
    pieces = [
        integrate_1d(lambda s: rwa_gamma(s, params), a, b, rtol=rtol,
                     panels=_rwa_panels(b - a, params)).value
        for a, b in zip(grid[:-1], grid[1:])
    ]
    accum = np.concatenate([[0.0], np.cumsum(pieces)])
    return RwaTrace(times=grid, gamma=np.asarray(rwa_gamma(grid, params)), gamma_accum=accum)


class FValue(NamedTuple):
    value: float
    degenerate: bool


def rwa_F_from_accum(gamma_accum: float, a: float, b_coh: float) -> FValue:
    """F = (a²e^{−3Γ/2} + |b|²e^{−Γ/2}) / √(a²e^{−Γ} + |b|²)."""
    if a == 0 and b_coh == 0:
        return FValue(0.0, True)
    numerator = a**2 * math.exp(-1.5 * gamma_accum) + b_coh**2 * math.exp(-0.5 * gamma_accum)
    return FValue(numerator / math.sqrt(a**2 * math.exp(-gamma_accum) + b_coh**2), False)


def rwa_F(t: float, params: SpectralParams, pair: "StatePair") -> FValue:
    _, gamma_accum = rwa_decay_rate(t, params)
    return rwa_F_from_accum(gamma_accum, pair.a, pair.b_coh)
