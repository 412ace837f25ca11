"""Brute-force reference computations for validating the main numerics.

These are deliberately simple and slow: the ε-limit Choi construction of
the indivisibility measure, midpoint Riemann sums for the coefficient
integrals, direct frequency quadrature for the kernels and finite
differences of the trace distance.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from nonmarkov.core.dynamics import Trajectory
from nonmarkov.core.quadrature import midpoint_rule, simplex_slabs
from nonmarkov.core.spectral import (
    CorrelationKernels,
    LorentzianDensity,
    SpectralParams,
    quad_checked,
)
from nonmarkov.core.tcl_coefficients import (
    INTEGRANDS,
    Coefficient,
    CoefficientSet,
    SimplexFactors,
)
from nonmarkov.models.errors import ConfigError

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
EXCITED_PROJECTOR = np.diag([1, 0]).astype(complex)
GROUND_PROJECTOR = np.diag([0, 1]).astype(complex)

MAX_EPSILON = 1e-3


def _anticommutator(a, b):
    return a @ b + b @ a


def apply_generator(rho: np.ndarray, coeffs: CoefficientSet) -> np.ndarray:
    """L_t(ρ): Lamb-shift commutator, secular dissipator and nonsecular part."""
    c = coeffs.totals()
    rho = np.asarray(rho, dtype=complex)
    sp, sm = SIGMA_PLUS, SIGMA_MINUS
    p1, p0 = EXCITED_PROJECTOR, GROUND_PROJECTOR

    hamiltonian = c["s_plus"] * p1 + c["s_minus"] * p0
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    out += c["gamma_minus"] * (sm @ rho @ sp - 0.5 * _anticommutator(sp @ sm, rho))
    out += c["gamma_plus"] * (sp @ rho @ sm - 0.5 * _anticommutator(sm @ sp, rho))
    out += c["gamma_zero"] * (p1 @ rho @ p1 - 0.5 * _anticommutator(p1, rho))
    nonsecular = complex(c["alpha"], c["beta"])
    out += nonsecular * (sp @ rho @ sp) + nonsecular.conjugate() * (sm @ rho @ sm)
    return out


def superoperator(coeffs: CoefficientSet) -> np.ndarray:
    """The generator as a 4x4 matrix on row-major vec(ρ)."""
    columns = []
    for k in range(4):
        basis = np.zeros(4, dtype=complex)
        basis[k] = 1.0
        columns.append(apply_generator(basis.reshape(2, 2), coeffs).reshape(4))
    return np.column_stack(columns)


@dataclass(frozen=True, eq=False)
class ChoiState:
    """|Φ⟩⟨Φ| with |Φ⟩ = (|01⟩ + |10⟩)/√2, system index first."""

    matrix: np.ndarray

    @classmethod
    def maximally_entangled(cls) -> "ChoiState":
        phi = np.zeros(4, dtype=complex)
        phi[1] = phi[2] = 1 / math.sqrt(2)
        return cls(np.outer(phi, phi.conj()))

    def extend(self, superop: np.ndarray) -> np.ndarray:
        """(L ⊗ I) applied to the state."""
        tensor = self.matrix.reshape(2, 2, 2, 2)  # [s, a, s', a']
        generator = superop.reshape(2, 2, 2, 2)  # [s, s', r, r']
        return np.einsum("ijkl,kalb->iajb", generator, tensor).reshape(4, 4)


def trace_norm(matrix: np.ndarray) -> float:
    hermitian = 0.5 * (matrix + matrix.conj().T)
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian))))


def _choi_g(coeffs: CoefficientSet, epsilon: float) -> float:
    state = ChoiState.maximally_entangled()
    perturbed = state.matrix + epsilon * state.extend(superoperator(coeffs))
    return (trace_norm(perturbed) - 1.0) / epsilon


def choi_g_oracle(coeffs: CoefficientSet, epsilon: float = 1e-6,
                  richardson: bool = False) -> float:
    """g from ‖[I + ε(L ⊗ I)]|Φ⟩⟨Φ|‖₁ at finite ε.

    The estimate is first order in ε; ``richardson`` returns
    2 g(ε/2) − g(ε), which cancels that term.
    """
    if not 0 < epsilon <= MAX_EPSILON:
        raise ConfigError("epsilon must lie in (0, 1e-3]", detail=f"epsilon={epsilon!r}")
    if richardson:
        return 2.0 * _choi_g(coeffs, epsilon / 2) - _choi_g(coeffs, epsilon)
    return _choi_g(coeffs, epsilon)


# --- coefficient integrals --------------------------------------------------

def _simplex_midpoint(t: float, kernels: CorrelationKernels, which: Coefficient,
                      n: int) -> float:
    nodes, weights = midpoint_rule(n)
    integrand = INTEGRANDS[Coefficient(which)]
    total = 0.0
    for t1, t2, t3, weight in simplex_slabs(t, nodes, weights):
        total += float(np.sum(weight * integrand(SimplexFactors(kernels, t, t1, t2, t3))))
    return total


def simplex_riemann_oracle(t: float, kernels: CorrelationKernels, which: Coefficient,
                           n: int = 200, richardson: bool = False) -> float:
    """Midpoint sum of a fourth-order integrand over n³ cells of the simplex.

    ``richardson`` combines n and n/2 cells per axis to cancel the h² term.
    """
    if n < 50:
        raise ConfigError("simplex oracle needs n >= 50", detail=f"n={n}")
    if t == 0:
        return 0.0
    fine = _simplex_midpoint(t, kernels, which, n)
    if not richardson:
        return fine
    coarse = _simplex_midpoint(t, kernels, which, n // 2)
    return (4.0 * fine - coarse) / 3.0


def _second_order_integrand(kernels: CorrelationKernels, which: Coefficient, t: float):
    w = kernels.omega0
    which = Coefficient(which)
    if which is Coefficient.s_plus:
        return lambda tau: np.sin(w * tau) * kernels.c(tau) - np.cos(w * tau) * kernels.s(tau)
    if which is Coefficient.s_minus:
        return lambda tau: -(np.sin(w * tau) * kernels.c(tau) + np.cos(w * tau) * kernels.s(tau))
    if which is Coefficient.gamma_minus:
        return lambda tau: 2 * (np.cos(w * tau) * kernels.c(tau) + np.sin(w * tau) * kernels.s(tau))
    if which is Coefficient.gamma_plus:
        return lambda tau: 2 * (np.cos(w * tau) * kernels.c(tau) - np.sin(w * tau) * kernels.s(tau))
    if which is Coefficient.alpha:
        return lambda tau: 2 * kernels.c(t - tau) * np.cos(w * (t + tau))
    if which is Coefficient.beta:
        return lambda tau: 2 * kernels.c(t - tau) * np.sin(w * (t + tau))
    raise ConfigError("gamma_zero has no second-order part")


def riemann_1d_oracle(t: float, kernels: CorrelationKernels, which: Coefficient,
                      n: int = 100_000, richardson: bool = False) -> float:
    """Midpoint Riemann sum in τ of a second-order coefficient."""
    if t == 0:
        return 0.0
    integrand = _second_order_integrand(kernels, which, t)

    def midpoint(count):
        tau = (np.arange(count) + 0.5) * (t / count)
        return float(np.sum(integrand(tau)) * (t / count))

    fine = midpoint(n)
    if not richardson:
        return fine
    return (4.0 * fine - midpoint(n // 2)) / 3.0


def _half_line(func, start: float, t: float, core: float, weight: Optional[str]) -> float:
    """∫_start^∞ func(ω)·weight(ωt) dω, split into a finite core and a Fourier tail."""
    split = start + core
    if weight is None:
        return (quad_checked(func, start, split, epsabs=1e-14, epsrel=1e-11, limit=1000)
                + quad_checked(func, split, np.inf, epsabs=1e-14, epsrel=1e-11, limit=1000))
    body = quad_checked(func, start, split, weight=weight, wvar=t,
                        epsabs=1e-14, epsrel=1e-11, limit=5000)
    tail = quad_checked(func, split, np.inf, weight=weight, wvar=t, epsabs=1e-13, limlst=500)
    return body + tail


def dense_kernel_oracle(t: float, params: SpectralParams, core_widths: float = 1e4) -> complex:
    """c(t) + i s(t) by direct quadrature of the Lorentzian over the whole line.

    The line is cut at the peak; each half is a core of ``core_widths``
    half-widths plus an oscillatory tail integrated to infinity.
    """
    density = LorentzianDensity(params)
    center, core = density.center, core_widths * density.width
    t = float(t)

    def mirrored(u):
        return density(-u)

    if t == 0:
        c = _half_line(density, center, 0.0, core, None) \
            + _half_line(mirrored, -center, 0.0, core, None)
        return complex(c, 0.0)
    # ω = −u on the lower half: cos is even, sin odd
    c = _half_line(density, center, t, core, "cos") + _half_line(mirrored, -center, t, core, "cos")
    s = _half_line(density, center, t, core, "sin") - _half_line(mirrored, -center, t, core, "sin")
    return complex(c, s)


# --- trace distance ---------------------------------------------------------

def finite_difference_sigma(first: Trajectory, second: Trajectory,
                            grid: Optional[np.ndarray] = None) -> np.ndarray:
    """dD/dt along two trajectories: centered inside, one-sided at the ends."""
    times = first.times
    if len(times) != len(second.times) or not np.array_equal(times, second.times):
        raise ConfigError("trajectories are sampled on different grids")
    if grid is not None and not np.array_equal(np.asarray(grid, dtype=float), times):
        raise ConfigError("grid does not match the trajectory times")
    if len(times) < 3:
        raise ConfigError("finite differences need at least three points")
    distance = 0.5 * np.linalg.norm(first.states - second.states, axis=1)
    return np.gradient(distance, times, edge_order=1)
