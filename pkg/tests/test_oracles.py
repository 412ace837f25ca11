import numpy as np
import pytest

from conftest import random_set

from nonmarkov.core.dynamics import Trajectory
from nonmarkov.core.oracles import (
    ChoiState,
    apply_generator,
    choi_g_oracle,
    finite_difference_sigma,
    riemann_1d_oracle,
    simplex_riemann_oracle,
    superoperator,
    trace_norm,
)
from nonmarkov.core.tcl_coefficients import Coefficient, CoefficientSet
from nonmarkov.models.errors import ConfigError


def test_generator_is_trace_preserving_and_hermitian(rng):
    coeffs = random_set(rng)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    out = apply_generator(rho, coeffs)
    assert abs(np.trace(out)) < 1e-14
    np.testing.assert_allclose(out, out.conj().T, atol=1e-14)


def test_superoperator_acts_like_generator(rng):
    coeffs = random_set(rng)
    rho = np.array([[0.4, 0.1j], [-0.1j, 0.6]])
    np.testing.assert_allclose(superoperator(coeffs) @ rho.reshape(4),
                               apply_generator(rho, coeffs).reshape(4), atol=1e-14)


def test_choi_state():
    state = ChoiState.maximally_entangled()
    assert trace_norm(state.matrix) == pytest.approx(1.0)
    identity = np.eye(4)
    np.testing.assert_allclose(state.extend(identity), state.matrix)
    zero = CoefficientSet(t=0.0)
    np.testing.assert_allclose(state.extend(superoperator(zero)), 0.0)


def test_riemann_oracles_vanish_at_zero(kernels_a):
    assert riemann_1d_oracle(0.0, kernels_a, Coefficient.gamma_minus) == 0.0
    assert simplex_riemann_oracle(0.0, kernels_a, Coefficient.gamma_zero) == 0.0
    with pytest.raises(ConfigError):
        simplex_riemann_oracle(1.0, kernels_a, Coefficient.gamma_zero, n=10)
    with pytest.raises(ConfigError):
        riemann_1d_oracle(1.0, kernels_a, Coefficient.gamma_zero)


def test_finite_difference_sigma_linear_distance():
    times = np.linspace(0.0, 1.0, 11)
    first = Trajectory(times, np.column_stack([np.zeros(11), np.zeros(11), 1 - times]))
    second = Trajectory(times, np.zeros((11, 3)))
    np.testing.assert_allclose(finite_difference_sigma(first, second), -0.5)


def test_finite_difference_sigma_rejects_mismatch():
    a = Trajectory(np.linspace(0.0, 1.0, 5), np.zeros((5, 3)))
    b = Trajectory(np.linspace(0.0, 2.0, 5), np.zeros((5, 3)))
    with pytest.raises(ConfigError):
        finite_difference_sigma(a, b)
    short = Trajectory(np.array([0.0, 1.0]), np.zeros((2, 3)))
    with pytest.raises(ConfigError):
        finite_difference_sigma(short, short)
    with pytest.raises(ConfigError):
        finite_difference_sigma(a, a, grid=np.linspace(0.0, 2.0, 5))


def test_choi_oracle_is_first_order_in_epsilon():
    coeffs = CoefficientSet.from_totals(
        0.0, s_plus=0.3, s_minus=-0.2, gamma_minus=-0.5, gamma_plus=0.8,
        gamma_zero=0.1, alpha=0.2, beta=-0.1,
    )
    estimates = [choi_g_oracle(coeffs, epsilon=e) for e in (1e-3, 5e-4, 2.5e-4)]
    first = abs(estimates[0] - estimates[1])
    second = abs(estimates[1] - estimates[2])
    assert first <= 100 * 1e-3
    assert second <= 0.6 * first + 1e-10


def test_simplex_oracle_converges_under_refinement(kernels_a):
    t = 0.1
    values = [simplex_riemann_oracle(t, kernels_a, Coefficient.gamma_zero, n=n) for n in (50, 100, 200)]
    first = abs(values[1] - values[0])
    second = abs(values[2] - values[1])
    assert second <= 0.5 * first + 1e-15
