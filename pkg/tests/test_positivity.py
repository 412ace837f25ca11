import numpy as np
import pytest

from nonmarkov.core.positivity import (
    PositivityReport,
    positivity_report,
    relaxed_secular_check,
    relaxed_values,
)
from nonmarkov.core.tcl_coefficients import CoefficientTrace, TclOrder, evaluate_trace


@pytest.fixture
def tcl2_report(params_a):
    trace = evaluate_trace(params_a, np.linspace(0.0, 10.0, 201), order=TclOrder.tcl2)
    return trace, positivity_report(trace)


def test_first_row_is_identity_map(tcl2_report):
    _, report = tcl2_report
    assert report.G[0] == 1.0
    assert report.chi[0] == 1.0 and report.A[0] == 1.0 and report.kappa[0] == 0.0
    assert report.suff[0]


def test_sufficient_condition_implies_positive_G(tcl2_report):
    _, report = tcl2_report
    assert report.violations == []


def test_relaxed_check_matches_report(tcl2_report):
    trace, report = tcl2_report
    np.testing.assert_array_equal(relaxed_secular_check(trace), report.relaxed)


def test_weak_coupling_keeps_G_near_one(params_a):
    trace = evaluate_trace(params_a.with_gamma0(1e-6), np.linspace(0.0, 10.0, 41),
                           order=TclOrder.tcl2)
    report = positivity_report(trace)
    np.testing.assert_allclose(report.G, 1.0, atol=1e-4)
    assert report.nec1.all() and report.nec2.all()


def test_constant_decay_positivity():
    grid = np.linspace(0.0, 4.0, 401)
    trace = CoefficientTrace.from_totals(grid, gamma_minus=1.0)
    report = positivity_report(trace)
    A = np.exp(-grid)
    np.testing.assert_allclose(report.A, A, rtol=1e-12)
    # κ = A ∫ e^{s}(−1) ds = A(1 − e^{t}) up to trapezoid error
    np.testing.assert_allclose(report.kappa, A * (1 - np.exp(grid)), atol=1e-4)
    assert np.all(report.G > -1e-4)
    assert report.nec1.all() and report.nec2.all()


def test_relaxed_values():
    assert relaxed_values(1.0, 1.0, 0.0) == 1.0
    assert relaxed_values(0.5, 0.0, 0.6) < 0


def test_rows(tcl2_report):
    _, report = tcl2_report
    row = report.to_rows()[0]
    assert list(row) == list(PositivityReport.HEADER)
    assert row["nec1"] in (0, 1)
    assert len(report) == 201


def test_relaxed_check_holds_over_twenty_correlation_times(params_a):
    grid = np.linspace(0.0, 20 * params_a.correlation_time, 401)
    trace = evaluate_trace(params_a, grid, order=TclOrder.tcl2)
    assert relaxed_secular_check(trace).all()


def test_nonsecular_angle_is_monotone(tcl2_report):
    _, report = tcl2_report
    assert report.theta_ns[0] == 0.0
    assert np.all(np.diff(report.theta_ns) >= 0)


def test_sufficient_condition_without_nonsecular_terms(synthetic_secular_trace):
    report = positivity_report(synthetic_secular_trace)
    np.testing.assert_array_equal(report.theta_ns, 0.0)
    A, chi, kappa = report.A, report.chi, report.kappa
    np.testing.assert_array_equal(report.suff, chi <= 1 + A**2 - kappa**2 - 2 * np.abs(A - chi))
