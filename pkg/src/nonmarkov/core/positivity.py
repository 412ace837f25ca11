"""Complete-positivity conditions for the block-diagonal damping matrix."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from nonmarkov.core.dynamics import secular_integrals
from nonmarkov.core.tcl_coefficients import CoefficientTrace

# Slack for the G >= 0 consequence of the sufficient condition.
G_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class PositivityReport:
    """Per-point quantities and conditions on the trace grid.

    chi = e^{-2Θ}, A = e^{-Λ}, kappa = A ∫(Γ₊−Γ₋)/A, theta_ns = 2∫√(α²+β²) and
    G = (1−A)² + 2χ − κ² − χ cosh θ. nec1 and nec2 are the necessary
    conditions Λ >= 0 and 2Θ >= Λ; suff is χ cosh θ <= 1 + A² − κ² − 2|A − χ|;
    relaxed is the secular-regime condition (1−A)² + χ − κ² >= 0.
    """

    times: np.ndarray
    theta: np.ndarray
    lam: np.ndarray
    chi: np.ndarray
    A: np.ndarray
    kappa: np.ndarray
    theta_ns: np.ndarray
    G: np.ndarray
    nec1: np.ndarray
    nec2: np.ndarray
    suff: np.ndarray
    relaxed: np.ndarray

    HEADER = ("t", "Theta", "Lambda", "chi", "A", "kappa", "theta_ns", "G",
              "nec1", "nec2", "suff", "relaxed")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def violations(self) -> list[float]:
        """Times where suff holds but G < 0; always empty for a consistent report."""
        bad = self.suff & (self.G < -G_SLACK)
        return [float(t) for t in self.times[bad]]

    def to_rows(self) -> list[dict]:
        rows = []
        for i, t in enumerate(self.times):
            rows.append({
                "t": float(t),
                "Theta": float(self.theta[i]),
                "Lambda": float(self.lam[i]),
                "chi": float(self.chi[i]),
                "A": float(self.A[i]),
                "kappa": float(self.kappa[i]),
                "theta_ns": float(self.theta_ns[i]),
                "G": float(self.G[i]),
                "nec1": int(self.nec1[i]),
                "nec2": int(self.nec2[i]),
                "suff": int(self.suff[i]),
                "relaxed": int(self.relaxed[i]),
            })
        return rows


def positivity_report(trace: CoefficientTrace) -> PositivityReport:
    """Evaluate the conditions with trapezoidal integrals on the trace grid."""
    series = secular_integrals(trace, rule="trapezoid")
    totals = trace.totals()
    times = trace.grid
    rotation = np.hypot(totals["alpha"], totals["beta"])
    theta_ns = (2.0 * cumulative_trapezoid(rotation, times, initial=0.0)
                if len(times) > 1 else np.zeros(1))

    chi = np.exp(-2.0 * series.theta)
    A = np.exp(-series.lam)
    kappa = A * series.drift
    with np.errstate(over="ignore"):
        coherence = chi * np.cosh(theta_ns)
    G = (1.0 - A) ** 2 + 2.0 * chi - kappa**2 - coherence

    return PositivityReport(
        times=times,
        theta=series.theta,
        lam=series.lam,
        chi=chi,
        A=A,
        kappa=kappa,
        theta_ns=theta_ns,
        G=G,
        nec1=series.lam >= 0,
        nec2=2.0 * series.theta >= series.lam,
        suff=coherence <= 1.0 + A**2 - kappa**2 - 2.0 * np.abs(A - chi),
        relaxed=relaxed_values(A, chi, kappa) >= 0,
    )


def relaxed_values(A, chi, kappa):
    return (1.0 - A) ** 2 + chi - kappa**2


def relaxed_secular_check(trace: CoefficientTrace) -> np.ndarray:
    """Per-point truth of (1−A)² + χ − κ² >= 0."""
    series = secular_integrals(trace, rule="trapezoid")
    A = np.exp(-series.lam)
    return relaxed_values(A, np.exp(-2.0 * series.theta), A * series.drift) >= 0
