import math

import numpy as np
import pytest

from nonmarkov.core import quadrature
from nonmarkov.core.quadrature import (
    composite_rule,
    integrate_1d,
    ladder,
    midpoint_rule,
    simplex_slabs,
    unit_rule,
)


@pytest.mark.parametrize("order", [4, 16, 32])
def test_unit_rule_is_exact_for_polynomials(order):
    nodes, weights = unit_rule(order)
    assert weights.sum() == pytest.approx(1.0)
    degree = 2 * order - 1
    assert weights @ nodes**degree == pytest.approx(1.0 / (degree + 1))


def test_rules_are_read_only():
    nodes, _ = unit_rule(8)
    with pytest.raises(ValueError):
        nodes[0] = 0.0
    nodes, _ = midpoint_rule(10)
    assert nodes[0] == pytest.approx(0.05)


def test_composite_rule_spans_interval():
    nodes, weights = composite_rule(1.0, 3.0, panels=5, order=6)
    assert nodes.size == 30
    assert weights.sum() == pytest.approx(2.0)
    assert np.all((nodes > 1.0) & (nodes < 3.0))


def test_integrate_1d_oscillatory():
    estimate = integrate_1d(lambda x: np.cos(50 * x) * np.exp(-x), 0.0, 10.0, rtol=1e-10)
    exact = (1 + (50 * math.sin(500) - math.cos(500)) * math.exp(-10)) / (1 + 50**2)
    assert estimate.converged
    assert estimate.value == pytest.approx(exact, rel=1e-9)


def test_integrate_1d_cancelling_integral_converges():
    estimate = integrate_1d(np.sin, -2.0, 2.0)
    assert estimate.converged
    assert abs(estimate.value) < 1e-12


def test_integrate_1d_reports_nonconvergence():
    estimate = integrate_1d(lambda x: np.sign(x - 0.3), 0.0, 1.0, rtol=1e-14, max_panels=4)
    assert not estimate.converged
    assert estimate.error > 0
    assert integrate_1d(np.exp, 2.0, 2.0).value == 0.0


def test_simplex_slabs_volume():
    t = 1.7
    nodes, weights = unit_rule(10)
    volume = sum(float(np.sum(w)) for *_, w in simplex_slabs(t, nodes, weights, chunk=3))
    assert volume == pytest.approx(t**3 / 6)


def test_simplex_slabs_are_ordered():
    nodes, weights = unit_rule(6)
    for t1, t2, t3, _ in simplex_slabs(2.0, nodes, weights):
        assert np.all(t3 <= t2) and np.all(t2 <= t1) and np.all(t1 <= 2.0)


def test_simplex_polynomial_moment():
    # ∫ t1 t2 t3 over the ordered simplex of side t is t⁶/48
    t = 1.3
    nodes, weights = unit_rule(8)
    total = sum(float(np.sum(w * t1 * t2 * t3)) for t1, t2, t3, w in simplex_slabs(t, nodes, weights))
    assert total == pytest.approx(t**6 / 48)


def test_ladder():
    assert ladder(24, 128) == [24, 48, 96]
    assert ladder(32, 128) == [32, 64, 128]
    assert ladder(24) == [24, 48, 96, 192]


@pytest.mark.parametrize("start", [24, 100, 500, 1000])
def test_ladder_never_drops_below_start(start):
    rungs = ladder(start, 128)
    assert rungs[0] == start
    assert rungs[-1] >= 2 * start
    assert ladder(start)[-1] == 8 * start


def test_simplex_slabs_blocked_rows(monkeypatch):
    # small block budget forces u2 blocking; the moment must not change
    monkeypatch.setattr(quadrature, "SLAB_POINTS", 20)
    t = 1.3
    nodes, weights = unit_rule(8)
    blocks = list(simplex_slabs(t, nodes, weights))
    assert all(t3.size <= 24 for _, _, t3, _ in blocks)
    total = sum(float(np.sum(w * t1 * t2 * t3)) for t1, t2, t3, w in blocks)
    assert total == pytest.approx(t**6 / 48)
