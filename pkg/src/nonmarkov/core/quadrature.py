"""Gauss-Legendre rules for the coefficient integrals.

One-dimensional integrals use composite Gauss-Legendre with panel doubling.
Triple integrals over the ordered simplex 0 <= t3 <= t2 <= t1 <= t are mapped
to the unit cube by t1 = t*u1, t2 = t1*u2, t3 = t2*u3 (Jacobian t*t1*t2) and
integrated with a tensor-product rule, one u1-slab at a time to bound memory.
"""

from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

# Differences below this fraction of ∫|f| count as converged for integrals
# that cancel to (nearly) zero.
CANCELLATION_FLOOR = 1e-10

# Points per simplex block; bounds the memory of one integrand evaluation.
SLAB_POINTS = 1 << 18


class Estimate(NamedTuple):
    value: float
    error: float
    order: int
    converged: bool


@lru_cache(maxsize=64)
def unit_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    nodes, weights = leggauss(order)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=16)
def midpoint_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes and weights on [0, 1]."""
    nodes = (np.arange(n) + 0.5) / n
    weights = np.full(n, 1.0 / n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(a: float, b: float, panels: int, order: int = 16):
    x, w = unit_rule(order)
    edges = np.linspace(a, b, panels + 1)
    widths = np.diff(edges)
    nodes = (edges[:-1, None] + widths[:, None] * x).ravel()
    weights = (widths[:, None] * w).ravel()
    return nodes, weights


def integrate_1d(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    rtol: float = 1e-6,
    panels: int = 1,
    order: int = 16,
    max_panels: int = 1 << 16,
) -> Estimate:
    """Composite Gauss-Legendre on [a, b], doubling panels until two estimates agree.

    ``func`` must be vectorized. The returned ``order`` is the panel count of
    the accepted estimate.
    """
    if a == b:
        return Estimate(0.0, 0.0, 0, True)
    panels = max(1, panels)
    previous = None
    while True:
        nodes, weights = composite_rule(a, b, panels, order)
        values = func(nodes)
        value = float(weights @ values)
        scale = float(weights @ np.abs(values))
        if previous is not None:
            error = abs(value - previous)
            if error <= max(rtol * abs(value), CANCELLATION_FLOOR * scale):
                return Estimate(value, error, panels, True)
            if panels * 2 > max_panels:
                return Estimate(value, error, panels, False)
        previous = value
        panels *= 2


def simplex_slabs(
    t: float, nodes: np.ndarray, weights: np.ndarray, chunk: Optional[int] = None
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (t1, t2, t3, weight) broadcastable arrays covering the ordered simplex.

    Each block holds at most about SLAB_POINTS points unless ``chunk`` u1 rows
    are asked for explicitly.
    """
    n = len(nodes)
    rows = n
    if chunk is None:
        chunk = max(1, SLAB_POINTS // (n * n))
        if n * n > SLAB_POINTS:
            rows = max(1, SLAB_POINTS // n)
    u3 = nodes[None, None, :]
    w3 = weights[None, None, :]
    for start in range(0, n, chunk):
        u1 = nodes[start:start + chunk, None, None]
        w1 = weights[start:start + chunk, None, None]
        t1 = t * u1
        for row in range(0, n, rows):
            u2 = nodes[None, row:row + rows, None]
            w2 = weights[None, row:row + rows, None]
            t2 = t1 * u2
            t3 = t2 * u3
            yield t1, t2, t3, t * t1 * t2 * w1 * w2 * w3


def ladder(start: int, max_order: Optional[int] = None) -> list[int]:
    """Orders start, 2*start, ... up to the cap.

    The cap defaults to 8*start and is never below 2*start, so there are
    always at least two rungs and the first one is ``start``.
    """
    start = max(1, start)
    top = 8 * start if max_order is None else max(max_order, 2 * start)
    rungs = [start]
    while rungs[-1] * 2 <= top:
        rungs.append(rungs[-1] * 2)
    return rungs
