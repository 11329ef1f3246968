"""Independent brute-force references used by the tests.

Nothing here imports the solver code paths it checks.
"""

import itertools
import math

import numpy as np


def balanced_optimum(points, means):
    """Exhaustive minimum of the half squared-distance objective over memberships
    with every cluster holding at least floor(M/N) points.

    Returns ``(best_value, optimal_memberships)``.
    """
    x = np.asarray(points, dtype=float)
    mu = np.asarray(means, dtype=float)
    m, n = len(x), len(mu)
    c = np.array([[0.5 * ((x[i] - mu[k]) ** 2).sum() for k in range(n)] for i in range(m)])
    lower = m // n
    allm = np.array(list(itertools.product(range(n), repeat=m)), dtype=np.int64).reshape(-1, m)
    counts = np.stack([(allm == k).sum(axis=1) for k in range(n)], axis=1)
    ok = (counts >= lower).all(axis=1)
    feas = allm[ok]
    vals = c[np.arange(m), feas].sum(axis=1)
    best = vals.min()
    return float(best), [tuple(r) for r in feas[np.isclose(vals, best, rtol=0, atol=1e-9)]]


def permutation_optimum(cost):
    """``(min_cost, lexicographically smallest optimal permutation)`` by enumeration."""
    c = np.asarray(cost, dtype=float)
    n = len(c)
    best, best_p = math.inf, None
    for p in itertools.permutations(range(n)):
        v = float(sum(c[i, p[i]] for i in range(n)))
        if v < best - 1e-9:
            best, best_p = v, p
    return best, list(best_p)


def nearest_cell_line(a, b):
    """Grid line by rounding the ideal line at every driving-axis step (ties round up
    in the direction of travel). The reference Bresenham must match this."""
    (x1, y1), (x2, y2) = a, b
    dx, dy = x2 - x1, y2 - y1
    n = max(abs(dx), abs(dy))
    if n == 0:
        return [(x1, y1)]
    pts = []
    for k in range(n + 1):
        fx = x1 + dx * k / n
        fy = y1 + dy * k / n
        pts.append((_round_away(fx, x1, dx), _round_away(fy, y1, dy)))
    return pts


def _round_away(v, origin, delta):
    # exact halves move away from the origin, along the travel direction
    s = 1 if delta >= 0 else -1
    off = (v - origin) * s
    return origin + s * math.floor(off + 0.5 + 1e-12)


def best_linear_split_cost(points, sizes_lower, angles=1440):
    """Minimum 2-cluster half-SSE over all direction sweeps (linearly separable splits)
    where both sides hold at least ``sizes_lower`` points."""
    x = np.asarray(points, dtype=float)
    m = len(x)
    best = math.inf
    for th in np.linspace(0, np.pi, angles, endpoint=False):
        proj = x @ np.array([np.cos(th), np.sin(th)])
        order = np.argsort(proj, kind="stable")
        for k in range(sizes_lower, m - sizes_lower + 1):
            a, b = x[order[:k]], x[order[k:]]
            v = 0.5 * (((a - a.mean(0)) ** 2).sum() + ((b - b.mean(0)) ** 2).sum())
            best = min(best, v)
    return best
