"""Balanced k-means ("geodesic cells") over the printable pixels of a raster.

Each Lloyd iteration solves the membership step exactly: minimize the summed
half squared distance to the cluster means subject to every cluster holding at
least ``floor(M / N)`` points. The step is a min-cost flow; because ``N`` is
small we run successive shortest paths on the N-node cluster graph, starting
from the unconstrained nearest-mean assignment and pulling points into
deficient clusters along cheapest chains of single-point moves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyImageError, InfeasibleError
from .raster_io import BinaryRaster, PixelPoint, printable_coords
from .rng import SplitMix64


@dataclass(frozen=True)
class ClusterConfig:
    n_cells: int
    rng_seed: int = 0
    max_iterations: int = 100
    mean_tolerance: float = 1e-6

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.mean_tolerance > 0:
            raise ValueError("mean_tolerance must be > 0")


@dataclass
class GeodesicCells:
    points: np.ndarray  # (M, 2) int, row-major printable pixels
    means: np.ndarray  # (N, 2) float
    assignment: np.ndarray  # (M,) int cluster index per point
    cost_history: list[float] = field(default_factory=list)
    iterations_run: int = 0

    @property
    def n(self) -> int:
        return len(self.means)

    @property
    def cells(self) -> list[list[PixelPoint]]:
        out: list[list[PixelPoint]] = [[] for _ in range(self.n)]
        for (c, r), k in zip(self.points.tolist(), self.assignment.tolist()):
            out[k].append(PixelPoint(c, r))
        return out

    def cell_coords(self, k: int) -> np.ndarray:
        return self.points[self.assignment == k]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "means": self.means.tolist(),
                "assignment": self.assignment.tolist(),
                "cost_history": list(self.cost_history),
                "iterations": self.iterations_run,
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str, raster: BinaryRaster) -> "GeodesicCells":
        d = json.loads(text)
        pts = printable_coords(raster)
        assignment = np.asarray(d["assignment"], dtype=np.int64)
        if assignment.shape != (len(pts),):
            raise ValueError("assignment length does not match the raster's printable pixels")
        return cls(
            points=pts,
            means=np.asarray(d["means"], dtype=float).reshape(-1, 2),
            assignment=assignment,
            cost_history=[float(v) for v in d.get("cost_history", [])],
            iterations_run=int(d.get("iterations", 0)),
        )


def _as_coords(points: Sequence[PixelPoint] | np.ndarray) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return points.reshape(-1, 2)
    return np.array([p.pos for p in points], dtype=np.int64).reshape(-1, 2)


def half_sq_costs(points: np.ndarray, means: np.ndarray) -> np.ndarray:
    """``(M, N)`` matrix of ``0.5 * |x_m - mu_n|^2``."""
    x = np.asarray(points, dtype=float)
    mu = np.asarray(means, dtype=float)
    d = x[:, None, :] - mu[None, :, :]
    return 0.5 * np.einsum("mnk,mnk->mn", d, d)


def clustering_cost(points, assignment, means) -> float:
    x = np.asarray(points, dtype=float)
    d = x - np.asarray(means, dtype=float)[assignment]
    return float(0.5 * np.einsum("mk,mk->", d, d))


def seed_kmeanspp(points, n: int, rng_seed: int) -> np.ndarray:
    """k-means++ seeding over integer pixel coordinates.

    The first mean is uniform over the points; each later one is drawn with
    probability proportional to the squared distance to the nearest chosen
    mean. Squared distances are exact integers, so the draw is an integer
    ``r`` in ``[0, total)`` and the pick is the lowest index whose cumulative
    weight exceeds ``r``.
    """
    x = _as_coords(points).astype(np.int64)
    m = len(x)
    if m == 0:
        raise InfeasibleError("cannot seed from an empty point set")
    if n > m:
        raise InfeasibleError(f"requested {n} means from only {m} points")
    rng = SplitMix64(rng_seed)
    chosen = [rng.below(m)]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, n):
        cum = np.cumsum(d2)
        total = int(cum[-1])
        r = rng.below(total)
        k = int(np.searchsorted(cum, r, side="right"))
        chosen.append(k)
        d2 = np.minimum(d2, ((x - x[k]) ** 2).sum(axis=1))
    return x[chosen].astype(float)


def _move_arcs(cost: np.ndarray, assignment: np.ndarray, n: int):
    """Cheapest single-point move between every ordered cluster pair.

    Returns ``(arc, who)`` with ``arc[a, b]`` the minimum of
    ``cost[p, b] - cost[p, a]`` over points ``p`` in ``a`` and ``who[a, b]`` the
    lowest-index point attaining it.
    """
    cur = cost[np.arange(len(cost)), assignment]
    arc = np.full((n, n), np.inf)
    who = np.full((n, n), -1, dtype=np.int64)
    for a in range(n):
        idx = np.flatnonzero(assignment == a)
        if idx.size == 0:
            continue
        delta = cost[idx] - cur[idx, None]
        j = np.argmin(delta, axis=0)
        arc[a] = delta[j, np.arange(n)]
        who[a] = idx[j]
        arc[a, a] = np.inf
    return arc, who


def assign_balanced(points, means) -> np.ndarray:
    """Exact membership step under the lower bound ``|cell_n| >= floor(M/N)``.

    Ties resolve toward the lowest cluster index (initial nearest-mean pick,
    path choice and target choice) and the lowest point index (which point
    moves along an arc).
    """
    x = _as_coords(points)
    mu = np.asarray(means, dtype=float).reshape(-1, 2)
    m, n = len(x), len(mu)
    if m < n:
        raise InfeasibleError(f"{m} points cannot fill {n} clusters")
    cost = half_sq_costs(x, mu)
    lower = m // n
    assignment = np.argmin(cost, axis=1).astype(np.int64)
    counts = np.bincount(assignment, minlength=n)

    while (counts < lower).any():
        arc, who = _move_arcs(cost, assignment, n)
        dist = np.where(counts > lower, 0.0, np.inf)
        pred = np.full(n, -1, dtype=np.int64)
        # Bellman-Ford; residual graph has no negative cycles between augmentations.
        for _ in range(n):
            changed = False
            for a in range(n):
                if not np.isfinite(dist[a]):
                    continue
                cand = dist[a] + arc[a]
                better = cand < dist
                if better.any():
                    for b in np.flatnonzero(better):
                        dist[b] = cand[b]
                        pred[b] = a
                    changed = True
            if not changed:
                break
        deficit = np.flatnonzero(counts < lower)
        reach = deficit[np.isfinite(dist[deficit])]
        if reach.size == 0:  # pragma: no cover - impossible when m >= n
            raise InfeasibleError("balanced assignment has no feasible augmentation")
        target = int(reach[np.argmin(dist[reach])])

        path = [target]
        seen = {target}
        while pred[path[-1]] != -1:
            prev = int(pred[path[-1]])
            if prev in seen:  # numerical near-zero cycle; stop at the repeat
                break
            seen.add(prev)
            path.append(prev)
        path.reverse()
        for a, b in zip(path[:-1], path[1:]):
            assignment[who[a, b]] = b
        counts[path[0]] -= 1
        counts[path[-1]] += 1

    return assignment


def update_means(points, assignment, previous_means) -> np.ndarray:
    """Centroid of each cluster; an empty cluster keeps its previous mean."""
    x = _as_coords(points).astype(float)
    prev = np.asarray(previous_means, dtype=float).reshape(-1, 2)
    n = len(prev)
    assignment = np.asarray(assignment)
    counts = np.bincount(assignment, minlength=n).astype(float)
    sums = np.zeros((n, 2))
    np.add.at(sums, assignment, x)
    out = prev.copy()
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz, None]
    return out


def cluster_points(points: np.ndarray, config: ClusterConfig) -> GeodesicCells:
    x = _as_coords(points)
    if len(x) == 0:
        raise EmptyImageError("image has no printable pixels")
    if len(x) < config.n_cells:
        raise InfeasibleError(
            f"{len(x)} printable pixels cannot fill {config.n_cells} cells"
        )
    means = seed_kmeanspp(x, config.n_cells, config.rng_seed)
    history: list[float] = []
    assignment = None
    it = 0
    for it in range(1, config.max_iterations + 1):
        assignment = assign_balanced(x, means)
        new_means = update_means(x, assignment, means)
        history.append(clustering_cost(x, assignment, new_means))
        shift = float(np.max(np.linalg.norm(new_means - means, axis=1)))
        means = new_means
        if shift < config.mean_tolerance:
            break
    return GeodesicCells(
        points=x.astype(np.int64),
        means=means,
        assignment=assignment,
        cost_history=history,
        iterations_run=it,
    )


def cluster(raster: BinaryRaster, config: ClusterConfig) -> GeodesicCells:
    """Partition the printable pixels of ``raster`` into ``config.n_cells`` cells."""
    return cluster_points(printable_coords(raster), config)


PALETTE = [
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207),
]


def color_for(k: int) -> tuple[int, int, int]:
    if k < len(PALETTE):
        return PALETTE[k]
    # deterministic extra colors past the base palette
    return ((k * 97) % 200 + 30, (k * 57) % 200 + 30, (k * 31) % 200 + 30)


def render_cells(raster: BinaryRaster, cells: GeodesicCells) -> np.ndarray:
    """RGB image: each cell a flat color on white, means marked with a black cross."""
    img = np.full((raster.height, raster.width, 3), 255, dtype=np.uint8)
    for k in range(cells.n):
        pts = cells.cell_coords(k)
        img[pts[:, 1], pts[:, 0]] = color_for(k)
    for mx, my in cells.means:
        c, r = int(round(mx)), int(round(my))
        for dc, dr in ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)):
            cc, rr = c + dc, r + dr
            if 0 <= cc < raster.width and 0 <= rr < raster.height:
                img[rr, cc] = (0, 0, 0)
    return img
