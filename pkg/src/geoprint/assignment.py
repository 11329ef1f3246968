"""Robot-to-cell assignment, straight-line approach trajectories, clearance checks.

Minimizing the integral of squared velocity over simultaneous straight-line
motions reduces to a linear assignment on squared start-to-goal distances,
solved here with the O(N^3) Hungarian method. If every pair of starts and
every pair of goals is separated by more than ``2*sqrt(2)*r``, the resulting
trajectories keep robot centers more than ``2r`` apart for the whole motion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class RobotSpec:
    id: int
    radius: float
    start: tuple[float, float]
    v_print: float
    v_travel: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"robot {self.id}: radius must be > 0")
        if not 0 < self.v_print <= self.v_travel:
            raise ValueError(
                f"robot {self.id}: need 0 < v_print <= v_travel, "
                f"got {self.v_print}, {self.v_travel}"
            )
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))


class Fleet:
    """Homogeneous team: unique ids, one shared radius."""

    def __init__(self, robots: Sequence[RobotSpec]):
        robots = list(robots)
        if not robots:
            raise ValueError("fleet is empty")
        ids = [r.id for r in robots]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate robot ids: {ids}")
        radii = {r.radius for r in robots}
        if len(radii) != 1:
            raise ValueError(f"heterogeneous radii not supported: {sorted(radii)}")
        self.robots = robots

    @classmethod
    def uniform(cls, starts, radius: float, v_print: float, v_travel: float) -> "Fleet":
        return cls(
            [RobotSpec(i, radius, tuple(s), v_print, v_travel) for i, s in enumerate(starts)]
        )

    def __len__(self):
        return len(self.robots)

    def __iter__(self):
        return iter(self.robots)

    def __getitem__(self, i) -> RobotSpec:
        return self.robots[i]

    @property
    def radius(self) -> float:
        return self.robots[0].radius

    @property
    def starts(self) -> np.ndarray:
        return np.array([r.start for r in self.robots], dtype=float)


@dataclass
class AssignmentResult:
    perm: list[int]  # robot i -> cell perm[i]
    total_sq_cost: float
    clearance_ok: bool = True
    t0: float = 0.0
    tf: float = 1.0

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"perm is not a bijection: {self.perm}")

    def matrix(self) -> np.ndarray:
        """Dense 0/1 assignment matrix ``phi`` (rows robots, columns cells)."""
        n = len(self.perm)
        phi = np.zeros((n, n), dtype=int)
        phi[np.arange(n), self.perm] = 1
        return phi

    def to_json(self) -> str:
        return json.dumps(
            {
                "perm": list(self.perm),
                "total_sq_cost": self.total_sq_cost,
                "clearance_ok": self.clearance_ok,
                "t0": self.t0,
                "tf": self.tf,
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "AssignmentResult":
        d = json.loads(text)
        return cls(
            perm=[int(v) for v in d["perm"]],
            total_sq_cost=float(d["total_sq_cost"]),
            clearance_ok=bool(d["clearance_ok"]),
            t0=float(d["t0"]),
            tf=float(d["tf"]),
        )


@dataclass(frozen=True)
class Trajectory:
    start: tuple[float, float]
    end: tuple[float, float]
    t0: float
    tf: float

    def position(self, t):
        """Constant-velocity blend; clamps outside ``[t0, tf]``. Accepts scalar or array ``t``."""
        s = np.clip((np.asarray(t, dtype=float) - self.t0) / (self.tf - self.t0), 0.0, 1.0)
        a = np.asarray(self.start, dtype=float)
        b = np.asarray(self.end, dtype=float)
        s = s[..., None]
        # exact endpoints: (1-s)*a + s*b is a at s=0 and b at s=1
        return (1.0 - s) * a + s * b

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)


def cost_matrix(fleet: Fleet, means) -> np.ndarray:
    """``C[i, j] = |x_i(0) - mu_j|^2``."""
    mu = np.asarray(getattr(means, "means", means), dtype=float).reshape(-1, 2)
    if len(mu) != len(fleet):
        raise ValueError(f"{len(fleet)} robots but {len(mu)} cells")
    d = fleet.starts[:, None, :] - mu[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def hungarian(cost) -> tuple[list[int], list[float], list[float]]:
    """Minimum-cost perfect matching on a square matrix.

    Returns ``(perm, u, v)`` with row potentials ``u`` and column potentials
    ``v`` such that ``cost[i][j] - u[i] - v[j] >= 0`` with equality on the
    matched pairs.
    """
    c = np.asarray(cost, dtype=float).tolist()
    n = len(c)
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = row (1-based) assigned to column j
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            row = c[i0 - 1]
            ui0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    perm = [0] * n
    for j in range(1, n + 1):
        perm[match[j] - 1] = j - 1
    return perm, u[1:], v[1:]


def _has_perfect_matching(adj: list[list[int]], rows: list[int], free_cols: set[int]) -> bool:
    owner: dict[int, int] = {}

    def augment(r: int, seen: set[int]) -> bool:
        for col in adj[r]:
            if col in free_cols and col not in seen:
                seen.add(col)
                if col not in owner or augment(owner[col], seen):
                    owner[col] = r
                    return True
        return False

    return all(augment(r, set()) for r in rows)


def solve_assignment(cost, t0: float = 0.0, tf: float = 1.0) -> AssignmentResult:
    """Optimal permutation; among optimal ones, the lexicographically smallest.

    Ties are resolved on the tight (zero reduced cost) subgraph of the final
    Hungarian potentials: row by row, take the lowest column that still leaves
    a perfect matching of tight edges.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix has non-finite entries")
    if (c < 0).any():
        raise ValueError("cost matrix has negative entries")
    n = len(c)
    if n == 0:
        return AssignmentResult([], 0.0, True, t0, tf)
    perm, u, v = hungarian(c)
    tol = 1e-9 * max(1.0, float(np.abs(c).max()))
    reduced = c - np.asarray(u)[:, None] - np.asarray(v)[None, :]
    adj = [sorted(np.flatnonzero(reduced[i] <= tol).tolist()) for i in range(n)]

    chosen: list[int] = []
    free = set(range(n))
    for i in range(n):
        for j in adj[i]:
            if j not in free:
                continue
            free.discard(j)
            if _has_perfect_matching(adj, list(range(i + 1, n)), free):
                chosen.append(j)
                break
            free.add(j)
        else:  # pragma: no cover - tolerance failure; fall back to Hungarian's own answer
            chosen = perm
            break
    total = float(c[np.arange(n), chosen].sum())
    return AssignmentResult(list(chosen), total, True, t0, tf)


def check_clearance(fleet: Fleet):
    """``(ok, pair, distance)``: ok iff every start pair is farther than ``2*sqrt(2)*r``.

    ``pair`` and ``distance`` describe the closest pair (``None`` for one robot).
    """
    starts = fleet.starts
    n = len(starts)
    if n < 2:
        return True, None, math.inf
    d = np.linalg.norm(starts[:, None, :] - starts[None, :, :], axis=2)
    d[np.diag_indices(n)] = np.inf
    flat = int(np.argmin(d))
    i, j = divmod(flat, n)
    dmin = float(d[i, j])
    bound = 2.0 * math.sqrt(2.0) * fleet.radius
    return dmin > bound, (min(i, j), max(i, j)), dmin


def check_goal_clearance(means, radius: float):
    """Same separation test applied to the goals (cell means).

    The straight-line collision guarantee needs both starts and goals separated
    by more than ``2*sqrt(2)*r``; start separation alone is not sufficient.
    """
    mu = np.asarray(getattr(means, "means", means), dtype=float).reshape(-1, 2)
    n = len(mu)
    if n < 2:
        return True, None, math.inf
    d = np.linalg.norm(mu[:, None, :] - mu[None, :, :], axis=2)
    d[np.diag_indices(n)] = np.inf
    i, j = divmod(int(np.argmin(d)), n)
    return float(d[i, j]) > 2.0 * math.sqrt(2.0) * radius, (min(i, j), max(i, j)), float(d[i, j])


def approach_tf(fleet: Fleet, means, perm, pitch: float = 1.0, t0: float = 0.0) -> float:
    """Arrival time so that the longest approach runs at full travel speed."""
    mu = np.asarray(means, dtype=float)
    dist = np.linalg.norm(fleet.starts - mu[list(perm)], axis=1)
    v = min(r.v_travel for r in fleet)
    return t0 + max(float(dist.max()) * pitch / v, 1e-9)


def assign_cells(fleet: Fleet, means, pitch: float = 1.0) -> AssignmentResult:
    """Cost matrix, Hungarian solve, clearance verdict and approach timing in one call."""
    mu = np.asarray(getattr(means, "means", means), dtype=float)
    res = solve_assignment(cost_matrix(fleet, mu))
    res.clearance_ok = check_clearance(fleet)[0]
    res.t0 = 0.0
    res.tf = approach_tf(fleet, mu, res.perm, pitch)
    return res


def make_trajectories(fleet: Fleet, means, result: AssignmentResult) -> list[Trajectory]:
    if result.tf <= result.t0:
        raise ValueError(f"tf ({result.tf}) must exceed t0 ({result.t0})")
    mu = np.asarray(getattr(means, "means", means), dtype=float)
    if len(mu) != len(fleet) or len(result.perm) != len(fleet):
        raise ValueError("assignment does not match fleet/cells")
    return [
        Trajectory(robot.start, tuple(mu[result.perm[i]].tolist()), result.t0, result.tf)
        for i, robot in enumerate(fleet)
    ]


def min_separation(trajs: Sequence[Trajectory], samples: int = 1000) -> float:
    """Smallest pairwise center distance over ``samples`` common time points."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if not trajs:
        return math.inf
    t0, tf = trajs[0].t0, trajs[0].tf
    for tr in trajs:
        if tr.t0 != t0 or tr.tf != tf:
            raise ValueError("trajectories must share the same [t0, tf]")
    if len(trajs) < 2:
        return math.inf
    ts = np.linspace(t0, tf, samples)
    pos = np.stack([tr.position(ts) for tr in trajs], axis=1)  # (S, N, 2)
    n = len(trajs)
    iu, ju = np.triu_indices(n, 1)
    d = np.linalg.norm(pos[:, iu, :] - pos[:, ju, :], axis=2)
    return float(d.min())


def distance_sums(cost_sq) -> dict[str, float]:
    """Plain-distance totals of the squared-cost optimum vs. the plain-distance optimum."""
    c2 = np.asarray(cost_sq, dtype=float)
    c1 = np.sqrt(c2)
    sq = solve_assignment(c2).perm
    lin = solve_assignment(c1).perm
    idx = np.arange(len(c2))
    return {
        "squared_opt_distance_sum": float(c1[idx, sq].sum()),
        "linear_opt_distance_sum": float(c1[idx, lin].sum()),
        "squared_opt_sq_sum": float(c2[idx, sq].sum()),
        "linear_opt_sq_sum": float(c2[idx, lin].sum()),
    }
