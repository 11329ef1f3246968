"""Serpentine raster plans per cell, Bresenham discretization, and the print-time model.

A robot's printing time is

    T = rho_print * pitch / v_print + (rho_travel + rho_break) * pitch / v_travel

with distances in pixels: ``rho_print`` along runs of the cell's own pixels,
``rho_travel`` across in-row gaps (plus the hop from the cell mean to the first
pixel), ``rho_break`` between consecutive rows along a Bresenham path.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .assignment import RobotSpec
from .raster_io import PhysicalScale

SQRT2 = math.sqrt(2.0)


class Mode(str, Enum):
    PRINT = "PRINT"
    TRAVEL = "TRAVEL"
    BREAK = "BREAK"


def bresenham(a: Sequence[int], b: Sequence[int]) -> list[tuple[int, int]]:
    """8-connected grid path from ``a`` to ``b`` inclusive.

    The axis with the larger extent drives (x on ties) and advances by one
    cell per step; the passive axis steps when the running error is >= 0,
    so exact half-cell ties step diagonally. All octants are reduced to the
    first by sign and axis normalization.
    """
    x1, y1 = int(a[0]), int(a[1])
    x2, y2 = int(b[0]), int(b[1])
    dx, dy = x2 - x1, y2 - y1
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    adx, ady = abs(dx), abs(dy)
    pts = []
    if adx >= ady:
        err = 2 * ady - adx
        y = y1
        for i in range(adx + 1):
            pts.append((x1 + sx * i, y))
            if err >= 0:
                y += sy
                err -= 2 * adx
            err += 2 * ady
    else:
        err = 2 * adx - ady
        x = x1
        for i in range(ady + 1):
            pts.append((x, y1 + sy * i))
            if err >= 0:
                x += sx
                err -= 2 * ady
            err += 2 * adx
    return pts


def path_length(points: Sequence[Sequence[float]]) -> float:
    return float(sum(math.dist(p, q) for p, q in zip(points[:-1], points[1:])))


def grid_path_length(a, b) -> float:
    """Length of the Bresenham path between two grid points (unit and diagonal steps)."""
    adx, ady = abs(int(b[0]) - int(a[0])), abs(int(b[1]) - int(a[1]))
    lo, hi = min(adx, ady), max(adx, ady)
    return lo * SQRT2 + (hi - lo)


@dataclass(frozen=True)
class MotionSegment:
    start: tuple[float, float]
    end: tuple[float, float]
    mode: Mode
    waypoints: tuple[tuple[float, float], ...] = ()

    @property
    def polyline(self) -> tuple[tuple[float, float], ...]:
        return self.waypoints if self.waypoints else (self.start, self.end)

    @property
    def length(self) -> float:
        return path_length(self.polyline)

    def pixels(self) -> list[tuple[int, int]]:
        """Pixels sprayed by a PRINT run (horizontal, endpoints inclusive)."""
        if self.mode is not Mode.PRINT:
            return []
        (c0, r), (c1, _) = self.start, self.end
        c0, c1, r = int(c0), int(c1), int(r)
        step = 1 if c1 >= c0 else -1
        return [(c, r) for c in range(c0, c1 + step, step)]


@dataclass
class MotionPlan:
    robot_id: int
    segments: list[MotionSegment] = field(default_factory=list)

    def totals(self) -> dict[Mode, float]:
        out = {m: 0.0 for m in Mode}
        for s in self.segments:
            out[s.mode] += s.length
        return out

    @property
    def rho_print(self) -> float:
        return self.totals()[Mode.PRINT]

    @property
    def rho_travel(self) -> float:
        return self.totals()[Mode.TRAVEL]

    @property
    def rho_break(self) -> float:
        return self.totals()[Mode.BREAK]

    @property
    def start(self):
        return self.segments[0].start if self.segments else None

    def printed_pixels(self) -> list[tuple[int, int]]:
        out = []
        for s in self.segments:
            out.extend(s.pixels())
        return out

    def has_print_distance(self) -> bool:
        return self.rho_print > 0


def _runs(cols: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers in a sorted array, as ``(first, last)``."""
    if cols.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(cols) != 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [cols.size - 1]))
    return [(int(cols[s]), int(cols[e])) for s, e in zip(starts, ends)]


def serpentine_plan(cell, robot_id: int = 0, entry: Sequence[float] | None = None) -> MotionPlan:
    """Boustrophedon plan over the pixels of one cell.

    Rows go top to bottom; the first row runs left to right and direction
    alternates on every non-empty row. Only the span between a row's first
    and last cell pixel is traversed. With ``entry`` given (normally the cell
    mean), the plan opens with a straight TRAVEL hop from it to the first pixel.
    """
    pts = np.asarray(
        [p.pos for p in cell] if not isinstance(cell, np.ndarray) else cell, dtype=np.int64
    ).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("cannot plan an empty cell")
    order = np.lexsort((pts[:, 0], pts[:, 1]))
    pts = pts[order]
    rows = np.unique(pts[:, 1])

    segs: list[MotionSegment] = []
    prev_end: tuple[int, int] | None = None
    for k, r in enumerate(rows.tolist()):
        cols = pts[pts[:, 1] == r, 0]
        runs = _runs(cols)
        if k % 2 == 1:
            runs = [(b, a) for a, b in reversed(runs)]
        first = (runs[0][0], r)
        if prev_end is None:
            if entry is not None and tuple(entry) != first:
                e = (float(entry[0]), float(entry[1]))
                segs.append(MotionSegment(e, first, Mode.TRAVEL))
        else:
            wp = tuple(bresenham(prev_end, first))
            segs.append(MotionSegment(prev_end, first, Mode.BREAK, wp))
        for idx, (a, b) in enumerate(runs):
            if idx > 0:
                gap_from = (runs[idx - 1][1], r)
                segs.append(MotionSegment(gap_from, (a, r), Mode.TRAVEL))
            segs.append(MotionSegment((a, r), (b, r), Mode.PRINT))
        prev_end = (runs[-1][1], r)
    return MotionPlan(robot_id, segs)


def segment_time(seg: MotionSegment, spec: RobotSpec, scale: PhysicalScale) -> float:
    v = spec.v_print if seg.mode is Mode.PRINT else spec.v_travel
    return seg.length * scale.pitch / v


def printing_time(plan: MotionPlan, spec: RobotSpec, scale: PhysicalScale) -> float:
    t = plan.totals()
    return (
        t[Mode.PRINT] * scale.pitch / spec.v_print
        + (t[Mode.TRAVEL] + t[Mode.BREAK]) * scale.pitch / spec.v_travel
    )


def objective(times: Sequence[float]) -> float:
    """Product of times over their sum; larger means a more even split."""
    ts = [float(t) for t in times]
    if not ts:
        raise ValueError("no times given")
    if any(not t > 0 for t in ts):
        raise ValueError(f"all times must be > 0, got {ts}")
    return math.prod(ts) / math.fsum(ts)


@dataclass
class CostReport:
    robot_ids: list[int]
    approach_times: list[float]
    print_times: list[float]
    objective: float | None
    makespan: float
    flags: list[str] = field(default_factory=list)

    @property
    def flatness(self) -> float:
        return max(self.print_times) / min(self.print_times)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["robot_id", "approach_time", "T_i", "objective", "makespan"])
        for rid, a, t in zip(self.robot_ids, self.approach_times, self.print_times):
            w.writerow([rid, repr(a), repr(t), "", ""])
        obj = "" if self.objective is None else repr(self.objective)
        w.writerow(["total", "", "", obj, repr(self.makespan)])
        return buf.getvalue()


def cost_report(plans: Sequence[MotionPlan], specs: Sequence[RobotSpec],
                approach_times: Sequence[float], scale: PhysicalScale) -> CostReport:
    times = [printing_time(p, s, scale) for p, s in zip(plans, specs)]
    flags = []
    for p in plans:
        if not p.has_print_distance():
            flags.append(f"robot {p.robot_id}: no print distance, time is travel only")
    try:
        obj = objective(times)
    except ValueError:
        obj = None
        flags.append("objective undefined: some T_i is zero")
    makespan = max(a + t for a, t in zip(approach_times, times))
    return CostReport([p.robot_id for p in plans], [float(a) for a in approach_times],
                      times, obj, makespan, flags)


def plans_to_csv(plans: Sequence[MotionPlan]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["robot_id", "seq", "mode", "x0", "y0", "x1", "y1", "length_px"])
    for p in plans:
        for k, s in enumerate(p.segments):
            w.writerow([p.robot_id, k, s.mode.value, repr(s.start[0]), repr(s.start[1]),
                        repr(s.end[0]), repr(s.end[1]), repr(s.length)])
    return buf.getvalue()


def _num(text: str):
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text else v


def plans_from_csv(text: str) -> list[MotionPlan]:
    """Inverse of :func:`plans_to_csv`; BREAK waypoints are regenerated with Bresenham."""
    plans: dict[int, MotionPlan] = {}
    for row in csv.DictReader(io.StringIO(text)):
        rid = int(row["robot_id"])
        mode = Mode(row["mode"])
        a = (_num(row["x0"]), _num(row["y0"]))
        b = (_num(row["x1"]), _num(row["y1"]))
        wp = tuple(bresenham(a, b)) if mode is Mode.BREAK else ()
        plans.setdefault(rid, MotionPlan(rid)).segments.append(MotionSegment(a, b, mode, wp))
    return [plans[k] for k in sorted(plans)]
