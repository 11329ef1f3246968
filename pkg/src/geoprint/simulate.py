"""Discrete-clock replay of approach trajectories and print plans.

Robots move kinematically (no collision response). Every robot first follows
its straight approach line to its cell mean, arriving at the common time
``tf``, then walks its plan at ``v_print`` on PRINT segments and ``v_travel``
elsewhere. A pixel counts as printed once the robot center reaches it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .assignment import Fleet, Trajectory, check_clearance
from .clustering import color_for
from .errors import ClearanceError
from .pathplan import Mode, MotionPlan, bresenham
from .raster_io import PhysicalScale, format_ppm


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1
    frame_stride: int = 1
    proximity_threshold: float | None = None  # None -> 2r

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.frame_stride < 1:
            raise ValueError("frame_stride must be >= 1")
        if self.proximity_threshold is not None and not self.proximity_threshold > 0:
            raise ValueError("proximity_threshold must be > 0")


@dataclass
class ProximityEvent:
    t: float  # time of closest approach within the interval
    i: int
    j: int
    d: float
    t_start: float
    t_end: float

    def as_dict(self):
        return {"t": self.t, "i": self.i, "j": self.j, "d": self.d,
                "t_start": self.t_start, "t_end": self.t_end}


@dataclass
class WorldState:
    t: float
    width: int
    height: int
    radius: float
    positions: np.ndarray  # (N, 2)
    printed: np.ndarray  # (P, 2) int (col, row)
    paths: list[list[tuple[float, float]]] = field(default_factory=list)


@dataclass
class SimOutcome:
    makespan: float
    completion: list[float]
    analytic_completion: list[float]
    events: list[ProximityEvent]
    frames: list[bytes]
    frame_times: list[float]
    printed_per_frame: list[int]
    printed_pixels: list[tuple[int, int]]  # every print action in time order (repeats kept)
    steps: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "makespan": self.makespan,
                "completion": self.completion,
                "analytic_completion": self.analytic_completion,
                "events": [e.as_dict() for e in self.events],
                "frames": len(self.frames),
                "steps": self.steps,
            },
            indent=1,
        )


class _Timeline:
    """Piecewise-linear position knots plus timed print actions for one robot."""

    def __init__(self, traj: Trajectory, plan: MotionPlan, v_print: float,
                 v_travel: float, pitch: float):
        self.times = [traj.t0, traj.tf]
        self.xy = [traj.start, traj.end]
        self.prints: list[tuple[float, tuple[int, int]]] = []
        t = traj.tf
        for seg in plan.segments:
            v = v_print if seg.mode is Mode.PRINT else v_travel
            poly = seg.polyline
            self.times.append(t)
            self.xy.append(tuple(map(float, poly[0])))
            t0_seg = t
            for p, q in zip(poly[:-1], poly[1:]):
                t += math.dist(p, q) * pitch / v
                self.times.append(t)
                self.xy.append(tuple(map(float, q)))
            if seg.mode is Mode.PRINT:
                a = seg.start
                for px in seg.pixels():
                    self.prints.append((t0_seg + math.dist(a, px) * pitch / v, px))
        self.end_time = t
        self.t_arr = np.asarray(self.times)
        self.xy_arr = np.asarray(self.xy, dtype=float)

    def positions(self, ts: np.ndarray) -> np.ndarray:
        x = np.interp(ts, self.t_arr, self.xy_arr[:, 0])
        y = np.interp(ts, self.t_arr, self.xy_arr[:, 1])
        return np.stack([x, y], axis=1)


def proximity_events(times: np.ndarray, positions: np.ndarray, threshold: float) -> list[ProximityEvent]:
    """Intervals where a pair of centers is closer than ``threshold``.

    ``positions`` has shape ``(S, N, 2)`` sampled at ``times``. One event per
    contiguous run of close samples, reporting the closest sample of the run.
    """
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    times = np.asarray(times, dtype=float)
    pos = np.asarray(positions, dtype=float)
    n = pos.shape[1]
    events = []
    for i in range(n):
        for j in range(i + 1, n):
            d = np.linalg.norm(pos[:, i] - pos[:, j], axis=1)
            close = d < threshold
            if not close.any():
                continue
            edges = np.diff(np.concatenate(([0], close.astype(np.int8), [0])))
            for s, e in zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)):
                k = s + int(np.argmin(d[s:e]))
                events.append(ProximityEvent(float(times[k]), i, j, float(d[k]),
                                             float(times[s]), float(times[e - 1])))
    events.sort(key=lambda ev: (ev.t_start, ev.i, ev.j))
    return events


def _disc(cx: float, cy: float, r: float):
    lo_x, hi_x = int(math.floor(cx - r)), int(math.ceil(cx + r))
    lo_y, hi_y = int(math.floor(cy - r)), int(math.ceil(cy + r))
    for yy in range(lo_y, hi_y + 1):
        for xx in range(lo_x, hi_x + 1):
            if (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r:
                yield xx, yy


def render_frame(state: WorldState) -> np.ndarray:
    """RGB frame: trajectories as colored lines, robots as filled discs, ink in black.

    Ink is drawn last so the count of black pixels equals the printed count.
    """
    w, h = state.width, state.height
    img = np.full((h, w, 3), 255, dtype=np.uint8)

    def put(x, y, color):
        if 0 <= x < w and 0 <= y < h:
            img[y, x] = color

    for k, path in enumerate(state.paths):
        light = tuple(int(255 - (255 - c) * 0.45) for c in color_for(k))
        for p, q in zip(path[:-1], path[1:]):
            for x, y in bresenham((round(p[0]), round(p[1])), (round(q[0]), round(q[1]))):
                put(x, y, light)
    for k, (cx, cy) in enumerate(np.asarray(state.positions).reshape(-1, 2)):
        for x, y in _disc(cx, cy, state.radius):
            put(x, y, color_for(k))
    pr = np.asarray(state.printed, dtype=np.int64).reshape(-1, 2)
    if len(pr):
        keep = (pr[:, 0] >= 0) & (pr[:, 0] < w) & (pr[:, 1] >= 0) & (pr[:, 1] < h)
        pr = pr[keep]
        img[pr[:, 1], pr[:, 0]] = 0
    return img


def canvas_size(width: int, height: int, fleet: Fleet | None) -> tuple[int, int]:
    """Raster extent grown to contain every robot start disc."""
    if fleet is None:
        return width, height
    r = fleet.radius
    s = fleet.starts
    w = max(width, int(math.ceil(s[:, 0].max() + r)) + 1)
    h = max(height, int(math.ceil(s[:, 1].max() + r)) + 1)
    return w, h


def simulate(fleet: Fleet, trajectories: Sequence[Trajectory], plans: Sequence[MotionPlan],
             config: SimConfig, scale: PhysicalScale = PhysicalScale(1.0),
             raster_size: tuple[int, int] | None = None, render: bool = True,
             force: bool = False,
             on_frame: Callable[[int, float, bytes], None] | None = None) -> SimOutcome:
    """Replay the whole job on the clock ``t_k = k * dt`` until every plan is done.

    ``plans[i]`` and ``trajectories[i]`` belong to ``fleet[i]``. Frames are P3
    PPM bytes, taken every ``frame_stride`` steps plus the final step.
    """
    if len(trajectories) != len(fleet) or len(plans) != len(fleet):
        raise ValueError(
            f"fleet has {len(fleet)} robots, got {len(trajectories)} trajectories "
            f"and {len(plans)} plans"
        )
    if not force and not check_clearance(fleet)[0]:
        raise ClearanceError("start positions violate the clearance bound; pass force=True to override")

    lines = [
        _Timeline(tr, pl, rb.v_print, rb.v_travel, scale.pitch)
        for tr, pl, rb in zip(trajectories, plans, fleet)
    ]
    analytic = [ln.end_time for ln in lines]
    dt = config.dt
    steps = max(0, int(math.ceil(max(analytic) / dt - 1e-9)))
    ts = np.arange(steps + 1) * dt
    pos = np.stack([ln.positions(ts) for ln in lines], axis=1)  # (S, N, 2)

    completion = []
    for end in analytic:
        k = int(np.searchsorted(ts, end - 1e-9 * max(1.0, end), side="left"))
        completion.append(float(ts[min(k, steps)]))

    thr = config.proximity_threshold or 2.0 * fleet.radius
    events = proximity_events(ts, pos, thr)

    prints = sorted(
        ((t, px) for ln in lines for t, px in ln.prints), key=lambda e: e[0]
    )
    print_t = np.array([p[0] for p in prints]) if prints else np.zeros(0)
    print_px = np.array([p[1] for p in prints], dtype=np.int64).reshape(-1, 2)
    # step index at which each print action is first visible on the clock
    print_step = np.ceil(print_t / dt - 1e-9).astype(np.int64) if len(prints) else print_t

    frames: list[bytes] = []
    frame_times: list[float] = []
    printed_counts: list[int] = []
    frame_steps = list(range(0, steps + 1, config.frame_stride))
    if frame_steps[-1] != steps:
        frame_steps.append(steps)
    if raster_size is None:
        raster_size = (0, 0)
    cw, ch = canvas_size(raster_size[0], raster_size[1], fleet)
    approach_paths = [[tr.start, tr.end] for tr in trajectories]
    for k in frame_steps:
        done = print_step <= k
        printed_counts.append(int(done.sum()))
        frame_times.append(float(ts[k]))
        if not render:
            continue
        paths = []
        for ln, ap in zip(lines, approach_paths):
            upto = ln.t_arr <= ts[k]
            trail = [tuple(p) for p in ln.xy_arr[upto]] + [tuple(ln.positions(ts[k:k + 1])[0])]
            paths.append(ap + trail[2:] if len(trail) > 2 else ap)
        state = WorldState(float(ts[k]), cw, ch, fleet.radius, pos[k], print_px[done], paths)
        data = format_ppm(render_frame(state))
        frames.append(data)
        if on_frame is not None:
            on_frame(len(frames) - 1, float(ts[k]), data)

    return SimOutcome(
        makespan=max(completion),
        completion=completion,
        analytic_completion=analytic,
        events=events,
        frames=frames,
        frame_times=frame_times,
        printed_per_frame=printed_counts,
        printed_pixels=[tuple(map(int, p)) for p in print_px],
        steps=steps,
    )


def write_frames(frames: Sequence[bytes], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, data in enumerate(frames):
        p = out / f"frame_{k:05d}.ppm"
        p.write_bytes(data)
        paths.append(p)
    return paths
