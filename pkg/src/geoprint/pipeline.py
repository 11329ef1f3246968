"""End-to-end orchestration: load -> cluster -> assign -> plan -> simulate -> report.

Every stage reads and writes plain files in one output directory so stages
can be run (and tested) separately:

    config.json      resolved PipelineConfig
    cells.json       cluster means, per-pixel assignment, cost history
    cells.ppm        cell visualization
    fleet.json       robot specs actually used
    assignment.json  robot -> cell permutation, approach timing, clearance verdict
    plan.csv         motion segments of every robot
    cost.csv         per-robot approach and printing times, objective, makespan
    outcome.json     simulator summary and proximity events
    frames/          P3 progress frames
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .assignment import (AssignmentResult, Fleet, RobotSpec, assign_cells, check_clearance,
                         check_goal_clearance, make_trajectories)
from .clustering import ClusterConfig, GeodesicCells, cluster, render_cells
from .errors import ClearanceError, InfeasibleError
from .pathplan import CostReport, MotionPlan, cost_report, plans_from_csv, plans_to_csv, serpentine_plan
from .raster_io import BinaryRaster, PhysicalScale, format_ppm, load_pbm, printable_coords
from .rng import SplitMix64
from .simulate import SimConfig, SimOutcome, simulate, write_frames

log = logging.getLogger(__name__)

MAX_START_ATTEMPTS = 10_000


@dataclass
class PipelineConfig:
    image: str | None = None
    n_robots: int = 5
    rng_seed: int = 0
    pitch: float = 1.0
    v_print: float = 5.0
    v_travel: float = 20.0
    radius: float = 1.5
    starts: list[list[float]] | None = None
    dt: float = 0.1
    out: str = "out"
    frame_stride: int = 50
    force: bool = False

    def __post_init__(self):
        for name in ("n_robots", "pitch", "v_print", "v_travel", "radius", "dt", "frame_stride"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.v_print > self.v_travel:
            raise ValueError("v_print must not exceed v_travel")
        if self.starts is not None:
            self.starts = [[float(x), float(y)] for x, y in self.starts]

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1, sort_keys=True)


def auto_starts(width: int, height: int, n: int, radius: float, seed: int) -> list[list[float]]:
    """Uniform random starts in a band below the image, redrawn until clearance holds."""
    rng = SplitMix64(seed ^ 0x5EED5EED)
    bound = 2.0 * math.sqrt(2.0) * radius
    top = height + 2.0 * radius
    band = max(height / 4.0, 2.0 * bound)
    lo_x, hi_x = radius, max(radius, width - 1 - radius)
    for _ in range(MAX_START_ATTEMPTS):
        pts = np.array([
            [lo_x + rng.uniform() * (hi_x - lo_x), top + rng.uniform() * band] for _ in range(n)
        ])
        if n < 2:
            return pts.tolist()
        d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
        d[np.diag_indices(n)] = np.inf
        if d.min() > bound:
            return pts.tolist()
    raise ClearanceError(f"no clearance-satisfying start layout after {MAX_START_ATTEMPTS} attempts")


def build_fleet(cfg: PipelineConfig, raster: BinaryRaster) -> Fleet:
    starts = cfg.starts
    if starts is None:
        starts = auto_starts(raster.width, raster.height, cfg.n_robots, cfg.radius, cfg.rng_seed)
    if len(starts) != cfg.n_robots:
        raise ValueError(f"{len(starts)} starts given for {cfg.n_robots} robots")
    return Fleet.uniform(starts, cfg.radius, cfg.v_print, cfg.v_travel)


def fleet_to_json(fleet: Fleet) -> str:
    return json.dumps(
        {"robots": [dataclasses.asdict(r) for r in fleet]}, indent=1
    )


def fleet_from_json(text: str) -> Fleet:
    d = json.loads(text)
    return Fleet([RobotSpec(r["id"], r["radius"], tuple(r["start"]), r["v_print"], r["v_travel"])
                  for r in d["robots"]])


def strip_partition(raster: BinaryRaster, n: int) -> GeodesicCells:
    """Naive comparison baseline: N equal-width vertical strips (not the GA of prior work)."""
    pts = printable_coords(raster)
    if len(pts) == 0:
        raise InfeasibleError("image has no printable pixels")
    assignment = (pts[:, 0] * n) // max(raster.width, 1)
    means = np.zeros((n, 2))
    for k in range(n):
        sel = pts[assignment == k]
        if len(sel):
            means[k] = sel.mean(axis=0)
        else:
            means[k] = ((k + 0.5) * raster.width / n - 0.5, (raster.height - 1) / 2)
    return GeodesicCells(points=pts, means=means, assignment=assignment.astype(np.int64))


def make_plans(cells: GeodesicCells, assignment: AssignmentResult) -> list[MotionPlan]:
    """Plan for robot ``i`` covers cell ``perm[i]``, entered from that cell's mean."""
    plans = []
    for i, k in enumerate(assignment.perm):
        pts = cells.cell_coords(k)
        if len(pts) == 0:
            plans.append(MotionPlan(i, []))
        else:
            plans.append(serpentine_plan(pts, robot_id=i, entry=tuple(cells.means[k].tolist())))
    return plans


def report_for(plans, fleet: Fleet, assignment: AssignmentResult, scale: PhysicalScale) -> CostReport:
    approach = [assignment.tf - assignment.t0] * len(fleet)
    return cost_report(plans, list(fleet), approach, scale)


@dataclass
class PipelineResult:
    raster: BinaryRaster
    cells: GeodesicCells
    fleet: Fleet
    assignment: AssignmentResult
    plans: list[MotionPlan]
    report: CostReport
    outcome: SimOutcome | None = None
    files: list[Path] = field(default_factory=list)


def plan_job(raster: BinaryRaster, cfg: PipelineConfig, cells: GeodesicCells | None = None) -> PipelineResult:
    """Everything up to the cost report, in memory."""
    if cells is None:
        cells = cluster(raster, ClusterConfig(cfg.n_robots, cfg.rng_seed))
    fleet = build_fleet(cfg, raster)
    scale = PhysicalScale(cfg.pitch)
    res = assign_cells(fleet, cells.means, scale.pitch)
    if not res.clearance_ok and not cfg.force:
        ok, pair, dmin = check_clearance(fleet)
        raise ClearanceError(f"robots {pair} start {dmin:.3f} apart, need > {2 * math.sqrt(2) * fleet.radius:.3f}")
    goals_ok, pair, dmin = check_goal_clearance(cells.means, fleet.radius)
    if not goals_ok:
        log.warning("cell means %s are only %.3f apart; approach collisions are not excluded", pair, dmin)
    plans = make_plans(cells, res)
    return PipelineResult(raster, cells, fleet, res, plans, report_for(plans, fleet, res, scale))


def run_simulation(job: PipelineResult, cfg: PipelineConfig, render: bool = True) -> SimOutcome:
    trajs = make_trajectories(job.fleet, job.cells.means, job.assignment)
    return simulate(job.fleet, trajs, job.plans, SimConfig(cfg.dt, cfg.frame_stride),
                    PhysicalScale(cfg.pitch), (job.raster.width, job.raster.height),
                    render=render, force=cfg.force)


def _write(path: Path, data: str | bytes, files: list[Path]) -> None:
    if isinstance(data, str):
        path.write_text(data)
    else:
        path.write_bytes(data)
    files.append(path)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    if cfg.image is None:
        raise ValueError("no image given")
    raster = load_pbm(cfg.image)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    _write(out / "config.json", cfg.to_json(), files)

    job = plan_job(raster, cfg)
    _write(out / "cells.json", job.cells.to_json(), files)
    _write(out / "cells.ppm", format_ppm(render_cells(raster, job.cells)), files)
    _write(out / "fleet.json", fleet_to_json(job.fleet), files)
    _write(out / "assignment.json", job.assignment.to_json(), files)
    _write(out / "plan.csv", plans_to_csv(job.plans), files)
    _write(out / "cost.csv", job.report.to_csv(), files)

    job.outcome = run_simulation(job, cfg)
    files.extend(write_frames(job.outcome.frames, out / "frames"))
    _write(out / "outcome.json", job.outcome.to_json(), files)
    log.info("pipeline done: makespan %.3f, objective %s", job.report.makespan, job.report.objective)
    job.files = files
    return job


def load_stage_inputs(out: Path, raster: BinaryRaster):
    """Read back whatever stage files exist in ``out`` (missing ones are ``None``)."""
    def maybe(name, fn):
        p = out / name
        return fn(p.read_text()) if p.exists() else None

    cells = maybe("cells.json", lambda t: GeodesicCells.from_json(t, raster))
    fleet = maybe("fleet.json", fleet_from_json)
    assignment = maybe("assignment.json", AssignmentResult.from_json)
    plans = maybe("plan.csv", plans_from_csv)
    return cells, fleet, assignment, plans


def pad_plans(plans: list[MotionPlan], n: int) -> list[MotionPlan]:
    """Plans indexed by robot id, with empty plans for robots absent from the CSV."""
    by_id = {p.robot_id: p for p in plans}
    return [by_id.get(i, MotionPlan(i, [])) for i in range(n)]


def flatness_rows(images: dict[str, BinaryRaster], cfg: PipelineConfig) -> list[list]:
    """One row per image: name, T_i for every robot, max/min ratio, objective."""
    rows = []
    for name, raster in images.items():
        rep = plan_job(raster, cfg).report
        rows.append([name, *rep.print_times, rep.flatness, rep.objective])
    return rows


def flatness_csv(rows: list[list], n_robots: int) -> str:
    head = ["image", *[f"T_{i}" for i in range(n_robots)], "max_over_min", "objective"]
    lines = [",".join(head)]
    for r in rows:
        lines.append(",".join([r[0], *("" if v is None else repr(float(v)) for v in r[1:])]))
    return "\n".join(lines) + "\n"
