"""Command line entry point.

PBM convention: black pixels (value 1) are ink and get printed.

Exit codes: 0 success, 2 infeasible request, 3 clearance failure,
4 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .assignment import assign_cells, check_clearance, make_trajectories
from .clustering import ClusterConfig, cluster, render_cells
from .errors import ClearanceError, InfeasibleError
from .pathplan import plans_to_csv
from .raster_io import PBMParseError, PhysicalScale, format_ppm, load_pbm
from .simulate import SimConfig, simulate, write_frames
from .suite import gen_suite

EXIT_OK, EXIT_INFEASIBLE, EXIT_CLEARANCE, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("geoprint")

_FLAG_FIELDS = {
    "n_robots": int, "seed": int, "pitch": float, "v_print": float,
    "v_travel": float, "radius": float, "dt": float, "frame_stride": int,
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("image", nargs="?", help="input PBM (black = ink)")
    p.add_argument("--config", help="JSON file with PipelineConfig fields")
    p.add_argument("--out", help="output directory (stage files are read from and written here)")
    p.add_argument("--n-robots", type=int)
    p.add_argument("--seed", type=int, help="RNG seed for seeding and start placement")
    p.add_argument("--pitch", type=float, help="mm per pixel")
    p.add_argument("--v-print", type=float, help="printing speed, mm/s")
    p.add_argument("--v-travel", type=float, help="travel speed, mm/s")
    p.add_argument("--radius", type=float, help="robot radius, pixels")
    p.add_argument("--dt", type=float, help="simulation time step, s")
    p.add_argument("--frame-stride", type=int, help="emit a frame every this many steps")
    p.add_argument("--starts", help='JSON list of [x, y] robot starts, e.g. "[[0,70],[20,70]]"')
    p.add_argument("--force", action="store_true", help="proceed even if start clearance fails")


def resolve_config(args: argparse.Namespace) -> pl.PipelineConfig:
    """Defaults <- existing out/config.json <- --config file <- command line flags."""
    data: dict = {}
    if args.out and (Path(args.out) / "config.json").exists():
        data.update(json.loads((Path(args.out) / "config.json").read_text()))
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
    for name in _FLAG_FIELDS:
        val = getattr(args, name, None)
        if val is not None:
            data["rng_seed" if name == "seed" else name] = val
    if args.image:
        data["image"] = args.image
    if args.out:
        data["out"] = args.out
    if args.starts:
        data["starts"] = json.loads(args.starts)
    if args.force:
        data["force"] = True
    return pl.PipelineConfig.from_dict(data)


def _prepare(args):
    cfg = resolve_config(args)
    if cfg.image is None:
        raise ValueError("no input image given")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json())
    return cfg, load_pbm(cfg.image), out


def _need(value, name):
    if value is None:
        raise FileNotFoundError(f"missing stage input {name}; run the earlier stage first")
    return value


def cmd_gen_suite(args) -> int:
    paths = gen_suite(args.out, args.seed)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_cluster(args) -> int:
    cfg, raster, out = _prepare(args)
    cells = cluster(raster, ClusterConfig(cfg.n_robots, cfg.rng_seed))
    (out / "cells.json").write_text(cells.to_json())
    (out / "cells.ppm").write_bytes(format_ppm(render_cells(raster, cells)))
    print(f"{cells.n} cells, sizes {cells.sizes().tolist()}, {cells.iterations_run} iterations")
    return EXIT_OK


def cmd_assign(args) -> int:
    cfg, raster, out = _prepare(args)
    cells, _, _, _ = pl.load_stage_inputs(out, raster)
    cells = _need(cells, "cells.json")
    fleet = pl.build_fleet(cfg, raster)
    res = assign_cells(fleet, cells.means, cfg.pitch)
    (out / "fleet.json").write_text(pl.fleet_to_json(fleet))
    (out / "assignment.json").write_text(res.to_json())
    if not res.clearance_ok:
        _, pair, d = check_clearance(fleet)
        msg = f"clearance violated by robots {pair} ({d:.3f} apart)"
        if not cfg.force:
            print(msg, file=sys.stderr)
            return EXIT_CLEARANCE
        log.warning("%s; continuing because of --force", msg)
    print(f"perm {res.perm}, sum of squared distances {res.total_sq_cost:.3f}")
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg, raster, out = _prepare(args)
    cells, _, res, _ = pl.load_stage_inputs(out, raster)
    plans = pl.make_plans(_need(cells, "cells.json"), _need(res, "assignment.json"))
    (out / "plan.csv").write_text(plans_to_csv(plans))
    print(f"{sum(len(p.segments) for p in plans)} segments for {len(plans)} robots")
    return EXIT_OK


def cmd_report(args) -> int:
    if args.suite:
        return _suite_report(args)
    cfg, raster, out = _prepare(args)
    _, fleet, res, plans = pl.load_stage_inputs(out, raster)
    fleet = _need(fleet, "fleet.json")
    plans = pl.pad_plans(_need(plans, "plan.csv"), len(fleet))
    rep = pl.report_for(plans, fleet, _need(res, "assignment.json"), PhysicalScale(cfg.pitch))
    (out / "cost.csv").write_text(rep.to_csv())
    sys.stdout.write(rep.to_csv())
    for f in rep.flags:
        log.warning(f)
    return EXIT_OK


def _suite_report(args) -> int:
    """Flatness table over a gen-suite directory: the eight scenes with N robots,
    plus the best case (four-fold image, four robots) and the checkerboard."""
    cfg = resolve_config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json())
    src = Path(args.suite)
    files = sorted(src.glob("*.pbm"))
    scenes = {p.stem: load_pbm(p) for p in files if not p.stem.startswith(("best_", "worst_"))}
    text = pl.flatness_csv(pl.flatness_rows(scenes, cfg), cfg.n_robots)
    (out / "flatness.csv").write_text(text)
    sys.stdout.write(text)
    extremes = []
    for p in files:
        if p.stem.startswith("best_"):
            n = 4
        elif p.stem.startswith("worst_"):
            n = cfg.n_robots
        else:
            continue
        case_cfg = pl.PipelineConfig.from_dict({**json.loads(cfg.to_json()), "n_robots": n, "starts": None})
        rep = pl.plan_job(load_pbm(p), case_cfg).report
        extremes.append(f"{p.stem},{n},{rep.flatness!r},{'' if rep.objective is None else repr(rep.objective)}")
    if extremes:
        (out / "extremes.csv").write_text("image,n_robots,max_over_min,objective\n" + "\n".join(extremes) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, raster, out = _prepare(args)
    cells, fleet, res, plans = pl.load_stage_inputs(out, raster)
    fleet = _need(fleet, "fleet.json")
    cells = _need(cells, "cells.json")
    res = _need(res, "assignment.json")
    plans = pl.pad_plans(_need(plans, "plan.csv"), len(fleet))
    trajs = make_trajectories(fleet, cells.means, res)
    outcome = simulate(fleet, trajs, plans, SimConfig(cfg.dt, cfg.frame_stride),
                       PhysicalScale(cfg.pitch), (raster.width, raster.height), force=cfg.force)
    write_frames(outcome.frames, out / "frames")
    (out / "outcome.json").write_text(outcome.to_json())
    print(f"makespan {outcome.makespan:.3f}, {len(outcome.events)} proximity events, "
          f"{len(outcome.frames)} frames")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = resolve_config(args)
    job = pl.run_pipeline(cfg)
    rep = job.report
    print(f"T_i = {[round(t, 3) for t in rep.print_times]}, objective {rep.objective}, "
          f"makespan {rep.makespan:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoprint",
        description="Plan multi-robot raster printing: balanced cells, assignment, "
                    "serpentine plans, simulation. PBM black (1) = ink.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-suite", help="write the synthetic PBM test images")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen_suite)

    for name, func, help_ in (
        ("cluster", cmd_cluster, "split the ink pixels into balanced cells"),
        ("assign", cmd_assign, "assign robots to cells (Hungarian on squared distances)"),
        ("plan", cmd_plan, "serpentine print plan per robot"),
        ("report", cmd_report, "per-robot printing times, objective, makespan"),
        ("simulate", cmd_simulate, "replay the plans, write frames and outcome"),
        ("pipeline", cmd_pipeline, "run every stage"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_config_flags(p)
        if name == "report":
            p.add_argument("--suite", help="gen-suite directory: write flatness.csv over all its scenes")
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ClearanceError as e:
        print(f"clearance: {e}", file=sys.stderr)
        return EXIT_CLEARANCE
    except (OSError, PBMParseError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
