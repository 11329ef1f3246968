import json
from pathlib import Path

import numpy as np
import pytest

from geoprint.cli import main
from geoprint.clustering import ClusterConfig, cluster
from geoprint.errors import ClearanceError
from geoprint.pipeline import PipelineConfig, auto_starts, run_pipeline
from geoprint.raster_io import BinaryRaster, load_pbm, write_pbm
from geoprint.suite import checkerboard, gen_suite, symmetric_image

ARTIFACTS = {"config.json", "cells.json", "cells.ppm", "fleet.json", "assignment.json",
             "plan.csv", "cost.csv", "outcome.json"}


def two_blobs() -> BinaryRaster:
    yy, xx = np.mgrid[0:64, 0:64]
    g = ((xx - 18) ** 2 + (yy - 20) ** 2 <= 81) | ((xx - 46) ** 2 + (yy - 44) ** 2 <= 100)
    return BinaryRaster.from_array(g.astype(np.uint8))


@pytest.fixture
def blob_file(tmp_path):
    p = tmp_path / "blobs.pbm"
    write_pbm(two_blobs(), p)
    return p


def tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_checkerboard_count():
    assert checkerboard(32).n_printable == 512


def test_symmetric_image_balances_four_ways():
    cells = cluster(symmetric_image(4), ClusterConfig(4, rng_seed=0))
    sizes = cells.sizes()
    assert sizes.max() - sizes.min() <= 1


def test_gen_suite_deterministic(tmp_path):
    a = gen_suite(tmp_path / "a", 3)
    b = gen_suite(tmp_path / "b", 3)
    assert len(a) == 10
    assert [p.name for p in a] == [p.name for p in b]
    assert tree(tmp_path / "a") == tree(tmp_path / "b")
    assert tree(tmp_path / "a") != tree(Path(gen_suite(tmp_path / "c", 4)[0]).parent)


def test_pipeline_two_blobs_full_and_repeatable(tmp_path, blob_file, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = ["pipeline", str(blob_file), "--n-robots", "2", "--seed", "7", "--out", "run", "--frame-stride", "20"]
    assert main(argv) == 0
    first = tree(tmp_path / "run")
    assert ARTIFACTS <= set(first)
    assert any(k.startswith("frames/") for k in first)
    cfg = json.loads(first["config.json"])
    assert cfg["n_robots"] == 2 and cfg["rng_seed"] == 7
    import shutil
    shutil.rmtree(tmp_path / "run")
    assert main(argv) == 0
    assert tree(tmp_path / "run") == first


def test_infeasible_exit_code(tmp_path):
    g = np.zeros((4, 4), dtype=np.uint8)
    g[1, 1] = g[2, 2] = 1
    p = tmp_path / "tiny.pbm"
    write_pbm(BinaryRaster.from_array(g), p)
    assert main(["pipeline", str(p), "--n-robots", "3", "--out", str(tmp_path / "o")]) == 2
    blank = tmp_path / "blank.pbm"
    write_pbm(BinaryRaster.from_array(np.zeros((3, 3), dtype=np.uint8)), blank)
    assert main(["cluster", str(blank), "--out", str(tmp_path / "o2")]) == 2


def test_clearance_exit_code_and_force(tmp_path, blob_file):
    close = "[[0, 70], [1, 70]]"
    base = ["pipeline", str(blob_file), "--n-robots", "2", "--starts", close, "--frame-stride", "100"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 3
    assert main(base + ["--out", str(tmp_path / "b"), "--force"]) == 0
    outcome = json.loads((tmp_path / "b" / "outcome.json").read_text())
    assert outcome["events"]


def test_io_and_parse_errors(tmp_path):
    assert main(["pipeline", str(tmp_path / "missing.pbm"), "--out", str(tmp_path / "o")]) == 4
    bad = tmp_path / "bad.pbm"
    bad.write_bytes(b"P1\n2 2\n1 0 1\n")
    assert main(["cluster", str(bad), "--out", str(tmp_path / "o")]) == 4
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_robots": 2, "colour": "red"}))
    assert main(["cluster", str(bad), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4
    assert main(["plan", str(bad), "--out", str(tmp_path / "empty")]) == 4


def test_stages_match_pipeline(tmp_path, blob_file):
    common = [str(blob_file), "--n-robots", "2", "--seed", "7", "--frame-stride", "20"]
    assert main(["pipeline", *common, "--out", str(tmp_path / "whole")]) == 0
    staged = tmp_path / "staged"
    for stage in ("cluster", "assign", "plan", "report", "simulate"):
        assert main([stage, *common, "--out", str(staged)]) == 0
    a, b = tree(tmp_path / "whole"), tree(staged)
    for name in ARTIFACTS - {"config.json"}:
        assert a[name] == b[name], name
    assert {k for k in a if k.startswith("frames/")} == {k for k in b if k.startswith("frames/")}


def test_config_file_and_flag_override(tmp_path, blob_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_robots": 3, "rng_seed": 5, "v_print": 4.0}))
    out = tmp_path / "o"
    assert main(["cluster", str(blob_file), "--config", str(cfg), "--n-robots", "2", "--out", str(out)]) == 0
    echo = json.loads((out / "config.json").read_text())
    assert echo["n_robots"] == 2 and echo["rng_seed"] == 5 and echo["v_print"] == 4.0
    assert json.loads((out / "cells.json").read_text())["n"] == 2


def test_suite_report_shape(tmp_path, capsys):
    gen_suite(tmp_path / "suite", 0)
    assert main(["report", "--suite", str(tmp_path / "suite"), "--out", str(tmp_path / "rep")]) == 0
    lines = (tmp_path / "rep" / "flatness.csv").read_text().splitlines()
    head = lines[0].split(",")
    assert [h for h in head if h.startswith("T_")] == [f"T_{i}" for i in range(5)]
    assert len(lines) == 1 + 8
    for ln in lines[1:]:
        vals = ln.split(",")
        assert all(float(v) > 0 for v in vals[1:6])
    assert len((tmp_path / "rep" / "extremes.csv").read_text().splitlines()) == 3


def test_auto_starts_clear_and_seeded():
    a = auto_starts(64, 64, 5, 1.5, seed=3)
    assert a == auto_starts(64, 64, 5, 1.5, seed=3)
    pts = np.array(a)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)[np.triu_indices(5, 1)]
    assert (d > 2 * np.sqrt(2) * 1.5).all()
    assert (pts[:, 1] >= 64).all()


def test_auto_starts_give_up():
    with pytest.raises(ClearanceError):
        auto_starts(2, 2, 50, 5.0, seed=0)


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(n_robots=0)
    with pytest.raises(ValueError):
        PipelineConfig(pitch=-1)
    with pytest.raises(ValueError):
        PipelineConfig.from_dict({"nope": 1})


def test_run_pipeline_api(tmp_path, blob_file):
    cfg = PipelineConfig(image=str(blob_file), n_robots=2, rng_seed=7, out=str(tmp_path / "o"), frame_stride=50)
    job = run_pipeline(cfg)
    assert len(job.report.print_times) == 2
    assert load_pbm(blob_file) == two_blobs()
