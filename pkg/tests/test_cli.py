import json
import math

import numpy as np
import pytest

from calabi_param import cli, mesh as meshmod, shapes


@pytest.fixture
def grid_obj(tmp_path):
    m = shapes.grid(4, 4, z=lambda x, y: 0.3 * np.exp(-8 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)))
    path = tmp_path / "grid.obj"
    meshmod.save_obj(path, m)
    return path


def run_param(tmp_path, obj, tag, *extra):
    out = {k: tmp_path / f"{tag}.{k}" for k in ("obj", "csv", "svg", "trace", "json")}
    code = cli.main(["param", "--input", str(obj), "--out", str(out["obj"]), "--report", str(out["csv"]),
                     "--svg", str(out["svg"]), "--trace", str(out["trace"]), "--manifest", str(out["json"]),
                     *extra])
    return code, out


def test_parse_helpers():
    assert cli.parse_curvature("pi/2") == pytest.approx(math.pi / 2)
    assert cli.parse_curvature("2pi") == pytest.approx(2 * math.pi)
    assert cli.parse_curvature("0.25") == 0.25
    assert cli.parse_corners("1,2") == [(1, math.pi / 2), (2, math.pi / 2)]
    assert cli.parse_corners("3:pi") == [(3, math.pi)]


def test_rect_run_is_deterministic(tmp_path, grid_obj):
    corners = ",".join(map(str, shapes.grid_corners(4, 4)))
    args = ("--boundary", "rect", "--corners", corners, "--accel", "cg", "--eps", "1e-10")
    code1, a = run_param(tmp_path, grid_obj, "a", *args)
    code2, b = run_param(tmp_path, grid_obj, "b", *args)
    assert code1 == code2 == 0
    for k in ("obj", "csv", "svg", "trace"):
        assert a[k].read_bytes() == b[k].read_bytes(), k
    man = json.loads(a["json"].read_text())
    assert man["converged"] and man["embedding"]["flipped_faces"] == 0
    assert man["embedding"]["max_rel_edge_error"] < 1e-9


def test_torus_and_analyze(tmp_path):
    obj = tmp_path / "torus.obj"
    meshmod.save_obj(obj, shapes.torus(6, 6))
    code, out = run_param(tmp_path, obj, "t", "--boundary", "torus", "--accel", "cg")
    assert code == 0
    data = meshmod.read_obj(out["obj"])
    assert data.texcoords is not None and len(data.vertices) > 36
    report = tmp_path / "again.csv"
    assert cli.main(["analyze", "--input", str(out["obj"]), "--report", str(report)]) == 0
    assert len(report.read_text().splitlines()) == 109


def test_not_converged_exit_code(tmp_path, grid_obj):
    code, out = run_param(tmp_path, grid_obj, "n", "--max-iters", "2")
    assert code == 1
    assert not out["obj"].exists()
    assert json.loads(out["json"].read_text())["converged"] is False


def test_input_errors(tmp_path, grid_obj):
    assert cli.main(["param", "--input", str(grid_obj), "--boundary", "rect"]) == 2
    assert cli.main(["param", "--input", str(grid_obj), "--boundary", "rect", "--corners", "0:pi"]) == 2
    assert cli.main(["param", "--input", str(tmp_path / "missing.obj")]) == 2
    assert cli.main(["analyze", "--input", str(grid_obj)]) == 2


def test_wrong_topology_fails(tmp_path, grid_obj):
    assert cli.main(["param", "--input", str(grid_obj), "--boundary", "torus"]) == 1
