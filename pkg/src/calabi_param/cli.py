"""Command-line front end.

    calabi-param param   --input mesh.obj --boundary free --out flat.obj ...
    calabi-param analyze --input flat.obj --report report.csv

Set ``CALABI_LOG=INFO`` (or ``DEBUG``) for progress logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import conformality, embedding, flow, geometry, mesh as meshmod, metric
from .svg import emit_checkerboard_svg

log = logging.getLogger("calabi_param")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INPUT = 2

_PI_EXPR = re.compile(r"^\s*([0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


@dataclass
class RunManifest:
    input: str
    config: dict
    topology: dict = field(default_factory=dict)
    status: str = "started"
    converged: bool = False
    iterations: int = 0
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    embedding: dict = field(default_factory=dict)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def parse_curvature(text: str) -> float:
    m = _PI_EXPR.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


def parse_corners(text: str) -> list[tuple[int, float]]:
    """``"v,v,v,v"`` (each pi/2) or ``"v:K,v:K,..."``; K may use ``pi``."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            v, k = item.split(":", 1)
            out.append((int(v), parse_curvature(k)))
        else:
            out.append((int(item), math.pi / 2))
    return out


def _setup_logging() -> None:
    level = os.environ.get("CALABI_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_param(args) -> int:
    start = time.perf_counter()
    corners = parse_corners(args.corners) if args.corners else []
    if args.boundary == "rect" and not corners:
        print("error: --boundary rect requires --corners", file=sys.stderr)
        return EXIT_INPUT
    manifest = RunManifest(input=str(args.input), config={})
    code = EXIT_INPUT
    try:
        config = flow.FlowConfig(
            flow_kind=args.flow, boundary_mode=args.boundary, epsilon=args.eps,
            max_iterations=args.max_iters, step=args.step, corner_spec=corners,
            accel=args.accel,
        )
        manifest.config = {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(config).items()}
        mesh = meshmod.load_mesh(args.input)
        topo = meshmod.topology(mesh)
        manifest.topology = asdict(topo)
        if args.boundary == "torus" and (not topo.is_closed or topo.genus != 1):
            raise flow.FlowError(f"--boundary torus needs a closed genus-one mesh, got {topo}")

        init = metric.initial_inversive_metric(mesh)
        final, trace = flow.run_flow(mesh, init, config)
        manifest.converged = trace.converged
        manifest.iterations = trace.n_iterations
        manifest.status = trace.status
        if args.trace:
            trace.write_csv(args.trace)
            manifest.outputs.append(str(args.trace))
        if args.metric_csv:
            metric.write_vertex_csv(args.metric_csv, final)
            manifest.outputs.append(str(args.metric_csv))

        if not trace.converged:
            code = EXIT_NOT_CONVERGED
        else:
            lengths = metric.edge_lengths(mesh, final)
            flat_mesh = mesh
            if args.boundary == "torus":
                flat_mesh = meshmod.cut_to_disk(mesh)
                lengths = meshmod.transfer_edge_values(mesh, flat_mesh, lengths)
            param = embedding.embed(flat_mesh, lengths)
            uv01, offset, scale = param.normalized()
            report = conformality.analyze(flat_mesh, param)
            manifest.embedding = {
                "max_closure_error": param.max_closure_error,
                "max_rel_edge_error": float(embedding.edge_length_errors(flat_mesh, param, lengths).max()),
                "uv_offset": offset.tolist(),
                "uv_scale": scale,
                **report.summary(),
            }
            if args.out:
                meshmod.save_obj(args.out, flat_mesh, uv01)
                manifest.outputs.append(str(args.out))
            if args.uv_csv:
                param.write_csv(args.uv_csv)
                manifest.outputs.append(str(args.uv_csv))
            if args.report:
                report.write_csv(args.report)
                manifest.outputs.append(str(args.report))
            if args.svg:
                Path(args.svg).write_text(emit_checkerboard_svg(uv01, flat_mesh.faces, args.cells))
                manifest.outputs.append(str(args.svg))
            code = EXIT_OK
    except (meshmod.MeshError, metric.MetricError, geometry.GeometryError, ValueError) as exc:
        manifest.status = f"input error: {exc}"
        code = EXIT_INPUT
    except (flow.FlowError, embedding.EmbeddingError) as exc:
        manifest.status = f"failed: {exc}"
        code = EXIT_NOT_CONVERGED
    except OSError as exc:
        manifest.status = f"I/O error: {exc}"
        code = EXIT_INPUT

    manifest.wall_time = time.perf_counter() - start
    if args.manifest:
        manifest.outputs.append(str(args.manifest))
        manifest.write(args.manifest)
    stream = sys.stdout if code == EXIT_OK else sys.stderr
    print(f"{manifest.status}; iterations={manifest.iterations}; converged={manifest.converged}", file=stream)
    if manifest.embedding:
        print(f"mean relative angle error {manifest.embedding['mean_rel_angle_error']:.6g}, "
              f"flipped faces {manifest.embedding['flipped_faces']}", file=stream)
    return code


def cmd_analyze(args) -> int:
    try:
        data = meshmod.read_obj(args.input)
        if data.texcoords is None:
            print(f"error: {args.input} has no vt records for every face", file=sys.stderr)
            return EXIT_INPUT
        mesh = meshmod.Mesh.from_arrays(data.vertices, data.faces)
        corner_uv = data.texcoords[data.face_texcoords]
        report = conformality.analyze_corners(mesh, corner_uv, bins=args.bins,
                                              hist_range=(args.lo, args.hi))
    except (meshmod.MeshError, geometry.GeometryError, conformality.AnalysisError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.report:
        report.write_csv(args.report)
    for k, v in report.summary().items():
        print(f"{k} {v!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calabi-param", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("param", help="parameterize a mesh by curvature flow")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--boundary", choices=["free", "circle", "rect", "torus"], default="free")
    p.add_argument("--flow", choices=["calabi", "ricci"], default="calabi")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--accel", choices=["none", "cg"], default="none",
                   help="conjugate-gradient acceleration (Calabi flow only)")
    p.add_argument("--corners", help="corner vertices for rect, 'v,v,..' or 'v:K,..'")
    p.add_argument("--out", type=Path, help="OBJ with vt records")
    p.add_argument("--trace", type=Path, help="flow trace CSV")
    p.add_argument("--report", type=Path, help="conformality report CSV")
    p.add_argument("--svg", type=Path, help="checkerboard SVG preview")
    p.add_argument("--cells", type=int, default=8, help="checkerboard cells per side")
    p.add_argument("--uv-csv", type=Path, help="raw (unnormalized) planar coordinates")
    p.add_argument("--metric-csv", type=Path, help="final conformal factors")
    p.add_argument("--manifest", type=Path, help="JSON run manifest")
    p.set_defaults(func=cmd_param)

    a = sub.add_parser("analyze", help="angle statistics of a UV-mapped OBJ")
    a.add_argument("--input", required=True, type=Path)
    a.add_argument("--report", type=Path)
    a.add_argument("--bins", type=int, default=100)
    a.add_argument("--lo", type=float, default=0.5)
    a.add_argument("--hi", type=float, default=1.5)
    a.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
