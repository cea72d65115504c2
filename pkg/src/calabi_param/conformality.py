"""Angle and area distortion of a parameterization.

The angle ratio of a corner is ``planar angle / original 3D angle``; a
perfectly conformal map gives 1 everywhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .embedding import Parameterization
from .geometry import corner_angles, triangle_angles
from .mesh import Mesh


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConformalityReport:
    angle_ratio: np.ndarray       # (3F,), corner 3f+k is corner k of face f
    rel_angle_error: np.ndarray   # (3F,)
    area_ratio: np.ndarray        # (F,)
    hist_edges: np.ndarray        # (bins+1,)
    # underflow, one count per bin, overflow
    hist_counts: np.ndarray       # (bins+2,)
    flipped_faces: int

    @property
    def mean_rel_angle_error(self) -> float:
        return float(np.mean(self.rel_angle_error))

    @property
    def max_rel_angle_error(self) -> float:
        return float(np.max(self.rel_angle_error))

    @property
    def mean_area_ratio(self) -> float:
        return float(np.mean(self.area_ratio))

    @property
    def area_ratio_stddev(self) -> float:
        return float(np.std(self.area_ratio))

    def summary(self) -> dict:
        return {
            "mean_rel_angle_error": self.mean_rel_angle_error,
            "max_rel_angle_error": self.max_rel_angle_error,
            "flipped_faces": self.flipped_faces,
            "mean_area_ratio": self.mean_area_ratio,
            "area_ratio_stddev": self.area_ratio_stddev,
        }

    def histogram_rows(self):
        e = self.hist_edges.tolist()
        lows = [0.0] + e
        highs = e + [float("inf")]
        return list(zip(lows, highs, self.hist_counts.tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, n in self.histogram_rows():
                w.writerow([repr(lo), repr(hi), n])
            w.writerow(["metric", "value"])
            for k, v in self.summary().items():
                w.writerow([k, repr(v)])


def planar_corner_angles(corner_uv) -> np.ndarray:
    """Unsigned corner angles of ``(F, 3, 2)`` planar triangles.

    Goes through edge lengths and the cosine law, the same path as the 3D
    angles, so an identity map compares bit-exactly.
    """
    p = np.asarray(corner_uv, dtype=float)
    opposite = np.linalg.norm(np.roll(p, -1, axis=1) - np.roll(p, -2, axis=1), axis=2)
    return triangle_angles(opposite)


def analyze_corners(mesh: Mesh, corner_uv, bins: int = 100, hist_range=(0.5, 1.5)) -> ConformalityReport:
    """Statistics for per-corner planar coordinates ``(F, 3, 2)``."""
    corner_uv = np.asarray(corner_uv, dtype=float)
    if corner_uv.shape != (mesh.n_faces, 3, 2):
        raise AnalysisError(f"expected per-corner UVs of shape {(mesh.n_faces, 3, 2)}, got {corner_uv.shape}")
    if not np.all(np.isfinite(corner_uv)):
        raise AnalysisError("parameterization has non-finite coordinates")
    orig = corner_angles(mesh, mesh.original_lengths)
    if np.any(orig <= 0):
        raise AnalysisError("mesh has a zero corner angle")
    flat = planar_corner_angles(corner_uv)
    ratio = (flat / orig).ravel()
    err = (np.abs(flat - orig) / orig).ravel()

    p = corner_uv
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area_uv = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    area_ratio = area_uv / mesh.face_areas()

    lo, hi = hist_range
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(ratio, bins=edges)
    under = int(np.sum(ratio < lo))
    over = int(np.sum(ratio > hi))
    full = np.concatenate([[under], counts, [over]])
    return ConformalityReport(ratio, err, area_ratio, edges, full, int(np.sum(area_uv <= 0)))


def analyze(mesh: Mesh, param: Parameterization, bins: int = 100, hist_range=(0.5, 1.5)) -> ConformalityReport:
    if not np.all(param.embedded):
        raise AnalysisError(f"{int((~param.embedded).sum())} vertices are not embedded")
    return analyze_corners(mesh, param.uv[mesh.faces], bins, hist_range)


def sample_corners(report: ConformalityReport, n: int, seed: int = 0) -> list[tuple[int, float]]:
    """``n`` distinct corners chosen uniformly, sorted by corner id."""
    total = len(report.rel_angle_error)
    if n > total:
        raise AnalysisError(f"cannot sample {n} corners from {total}")
    ids = np.sort(np.random.default_rng(seed).choice(total, size=n, replace=False))
    return [(int(i), float(report.rel_angle_error[i])) for i in ids]

