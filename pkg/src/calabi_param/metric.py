"""Circle packing metrics: per-vertex radii plus per-edge conformal data.

Edge length between two vertex circles of radii ``r_i``, ``r_j`` is

    l_ij**2 = r_i**2 + r_j**2 + 2 r_i r_j w_ij

with ``w_ij = I_ij`` (inversive distance) or ``w_ij = cos(phi_ij)``
(Thurston intersection angle).  The flow only ever changes ``u = log r``;
the edge weights fix the conformal class.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace

import numpy as np

from .mesh import Mesh


class MetricError(ValueError):
    pass


class Scheme(str, enum.Enum):
    INVERSIVE = "inversive"
    THURSTON = "thurston"


@dataclass(frozen=True, eq=False)
class PackingMetric:
    scheme: Scheme
    u: np.ndarray
    edge_weight: np.ndarray

    def __post_init__(self):
        if self.scheme is Scheme.THURSTON:
            phi = np.asarray(self.edge_weight)
            if np.any(phi < 0) or np.any(phi > np.pi / 2):
                raise MetricError("Thurston intersection angles must lie in [0, pi/2]")

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.u)

    @property
    def cosines(self) -> np.ndarray:
        """The ``w_ij`` entering the length law."""
        if self.scheme is Scheme.THURSTON:
            return np.cos(self.edge_weight)
        return np.asarray(self.edge_weight)

    def with_u(self, u) -> "PackingMetric":
        return replace(self, u=np.asarray(u, dtype=float))


def thurston_metric(u, phi) -> PackingMetric:
    return PackingMetric(Scheme.THURSTON, np.asarray(u, dtype=float), np.asarray(phi, dtype=float))


def initial_inversive_metric(mesh: Mesh) -> PackingMetric:
    """Inversive distance metric that reproduces the mesh's edge lengths.

    Every corner proposes a tangential radius ``(d_ki + d_ij - d_jk) / 2``;
    each vertex keeps the smallest proposal and the inversive distances are
    then solved from the original lengths.
    """
    d = mesh.original_lengths
    lf = d[mesh.face_edges]
    # corner k: the two adjacent edges are opposite corners k+1 and k+2
    tangential = 0.5 * (np.roll(lf, -1, axis=1) + np.roll(lf, -2, axis=1) - lf)
    bad = np.flatnonzero(np.any(tangential <= 0, axis=1))
    if len(bad):
        f = int(bad[0])
        raise MetricError(
            f"face {f} {tuple(mesh.faces[f])} violates the triangle inequality; "
            "cannot build an initial packing"
        )
    r = np.full(mesh.n_vertices, np.inf)
    np.minimum.at(r, mesh.faces.ravel(), tangential.ravel())
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    inv = (d**2 - r[i] ** 2 - r[j] ** 2) / (2 * r[i] * r[j])
    return PackingMetric(Scheme.INVERSIVE, np.log(r), inv)


def edge_lengths(mesh: Mesh, metric: PackingMetric) -> np.ndarray:
    r = metric.radii
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    sq = r[i] ** 2 + r[j] ** 2 + 2 * r[i] * r[j] * metric.cosines
    if np.any(sq <= 0):
        e = int(np.argmax(sq <= 0))
        raise MetricError(f"edge {tuple(mesh.edges[e])} has non-positive squared length {sq[e]:.3g}")
    return np.sqrt(sq)


def length_derivatives(mesh: Mesh, metric: PackingMetric, lengths) -> np.ndarray:
    """``(E, 2)`` array of d l_ij / d u_i and d l_ij / d u_j per edge."""
    r = metric.radii
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    cross = r[i] * r[j] * metric.cosines
    return np.column_stack([(r[i] ** 2 + cross) / lengths, (r[j] ** 2 + cross) / lengths])


def check_triangle_inequalities(mesh: Mesh, lengths) -> list[int]:
    """Faces whose lengths fail any strict triangle inequality."""
    lf = np.asarray(lengths)[mesh.face_edges]
    slack = lf.sum(axis=1, keepdims=True) - 2 * lf
    return np.flatnonzero(np.any(slack <= 0, axis=1)).tolist()


def write_edge_csv(path, mesh: Mesh, metric: PackingMetric) -> None:
    lengths = edge_lengths(mesh, metric)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge_v0", "edge_v1", "weight", "length"])
        for (a, b), wt, ln in zip(mesh.edges.tolist(), metric.edge_weight.tolist(), lengths.tolist()):
            w.writerow([a, b, repr(wt), repr(ln)])


def write_vertex_csv(path, metric: PackingMetric) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "u", "r"])
        for v, (u, r) in enumerate(zip(metric.u.tolist(), metric.radii.tolist())):
            w.writerow([v, repr(u), repr(r)])
