"""Lay a flat metric out in the plane, one face at a time."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, topology


class EmbeddingError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Parameterization:
    uv: np.ndarray
    embedded: np.ndarray
    # largest disagreement between a vertex's stored position and the
    # position implied by a later face that reaches it again
    max_closure_error: float
    seam: np.ndarray | None = None

    def normalized(self):
        """UVs shifted to the origin and scaled into the unit square.

        Returns ``(uv01, offset, scale)`` with ``uv01 = (uv - offset) * scale``.
        """
        lo = self.uv.min(axis=0)
        span = float((self.uv.max(axis=0) - lo).max())
        scale = 1.0 / span if span > 0 else 1.0
        return (self.uv - lo) * scale, lo, scale

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", "u", "v"])
            for i, (a, b) in enumerate(self.uv.tolist()):
                w.writerow([i, repr(a), repr(b)])


def third_vertex(p_i, p_j, l_ik, l_jk, face=None) -> np.ndarray:
    """Intersection of circles C(p_i, l_ik) and C(p_j, l_jk) left of p_i -> p_j."""
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    e = p_j - p_i
    d = float(np.hypot(*e))
    where = f" for face {face}" if face is not None else ""
    if d == 0:
        raise EmbeddingError(f"coincident base vertices{where}")
    x = (d * d + l_ik * l_ik - l_jk * l_jk) / (2 * d)
    y2 = l_ik * l_ik - x * x
    if not y2 > 0:
        raise EmbeddingError(
            f"circles of radii {l_ik:.6g} and {l_jk:.6g} at distance {d:.6g} do not intersect{where}"
        )
    e = e / d
    n = np.array([-e[1], e[0]])
    return p_i + x * e + np.sqrt(y2) * n


def embed(mesh: Mesh, lengths) -> Parameterization:
    """Breadth-first layout of a disk mesh from per-edge lengths.

    Face 0 is the root: its first corner goes to the origin, its second on
    the positive x axis.  Faces are then visited breadth first, neighbours in
    increasing face index; a vertex keeps the first position it receives.
    """
    topo = topology(mesh)
    if not topo.is_disk:
        raise EmbeddingError(
            f"embedding needs a topological disk (chi={topo.euler_characteristic}, "
            f"boundary loops={topo.boundary_loop_count}); cut closed meshes first"
        )
    lengths = np.asarray(lengths, dtype=float)
    fe = mesh.face_edges
    uv = np.zeros((mesh.n_vertices, 2))
    done = np.zeros(mesh.n_vertices, dtype=bool)

    a, b, c = mesh.faces[0]
    uv[b] = (lengths[fe[0, 2]], 0.0)
    uv[c] = third_vertex(uv[a], uv[b], lengths[fe[0, 1]], lengths[fe[0, 0]], face=0)
    done[[a, b, c]] = True

    closure = 0.0
    visited = np.zeros(mesh.n_faces, dtype=bool)
    visited[0] = True
    queue = deque([0])
    while queue:
        f = queue.popleft()
        nbrs = sorted(int(g) for e in fe[f] for g in mesh.edge_faces[e] if g >= 0 and g != f)
        for g in nbrs:
            if visited[g]:
                continue
            visited[g] = True
            queue.append(g)
            corners = mesh.faces[g]
            # the corner not shared with f is the one to place
            k = next(t for t in range(3) if corners[t] not in mesh.faces[f])
            vi, vj, vk = corners[(k + 1) % 3], corners[(k + 2) % 3], corners[k]
            # edge ik is opposite corner k+2, edge jk opposite corner k+1
            p = third_vertex(uv[vi], uv[vj], lengths[fe[g, (k + 2) % 3]],
                             lengths[fe[g, (k + 1) % 3]], face=g)
            if done[vk]:
                closure = max(closure, float(np.hypot(*(p - uv[vk]))))
            else:
                uv[vk] = p
                done[vk] = True

    if not done.all():
        raise EmbeddingError(f"{int((~done).sum())} vertices are not reachable from the root face")
    uv.setflags(write=False)
    done.setflags(write=False)
    return Parameterization(uv, done, closure, mesh.seam)


def signed_areas(faces, uv) -> np.ndarray:
    p = np.asarray(uv)[np.asarray(faces)]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def edge_length_errors(mesh: Mesh, param: Parameterization, lengths) -> np.ndarray:
    """Relative error ``| |p_i - p_j| - l_ij | / l_ij`` per edge."""
    lengths = np.asarray(lengths, dtype=float)
    d = np.linalg.norm(param.uv[mesh.edges[:, 0]] - param.uv[mesh.edges[:, 1]], axis=1)
    return np.abs(d - lengths) / lengths
