"""Corner angles, angle-deficit curvature and the two discrete Laplacians.

Sign convention for the matrices returned here: both are assembled as
Jacobian-style operators ``L = dK/du`` with off-diagonal entries ``-w_ij``
and diagonal ``sum_j w_ij``, where ``w_ij`` is the (usually positive) edge
weight.  With this convention ``L`` is symmetric positive semidefinite for
well-shaped metrics and every row/column sums to zero.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .mesh import Mesh
from .metric import PackingMetric, edge_lengths

DEGENERATE_ANGLE = 1e-12


class GeometryError(ValueError):
    pass


def _face_lengths(mesh: Mesh, lengths) -> np.ndarray:
    return np.asarray(lengths, dtype=float)[mesh.face_edges]


def corner_angles(mesh: Mesh, lengths) -> np.ndarray:
    """``(F, 3)`` interior angles; column ``k`` is the angle at corner ``k``."""
    lf = _face_lengths(mesh, lengths)
    slack = lf.sum(axis=1, keepdims=True) - 2 * lf
    if np.any(slack <= 0):
        f = int(np.flatnonzero(np.any(slack <= 0, axis=1))[0])
        raise GeometryError(f"face {f} {tuple(mesh.faces[f])} violates the triangle inequality")
    return triangle_angles(lf)


def triangle_angles(lf) -> np.ndarray:
    """Cosine-law angles from ``(F, 3)`` opposite-edge lengths."""
    lf = np.asarray(lf, dtype=float)
    lb = np.roll(lf, -1, axis=1)
    lc = np.roll(lf, -2, axis=1)
    cos = (lb**2 + lc**2 - lf**2) / (2 * lb * lc)
    return np.arccos(np.clip(cos, -1.0, 1.0))


def vertex_curvatures(mesh: Mesh, angles) -> np.ndarray:
    """Angle deficit: ``2pi - sum`` inside, ``pi - sum`` on the boundary."""
    total = np.zeros(mesh.n_vertices)
    np.add.at(total, mesh.faces.ravel(), np.asarray(angles).ravel())
    base = np.where(mesh.boundary_vertex, np.pi, 2 * np.pi)
    return base - total


def curvatures(mesh: Mesh, metric: PackingMetric) -> np.ndarray:
    return vertex_curvatures(mesh, corner_angles(mesh, edge_lengths(mesh, metric)))


def _check_degenerate(mesh: Mesh, angles) -> None:
    bad = (angles < DEGENERATE_ANGLE) | (angles > np.pi - DEGENERATE_ANGLE)
    if np.any(bad):
        f = int(np.flatnonzero(np.any(bad, axis=1))[0])
        raise GeometryError(f"face {f} {tuple(mesh.faces[f])} is degenerate (angle at 0 or pi)")


def face_edge_weights(mesh: Mesh, metric: PackingMetric, lengths, angles) -> np.ndarray:
    """Per-face contribution ``d theta_i / d u_j`` to each edge's weight.

    Column ``k`` belongs to the edge opposite corner ``k``.  The derivative is
    taken through the cosine law and the packing length law; both orderings
    ``d theta_a/d u_b`` and ``d theta_b/d u_a`` are evaluated and averaged,
    which makes the result symmetric by construction (they agree
    analytically).
    """
    _check_degenerate(mesh, angles)
    lf = _face_lengths(mesh, lengths)
    r = metric.radii[mesh.faces]
    w = metric.cosines[mesh.face_edges]
    twice_area = lf[:, 1] * lf[:, 2] * np.sin(angles[:, 0])
    twice_area = twice_area[:, None]

    def roll(x, s):
        return np.roll(x, -s, axis=1)

    # for the edge opposite corner c: a = c+1, b = c+2
    l_c, l_a, l_b = lf, roll(lf, 1), roll(lf, 2)
    r_c, r_a, r_b = r, roll(r, 1), roll(r, 2)
    w_c, w_a, w_b = w, roll(w, 1), roll(w, 2)
    th_a, th_b = roll(angles, 1), roll(angles, 2)

    # dl_a/du_b (edge b-c), dl_c/du_b (edge a-b)
    dla_dub = (r_b**2 + r_b * r_c * w_a) / l_a
    dlc_dub = (r_b**2 + r_a * r_b * w_c) / l_c
    dtha_dub = (l_a * dla_dub - l_a * np.cos(th_b) * dlc_dub) / twice_area

    dlb_dua = (r_a**2 + r_a * r_c * w_b) / l_b
    dlc_dua = (r_a**2 + r_a * r_b * w_c) / l_c
    dthb_dua = (l_b * dlb_dua - l_b * np.cos(th_a) * dlc_dua) / twice_area

    return 0.5 * (dtha_dub + dthb_dua)


def _sum_to_edges(mesh: Mesh, per_face) -> np.ndarray:
    out = np.zeros(mesh.n_edges)
    np.add.at(out, mesh.face_edges.ravel(), np.asarray(per_face).ravel())
    return out


def dual_weights(mesh: Mesh, metric: PackingMetric, lengths=None, angles=None) -> np.ndarray:
    """Edge weights ``w_ij = -dK_i/du_j`` (equal to dual/primal length ratio)."""
    if lengths is None:
        lengths = edge_lengths(mesh, metric)
    if angles is None:
        angles = corner_angles(mesh, lengths)
    return _sum_to_edges(mesh, face_edge_weights(mesh, metric, lengths, angles))


def laplacian_from_weights(mesh: Mesh, weights) -> sparse.csr_matrix:
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    n = mesh.n_vertices
    diag = np.zeros(n)
    np.add.at(diag, i, weights)
    np.add.at(diag, j, weights)
    rows = np.concatenate([i, j, np.arange(n)])
    cols = np.concatenate([j, i, np.arange(n)])
    vals = np.concatenate([-weights, -weights, diag])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def dual_laplacian(mesh: Mesh, metric: PackingMetric, lengths=None, angles=None) -> sparse.csr_matrix:
    """Curvature Jacobian ``dK/du`` of a circle packing metric."""
    return laplacian_from_weights(mesh, dual_weights(mesh, metric, lengths, angles))


def cotangent_weights(mesh: Mesh, lengths, angles=None) -> np.ndarray:
    if angles is None:
        angles = corner_angles(mesh, lengths)
    _check_degenerate(mesh, angles)
    return _sum_to_edges(mesh, 0.5 / np.tan(angles))


def cotangent_laplacian(mesh: Mesh, lengths, angles=None) -> sparse.csr_matrix:
    return laplacian_from_weights(mesh, cotangent_weights(mesh, lengths, angles))


def power_centers(mesh: Mesh, metric: PackingMetric, lengths=None) -> np.ndarray:
    """Radical center of each face's vertex circles in the face's local frame.

    The frame puts corner 0 at the origin, corner 1 on the positive x axis
    and corner 2 in the upper half plane.  Returns ``(F, 2)``.
    """
    if lengths is None:
        lengths = edge_lengths(mesh, metric)
    angles = corner_angles(mesh, lengths)
    _check_degenerate(mesh, angles)
    lf = _face_lengths(mesh, lengths)
    frame = local_frames(lf, angles)
    r = metric.radii[mesh.faces]
    return radical_center(frame, r)


def local_frames(lf, angles) -> np.ndarray:
    nf = len(lf)
    p = np.zeros((nf, 3, 2))
    p[:, 1, 0] = lf[:, 2]
    p[:, 2, 0] = lf[:, 1] * np.cos(angles[:, 0])
    p[:, 2, 1] = lf[:, 1] * np.sin(angles[:, 0])
    return p


def radical_center(p, r) -> np.ndarray:
    """Point with equal power w.r.t. three circles, for stacked triangles.

    ``p`` is ``(F, 3, 2)`` centers, ``r`` is ``(F, 3)`` radii.
    """
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    pw = np.sum(p**2, axis=2) - r**2
    rhs = 0.5 * np.column_stack([pw[:, 1] - pw[:, 0], pw[:, 2] - pw[:, 0]])
    mat = np.stack([d1, d2], axis=1)
    return np.linalg.solve(mat, rhs[..., None])[..., 0]


def face_center_heights(mesh: Mesh, metric: PackingMetric, lengths=None) -> np.ndarray:
    """Signed distance from each face's power center to each of its edges.

    Column ``k`` is the edge opposite corner ``k``; positive means the center
    is on the face's side of that edge.
    """
    if lengths is None:
        lengths = edge_lengths(mesh, metric)
    angles = corner_angles(mesh, lengths)
    _check_degenerate(mesh, angles)
    lf = _face_lengths(mesh, lengths)
    p = local_frames(lf, angles)
    c = radical_center(p, metric.radii[mesh.faces])
    start = np.roll(p, -1, axis=1)
    end = np.roll(p, -2, axis=1)
    d = end - start
    rel = c[:, None, :] - start
    cross = d[..., 0] * rel[..., 1] - d[..., 1] * rel[..., 0]
    return cross / lf


def dual_edge_lengths(mesh: Mesh, metric: PackingMetric, lengths=None) -> np.ndarray:
    """Signed length of the segment joining adjacent power centers.

    Boundary edges get the single-face distance only.
    """
    return _sum_to_edges(mesh, face_center_heights(mesh, metric, lengths))


def write_matrix(path, matrix) -> None:
    """Coordinate dump ``i j value``, 0-based, sorted by ``(i, j)``."""
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for k in order:
            fh.write(f"{coo.row[k]} {coo.col[k]} {coo.data[k]!r}\n")
