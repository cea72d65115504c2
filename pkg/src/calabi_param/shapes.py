"""Small procedural meshes used by the tests, the acceptance suite and demos."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh


def grid(nx: int, ny: int, width: float = 1.0, height: float = 1.0, z=None) -> Mesh:
    """Planar ``nx`` x ``ny`` quad grid, each quad split along its diagonal.

    Vertex ``j * (nx + 1) + i`` sits at column ``i``, row ``j``.  ``z`` may be
    a callable ``z(x, y)`` giving a height field.
    """
    xs, ys = np.meshgrid(np.linspace(0, width, nx + 1), np.linspace(0, height, ny + 1))
    x, y = xs.ravel(), ys.ravel()
    zz = np.zeros_like(x) if z is None else np.asarray(z(x, y), dtype=float)
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b, c, d = a + 1, a + nx + 2, a + nx + 1
            faces += [(a, b, c), (a, c, d)]
    return Mesh.from_arrays(np.column_stack([x, y, zz]), faces)


def grid_corners(nx: int, ny: int) -> list[int]:
    return [0, nx, (nx + 1) * (ny + 1) - 1, ny * (nx + 1)]


def torus(n_major: int = 8, n_minor: int = 8, major: float = 2.0, minor: float = 1.0) -> Mesh:
    """Torus of revolution triangulated as a wrapped grid."""
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, vv = np.meshgrid(u, v, indexing="ij")
    rad = major + minor * np.cos(vv)
    pts = np.column_stack([(rad * np.cos(uu)).ravel(), (rad * np.sin(uu)).ravel(),
                           (minor * np.sin(vv)).ravel()])
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            faces += [(a, b, c), (a, c, d)]
    return Mesh.from_arrays(pts, faces)


def tetrahedron(side: float = 1.0) -> Mesh:
    pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    pts *= side / (2 * np.sqrt(2))
    return Mesh.from_arrays(pts, [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)])


def _subdivide(pts, faces, levels, project):
    pts = [np.asarray(p, dtype=float) for p in pts]
    for _ in range(levels):
        mids = {}
        new = []

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in mids:
                p = 0.5 * (pts[a] + pts[b])
                pts.append(project(p))
                mids[key] = len(pts) - 1
            return mids[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = new
    return np.array(pts), faces


def icosphere(levels: int = 1, radius: float = 1.0) -> Mesh:
    t = (1 + np.sqrt(5)) / 2
    pts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
           (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    pts = [np.array(p) / np.linalg.norm(p) for p in pts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9),
             (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2),
             (3, 2, 6), (3, 6, 8), (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10),
             (8, 6, 7), (9, 8, 1)]
    pts, faces = _subdivide(pts, faces, levels, lambda p: p / np.linalg.norm(p))
    return Mesh.from_arrays(pts * radius, faces)


def sphere_minus_face(levels: int = 1) -> Mesh:
    """Icosphere with its first face removed (a topological disk)."""
    s = icosphere(levels)
    return Mesh.from_arrays(s.vertices, s.faces[1:])


def hemisphere(levels: int, sectors: int = 8, radius: float = 1.0) -> Mesh:
    """Upper unit hemisphere: a fan of ``sectors`` triangles from the pole to
    the equator, midpoint-subdivided ``levels`` times and projected to the
    sphere.  Face count is ``sectors * 4**levels``."""
    ang = 2 * np.pi * np.arange(sectors) / sectors
    pts = [np.array([0.0, 0.0, 1.0])] + [np.array([np.cos(a), np.sin(a), 0.0]) for a in ang]
    faces = [(0, 1 + k, 1 + (k + 1) % sectors) for k in range(sectors)]
    pts, faces = _subdivide(pts, faces, levels, lambda p: p / np.linalg.norm(p))
    return Mesh.from_arrays(pts * radius, faces)


def polygon_fan(n: int, radius: float = 1.0) -> Mesh:
    """Regular ``n``-gon fanned around a center vertex (vertex 0)."""
    ang = 2 * np.pi * np.arange(n) / n
    pts = np.vstack([[0.0, 0.0, 0.0],
                     np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(n)])])
    faces = [(0, 1 + k, 1 + (k + 1) % n) for k in range(n)]
    return Mesh.from_arrays(pts, faces)


def disk(levels: int, sectors: int = 8, radius: float = 1.0, z=None) -> Mesh:
    """Planar round disk: the hemisphere triangulation flattened by the
    azimuthal equidistant map, so triangles stay well shaped up to the rim."""
    h = hemisphere(levels, sectors)
    p = h.vertices
    polar = np.arccos(np.clip(p[:, 2], -1, 1))
    rho = np.hypot(p[:, 0], p[:, 1])
    scale = np.divide(polar / (np.pi / 2), rho, out=np.zeros_like(rho), where=rho > 0)
    x, y = radius * p[:, 0] * scale, radius * p[:, 1] * scale
    zz = np.zeros_like(x) if z is None else np.asarray(z(x, y), dtype=float)
    return Mesh.from_arrays(np.column_stack([x, y, zz]), h.faces)
