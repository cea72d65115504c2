"""Indexed triangle mesh with the connectivity the flow needs.

Faces are stored counterclockwise.  For face ``f = (a, b, c)`` corner ``k``
is ``faces[f, k]`` and ``face_edges[f, k]`` is the edge *opposite* that
corner, i.e. the edge joining the two other corners.  Most per-face arrays
in the package follow this corner/opposite-edge convention.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Invalid mesh input or an unsupported topology."""


class NonManifoldError(MeshError):
    pass


@dataclass(frozen=True)
class TopologyReport:
    n_vertices: int
    n_edges: int
    n_faces: int
    euler_characteristic: int
    genus: int | None
    boundary_loop_count: int

    @property
    def is_closed(self) -> bool:
        return self.boundary_loop_count == 0

    @property
    def is_disk(self) -> bool:
        return self.euler_characteristic == 1 and self.boundary_loop_count == 1


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable manifold triangle mesh.

    Use :meth:`from_arrays` (or :func:`load_obj`) rather than the raw
    constructor; it derives edges, adjacency and boundary data and checks
    the manifold invariants.
    """

    vertices: np.ndarray
    faces: np.ndarray
    edges: np.ndarray
    face_edges: np.ndarray
    edge_faces: np.ndarray
    original_lengths: np.ndarray
    boundary_vertex: np.ndarray
    boundary_edge: np.ndarray
    boundary_loops: tuple
    # boundary_loop_edges[k][i] joins boundary_loops[k][i] to the next loop vertex
    boundary_loop_edges: tuple
    # for meshes produced by cut_to_disk: new vertex id -> source vertex id
    seam: np.ndarray | None = field(default=None)

    @classmethod
    def from_arrays(cls, vertices, faces, seam=None) -> "Mesh":
        vertices = np.array(vertices, dtype=float).reshape(-1, 3)
        faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
        nv = len(vertices)
        if len(faces) == 0:
            raise MeshError("mesh has no faces")
        if faces.min() < 0 or faces.max() >= nv:
            raise MeshError("face index out of range")
        for f, (a, b, c) in enumerate(faces):
            if a == b or b == c or a == c:
                raise MeshError(f"degenerate face {f}: repeated vertex index")

        # half-edges: corner k of face f owns the directed edge opposite it,
        # running faces[f, k+1] -> faces[f, k+2]
        tail = np.roll(faces, -1, axis=1).ravel()
        head = np.roll(faces, -2, axis=1).ravel()
        lo = np.minimum(tail, head)
        hi = np.maximum(tail, head)
        keys = lo * nv + hi
        uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            e = int(np.argmax(counts > 2))
            raise NonManifoldError(
                f"non-manifold edge ({uniq[e] // nv}, {uniq[e] % nv}) "
                f"shared by {counts[e]} faces"
            )
        edges = np.stack([uniq // nv, uniq % nv], axis=1)
        face_edges = inverse.reshape(-1, 3)

        ne = len(edges)
        edge_faces = np.full((ne, 2), -1, dtype=np.int64)
        fill = np.zeros(ne, dtype=np.int64)
        direction = np.zeros((ne, 2), dtype=np.int64)
        for h, e in enumerate(inverse):
            edge_faces[e, fill[e]] = h // 3
            direction[e, fill[e]] = 1 if tail[h] < head[h] else -1
            fill[e] += 1
        interior = fill == 2
        if np.any(interior & (direction[:, 0] == direction[:, 1])):
            e = int(np.argmax(interior & (direction[:, 0] == direction[:, 1])))
            raise MeshError(
                f"inconsistent face orientation across edge {tuple(edges[e])}"
            )

        lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
        if np.any(lengths <= 0):
            e = int(np.argmax(lengths <= 0))
            raise MeshError(f"zero-length edge {tuple(edges[e])}")

        boundary_edge = fill == 1
        boundary_vertex = np.zeros(nv, dtype=bool)
        boundary_vertex[edges[boundary_edge].ravel()] = True

        loops = _trace_boundary_loops(tail, head, inverse, boundary_edge, nv)
        out_edge = {int(t): int(e) for t, e, b in zip(tail, inverse, boundary_edge[inverse]) if b}
        loop_edges = []
        for loop in loops:
            ids = np.array([out_edge[int(v)] for v in loop], dtype=np.int64)
            ids.setflags(write=False)
            loop_edges.append(ids)

        for arr in (vertices, faces, edges, face_edges, edge_faces, lengths,
                    boundary_vertex, boundary_edge):
            arr.setflags(write=False)
        if seam is not None:
            seam = np.asarray(seam, dtype=np.int64)
            seam.setflags(write=False)
        return cls(vertices, faces, edges, face_edges, edge_faces, lengths,
                   boundary_vertex, boundary_edge, loops, tuple(loop_edges), seam)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def interior_vertex(self) -> np.ndarray:
        return ~self.boundary_vertex

    def edge_index(self) -> dict:
        """Map sorted vertex pair -> edge id."""
        return {(int(a), int(b)): e for e, (a, b) in enumerate(self.edges)}

    def face_areas(self, lengths=None) -> np.ndarray:
        """Heron areas from per-edge lengths (original lengths by default)."""
        if lengths is None:
            lengths = self.original_lengths
        lf = np.asarray(lengths)[self.face_edges]
        a, b, c = np.sort(lf, axis=1)[:, ::-1].T
        # Kahan's numerically stable Heron with a >= b >= c
        prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
        return 0.25 * np.sqrt(np.maximum(prod, 0.0))

    def vertex_neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            nbrs[a].append(int(b))
            nbrs[b].append(int(a))
        return nbrs


def _trace_boundary_loops(tail, head, edge_of_half, boundary_edge, nv) -> tuple:
    is_bd = boundary_edge[edge_of_half]
    nxt = {}
    for t, h in zip(tail[is_bd], head[is_bd]):
        t, h = int(t), int(h)
        if t in nxt:
            raise NonManifoldError(f"boundary pinches at vertex {t}")
        nxt[t] = h
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        v = nxt[start]
        while v != start:
            if v in seen or v not in nxt:
                raise NonManifoldError(f"boundary is not a set of simple loops near vertex {v}")
            loop.append(v)
            seen.add(v)
            v = nxt[v]
        arr = np.array(loop, dtype=np.int64)
        arr.setflags(write=False)
        loops.append(arr)
    return tuple(loops)


def topology(mesh: Mesh) -> TopologyReport:
    chi = mesh.n_vertices - mesh.n_edges + mesh.n_faces
    nb = len(mesh.boundary_loops)
    genus = None
    if nb == 0:
        if chi % 2:
            raise MeshError(f"closed mesh with odd Euler characteristic {chi}")
        genus = (2 - chi) // 2
    else:
        # orientable surface with boundary: chi = 2 - 2g - b
        genus = (2 - chi - nb) // 2
    return TopologyReport(mesh.n_vertices, mesh.n_edges, mesh.n_faces, chi, genus, nb)


# ---------------------------------------------------------------- OBJ I/O

@dataclass
class ObjData:
    vertices: np.ndarray
    faces: np.ndarray
    texcoords: np.ndarray | None = None
    face_texcoords: np.ndarray | None = None


def read_obj(path) -> ObjData:
    """Parse ``v``/``vt``/``f`` records; polygons are fan-triangulated."""
    verts, tex, faces, ftex = [], [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "v":
                    verts.append([float(x) for x in parts[1:4]])
                    if len(verts[-1]) != 3:
                        raise ValueError("vertex needs 3 coordinates")
                elif parts[0] == "vt":
                    tex.append([float(x) for x in parts[1:3]])
                elif parts[0] == "f":
                    vi, ti = [], []
                    for tok in parts[1:]:
                        fields = tok.split("/")
                        vi.append(_obj_index(fields[0], len(verts)))
                        if len(fields) > 1 and fields[1]:
                            ti.append(_obj_index(fields[1], len(tex)))
                    if len(vi) < 3:
                        raise ValueError("face needs at least 3 vertices")
                    for k in range(1, len(vi) - 1):
                        faces.append([vi[0], vi[k], vi[k + 1]])
                        if len(ti) == len(vi):
                            ftex.append([ti[0], ti[k], ti[k + 1]])
            except ValueError as exc:
                raise MeshError(f"{path}:{lineno}: cannot parse OBJ record: {exc}") from None
    if not verts or not faces:
        raise MeshError(f"{path}: no vertices or faces found")
    data = ObjData(np.array(verts, dtype=float), np.array(faces, dtype=np.int64))
    if tex and len(ftex) == len(faces):
        data.texcoords = np.array(tex, dtype=float)
        data.face_texcoords = np.array(ftex, dtype=np.int64)
    return data


def _obj_index(tok: str, count: int) -> int:
    i = int(tok)
    return i - 1 if i > 0 else count + i


def load_mesh(path) -> Mesh:
    data = read_obj(path)
    return Mesh.from_arrays(data.vertices, data.faces)


def save_obj(path, mesh: Mesh, uv=None) -> None:
    """Write the mesh (optionally with one ``vt`` per vertex) as OBJ."""
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    if uv is not None:
        lines += [f"vt {u!r} {v!r}" for u, v in np.asarray(uv, dtype=float).tolist()]
        lines += [f"f {a}/{a} {b}/{b} {c}/{c}" for a, b, c in (mesh.faces + 1).tolist()]
    else:
        lines += [f"f {a} {b} {c}" for a, b, c in (mesh.faces + 1).tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- cutting

def cut_graph(mesh: Mesh) -> np.ndarray:
    """Boolean edge mask of a tree-cotree cut graph on a closed mesh.

    A BFS spanning tree of the vertices and a BFS spanning tree of the
    faces (through edges not in the vertex tree) leave ``2g`` generator
    edges.  The cut graph is the set of edges not crossed by the face tree,
    with dangling tree branches pruned, so it consists of the generator
    loops only.
    """
    nv, ne = mesh.n_vertices, mesh.n_edges
    adj: list[list[tuple[int, int]]] = [[] for _ in range(nv)]
    for e, (a, b) in enumerate(mesh.edges):
        adj[a].append((int(b), e))
        adj[b].append((int(a), e))

    in_tree = np.zeros(ne, dtype=bool)
    seen = np.zeros(nv, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w, e in sorted(adj[v]):
            if not seen[w]:
                seen[w] = True
                in_tree[e] = True
                queue.append(w)

    in_cotree = np.zeros(ne, dtype=bool)
    fseen = np.zeros(mesh.n_faces, dtype=bool)
    fseen[0] = True
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for e in mesh.face_edges[f]:
            if in_tree[e]:
                continue
            g = [x for x in mesh.edge_faces[e] if x != f][0]
            if not fseen[g]:
                fseen[g] = True
                in_cotree[e] = True
                queue.append(g)

    cut = ~in_cotree
    degree = np.zeros(nv, dtype=np.int64)
    np.add.at(degree, mesh.edges[cut].ravel(), 1)
    leaves = deque(np.flatnonzero(degree == 1).tolist())
    while leaves:
        v = leaves.popleft()
        if degree[v] != 1:
            continue
        for w, e in adj[v]:
            if cut[e]:
                cut[e] = False
                degree[v] -= 1
                degree[w] -= 1
                if degree[w] == 1:
                    leaves.append(w)
                break
    return cut


def cut_to_disk(mesh: Mesh) -> Mesh:
    """Slice a closed genus >= 1 mesh open along a tree-cotree cut graph.

    Vertices on the cut are duplicated, one copy per wedge of faces that
    remain glued around them.  The returned mesh carries ``seam`` mapping
    each new vertex to its source vertex; faces keep their order.
    """
    topo = topology(mesh)
    if not topo.is_closed:
        raise MeshError("cut_to_disk needs a closed mesh; this one has boundary")
    if topo.genus == 0:
        raise MeshError("sphere-topology meshes are not supported for cutting")

    cut = cut_graph(mesh)
    nf = mesh.n_faces
    parent = np.arange(3 * nf)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    corner = {}
    for f in range(nf):
        for k in range(3):
            corner[f, int(mesh.faces[f, k])] = 3 * f + k
    for e in np.flatnonzero(~cut):
        f, g = mesh.edge_faces[e]
        for v in mesh.edges[e]:
            ra, rb = find(corner[f, int(v)]), find(corner[g, int(v)])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    roots = np.array([find(c) for c in range(3 * nf)])
    # number new vertices by first appearance in corner order
    _, first, labels = np.unique(roots, return_index=True, return_inverse=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    new_faces = relabel[labels].reshape(nf, 3)
    seam = np.empty(len(order), dtype=np.int64)
    seam[new_faces.ravel()] = mesh.faces.ravel()
    out = Mesh.from_arrays(mesh.vertices[seam], new_faces, seam=seam)
    if not topology(out).is_disk:
        raise MeshError("cutting did not produce a topological disk")
    return out


def transfer_edge_values(src: Mesh, dst: Mesh, values) -> np.ndarray:
    """Copy per-edge values of ``src`` onto a mesh cut from it."""
    if dst.seam is None:
        raise MeshError("destination mesh has no seam map")
    index = src.edge_index()
    values = np.asarray(values)
    a = dst.seam[dst.edges[:, 0]]
    b = dst.seam[dst.edges[:, 1]]
    ids = [index[(int(min(x, y)), int(max(x, y)))] for x, y in zip(a, b)]
    return values[ids]
