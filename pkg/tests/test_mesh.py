import numpy as np
import pytest

from calabi_param import mesh as meshmod, shapes
from calabi_param.mesh import Mesh, MeshError, NonManifoldError, topology


def test_grid_topology():
    t = topology(shapes.grid(4, 4))
    assert (t.n_vertices, t.n_faces) == (25, 32)
    assert t.n_edges == 25 + 32 - 1
    assert t.is_disk and t.genus == 0


@pytest.mark.parametrize("make, chi, genus, loops", [
    (lambda: shapes.icosphere(1), 2, 0, 0),
    (lambda: shapes.tetrahedron(), 2, 0, 0),
    (lambda: shapes.torus(6, 5), 0, 1, 0),
    (lambda: shapes.sphere_minus_face(1), 1, 0, 1),
    (lambda: shapes.hemisphere(1), 1, 0, 1),
])
def test_euler_characteristic(make, chi, genus, loops):
    t = topology(make())
    assert t.euler_characteristic == chi
    assert t.genus == genus
    assert t.boundary_loop_count == loops


def test_edge_table_is_consistent():
    m = shapes.hemisphere(1)
    assert np.all(m.edges[:, 0] < m.edges[:, 1])
    for f, (a, b, c) in enumerate(m.faces):
        for k, (p, q) in enumerate([(b, c), (c, a), (a, b)]):
            e = m.face_edges[f, k]
            assert tuple(m.edges[e]) == (min(p, q), max(p, q))
            assert f in m.edge_faces[e]
    assert np.array_equal(m.boundary_edge, m.edge_faces[:, 1] < 0)


def test_boundary_loop_follows_edges():
    m = shapes.disk(1)
    loop, eids = m.boundary_loops[0], m.boundary_loop_edges[0]
    assert len(loop) == len(eids) == m.boundary_edge.sum()
    for k, e in enumerate(eids):
        assert set(m.edges[e]) == {loop[k], loop[(k + 1) % len(loop)]}


def test_non_manifold_edge_rejected():
    pts = np.random.default_rng(0).normal(size=(5, 3))
    with pytest.raises(NonManifoldError):
        Mesh.from_arrays(pts, [(0, 1, 2), (1, 0, 3), (0, 1, 4)])


@pytest.mark.parametrize("faces", [[(0, 1, 5)], [(0, 0, 1)]])
def test_bad_indices_rejected(faces):
    with pytest.raises(MeshError):
        Mesh.from_arrays(np.eye(3), faces)


def test_inconsistent_orientation_rejected():
    pts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
    with pytest.raises(MeshError):
        Mesh.from_arrays(pts, [(0, 1, 2), (1, 2, 3)])


def test_zero_length_edge_rejected():
    with pytest.raises(MeshError):
        Mesh.from_arrays([[0, 0, 0], [0, 0, 0], [0, 1, 0]], [(0, 1, 2)])


def test_face_areas_unit_square(square):
    assert np.allclose(square.face_areas(), 0.5, atol=1e-15)


def test_obj_round_trip(tmp_path):
    m = shapes.grid(3, 2, z=lambda x, y: np.sin(x) * np.cos(3 * y) / 7)
    path = tmp_path / "m.obj"
    meshmod.save_obj(path, m)
    back = meshmod.load_mesh(path)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.faces, m.faces)


def test_obj_reader_handles_slashes_quads_and_negative_indices(tmp_path):
    path = tmp_path / "q.obj"
    path.write_text(
        "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
        "f 1/1/1 2/2/1 3/3/1 -1/-1/1\n"
    )
    data = meshmod.read_obj(path)
    assert data.faces.tolist() == [[0, 1, 2], [0, 2, 3]]
    assert data.face_texcoords.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_with_uv_round_trip(tmp_path):
    m = shapes.grid(2, 2)
    uv = m.vertices[:, :2] * 0.5
    path = tmp_path / "uv.obj"
    meshmod.save_obj(path, m, uv)
    data = meshmod.read_obj(path)
    assert np.array_equal(data.texcoords[data.face_texcoords], uv[m.faces])


def test_torus_cut_gives_disk():
    t = shapes.torus(8, 8)
    cut = meshmod.cut_to_disk(t)
    topo = topology(cut)
    assert topo.euler_characteristic == 1 and topo.boundary_loop_count == 1
    assert cut.n_faces == t.n_faces
    # every new vertex maps back to the original position
    assert np.array_equal(cut.vertices, t.vertices[cut.seam])
    assert np.array_equal(cut.seam[cut.faces], t.faces)


def test_cut_transfers_edge_values():
    t = shapes.torus(5, 6)
    cut = meshmod.cut_to_disk(t)
    moved = meshmod.transfer_edge_values(t, cut, t.original_lengths)
    assert np.allclose(moved, cut.original_lengths, rtol=0, atol=1e-15)


@pytest.mark.parametrize("make", [shapes.icosphere, lambda: shapes.grid(2, 2)])
def test_cut_rejects_non_torus(make):
    with pytest.raises(MeshError):
        meshmod.cut_to_disk(make())
