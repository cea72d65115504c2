import math

import numpy as np
import pytest

from calabi_param import flow, geometry, metric, shapes
from calabi_param.flow import FlowConfig, FlowError, run_flow


def bumped_grid(n=4, bump=0.2):
    mesh = shapes.grid(n, n)
    m = metric.initial_inversive_metric(mesh)
    u = m.u.copy()
    u[len(u) // 2] += bump
    return mesh, m.with_u(u)


def rect(n=4, **kw):
    return FlowConfig(boundary_mode="rect", corner_spec=[(c, math.pi / 2) for c in shapes.grid_corners(n, n)], **kw)


def test_energy_and_directions():
    K, T = np.array([1.0, 2.0]), np.array([0.0, 0.0])
    assert flow.calabi_energy(K, T) == 5.0
    assert np.array_equal(flow.ricci_direction(K, T), [-1.0, -2.0])
    with pytest.raises(ValueError):
        flow.calabi_direction(np.eye(3), K, T)


def test_calabi_direction_is_energy_descent(rng):
    from conftest import perturbed_metric
    mesh = shapes.icosphere(1)
    m = perturbed_metric(mesh, rng)
    target = np.full(mesh.n_vertices, 4 * math.pi / mesh.n_vertices)
    K = geometry.curvatures(mesh, m)
    d = flow.calabi_direction(geometry.dual_laplacian(mesh, m), K, target)
    h = 1e-7
    dE = (flow.calabi_energy(geometry.curvatures(mesh, m.with_u(m.u + h * d)), target)
          - flow.calabi_energy(K, target)) / h
    assert dE < 0
    assert dE == pytest.approx(-2 * d @ d, rel=1e-4)


def test_fixed_targets():
    mesh = shapes.grid(2, 2)
    t = flow.targets_fixed(mesh, [(c, math.pi / 2) for c in shapes.grid_corners(2, 2)])
    assert t.sum() == pytest.approx(2 * math.pi)
    with pytest.raises(FlowError, match="not on the boundary"):
        flow.targets_fixed(mesh, [(4, 2 * math.pi)])
    with pytest.raises(FlowError, match="sum"):
        flow.targets_fixed(mesh, [(0, math.pi)])


def test_fixed_config_checks_sum():
    with pytest.raises(ValueError):
        FlowConfig(boundary_mode="rect", corner_spec=[(0, 1.0)])


def test_cg_only_for_calabi():
    with pytest.raises(ValueError):
        FlowConfig(flow_kind="ricci", accel="cg")


def test_circular_targets_regular_polygon():
    n = 7
    mesh = shapes.polygon_fan(n)
    t = flow.targets_circular(mesh, mesh.original_lengths)
    assert np.allclose(t[1:], 2 * math.pi / n, rtol=1e-14)
    assert t[0] == 0


def test_circular_targets_adjacent_lengths():
    mesh = shapes.polygon_fan(5)
    lengths = np.ones(mesh.n_edges)
    loop, eids = mesh.boundary_loops[0], mesh.boundary_loop_edges[0]
    # boundary total 10; the vertex between segments 1 and 3 gets 4 pi / 10
    lengths[eids] = [1, 3, 2, 2, 2]
    t = flow.targets_circular(mesh, lengths)
    assert t[loop[1]] == pytest.approx(4 * math.pi / 10)
    assert t[loop].sum() == pytest.approx(2 * math.pi)


def test_rect_recovers_flat_metric():
    mesh, m = bumped_grid()
    final, trace = run_flow(mesh, m, rect())
    assert trace.converged
    u0 = metric.initial_inversive_metric(mesh).u
    a, b = final.u - final.u.mean(), u0 - u0.mean()
    assert np.max(np.abs(a - b)) < 1e-4
    assert np.all(np.diff(trace.energy) < 0)


@pytest.mark.parametrize("kw", [dict(flow_kind="ricci"), dict(accel="cg")])
def test_variants_converge(kw):
    mesh, m = bumped_grid()
    _, trace = run_flow(mesh, m, rect(**kw))
    assert trace.converged


def test_already_converged_returns_immediately():
    mesh = shapes.grid(3, 3)
    m = metric.initial_inversive_metric(mesh)
    final, trace = run_flow(mesh, m, rect(3))
    assert trace.converged and trace.n_iterations == 0
    assert np.array_equal(final.u, m.u)


def test_free_boundary_keeps_boundary_u():
    mesh = shapes.hemisphere(1)
    m = metric.initial_inversive_metric(mesh)
    final, trace = run_flow(mesh, m, FlowConfig(boundary_mode="free", epsilon=1e-8, accel="cg"))
    assert trace.converged
    b = mesh.boundary_vertex
    assert np.array_equal(final.u[b], m.u[b])
    K = geometry.curvatures(mesh, final)
    assert np.max(np.abs(K[~b])) < 1e-8


def test_iteration_budget_reported():
    mesh, m = bumped_grid()
    _, trace = run_flow(mesh, m, rect(max_iterations=3))
    assert not trace.converged and trace.n_iterations == 3
    assert "not converged" in trace.status


def test_mode_topology_checks():
    with pytest.raises(FlowError):
        run_flow(shapes.icosphere(1), metric.initial_inversive_metric(shapes.icosphere(1)), FlowConfig())
    g = shapes.grid(2, 2)
    with pytest.raises(FlowError):
        run_flow(g, metric.initial_inversive_metric(g), FlowConfig(boundary_mode="torus"))


def test_trace_csv(tmp_path):
    mesh, m = bumped_grid()
    _, trace = run_flow(mesh, m, rect(max_iterations=5))
    trace.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iter,energy,max_residual,step"
    assert len(lines) == 7
