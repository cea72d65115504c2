import numpy as np
import pytest

from calabi_param import metric, shapes


def perturbed_metric(mesh, rng, scale=0.05):
    """Initial packing with random u noise, redrawn until every face is valid."""
    base = metric.initial_inversive_metric(mesh)
    for _ in range(100):
        m = base.with_u(base.u + rng.uniform(-scale, scale, mesh.n_vertices))
        try:
            lengths = metric.edge_lengths(mesh, m)
        except metric.MetricError:
            continue
        if not metric.check_triangle_inequalities(mesh, lengths):
            return m
        scale *= 0.7
    raise RuntimeError("could not draw a valid perturbed metric")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def square():
    # unit square split along the 0-2 diagonal
    return shapes.grid(1, 1)


@pytest.fixture
def triangle345():
    from calabi_param.mesh import Mesh
    return Mesh.from_arrays([[0, 0, 0], [4, 0, 0], [4, 3, 0]], [(0, 1, 2)])
