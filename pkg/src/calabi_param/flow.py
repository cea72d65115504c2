"""Prescribed-curvature Calabi and Ricci flows on circle packing metrics."""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .geometry import GeometryError, corner_angles, dual_laplacian, vertex_curvatures
from .mesh import Mesh, topology
from .metric import MetricError, PackingMetric, check_triangle_inequalities, edge_lengths

log = logging.getLogger(__name__)


class FlowError(RuntimeError):
    pass


class FlowKind(str, enum.Enum):
    CALABI = "calabi"
    RICCI = "ricci"


class BoundaryMode(str, enum.Enum):
    FIXED_CORNERS = "rect"
    CIRCULAR = "circle"
    FREE = "free"
    CLOSED_GENUS_ONE = "torus"


@dataclass
class FlowConfig:
    flow_kind: FlowKind = FlowKind.CALABI
    boundary_mode: BoundaryMode = BoundaryMode.FREE
    epsilon: float = 1e-6
    max_iterations: int = 20000
    step: float = 0.05
    backtracking: bool = True
    shrink: float = 0.5
    max_halvings: int = 40
    # (boundary vertex, target curvature) pairs for FIXED_CORNERS
    corner_spec: list = field(default_factory=list)
    # "none" (plain gradient descent) or "cg" (nonlinear conjugate gradient,
    # Calabi only); "cg" adapts the step between iterations
    accel: str = "none"

    def __post_init__(self):
        self.flow_kind = FlowKind(self.flow_kind)
        self.boundary_mode = BoundaryMode(self.boundary_mode)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.accel not in ("none", "cg"):
            raise ValueError(f"unknown acceleration {self.accel!r}")
        if self.accel == "cg" and self.flow_kind is not FlowKind.CALABI:
            raise ValueError("conjugate gradient acceleration applies to the Calabi flow only")
        if self.boundary_mode is BoundaryMode.FIXED_CORNERS:
            total = sum(k for _, k in self.corner_spec)
            if abs(total - 2 * np.pi) > 1e-12:
                raise ValueError(f"corner target curvatures sum to {total!r}, not 2*pi")


@dataclass
class FlowTrace:
    iterations: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    max_residual: list = field(default_factory=list)
    step: list = field(default_factory=list)
    converged: bool = False
    status: str = "not started"

    def record(self, it, energy, residual, step):
        self.iterations.append(it)
        self.energy.append(energy)
        self.max_residual.append(residual)
        self.step.append(step)

    @property
    def n_iterations(self) -> int:
        return self.iterations[-1] if self.iterations else 0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "energy", "max_residual", "step"])
            for row in zip(self.iterations, self.energy, self.max_residual, self.step):
                w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])


# ------------------------------------------------------------- energy and directions

def calabi_energy(K, K_target) -> float:
    res = np.asarray(K_target, dtype=float) - np.asarray(K, dtype=float)
    return float(res @ res)


def calabi_direction(L, K, K_target) -> np.ndarray:
    """Descent direction ``L^T (K_target - K)`` for the Calabi energy."""
    res = np.asarray(K_target, dtype=float) - np.asarray(K, dtype=float)
    if L.shape[0] != len(res):
        raise ValueError(f"Laplacian is {L.shape}, curvature vector has {len(res)} entries")
    return L.T @ res


def ricci_direction(K, K_target) -> np.ndarray:
    return np.asarray(K_target, dtype=float) - np.asarray(K, dtype=float)


def apply_free_boundary(du, mesh: Mesh) -> np.ndarray:
    out = np.array(du, dtype=float)
    out[mesh.boundary_vertex] = 0.0
    return out


# ------------------------------------------------------------- targets

def targets_fixed(mesh: Mesh, corner_spec) -> np.ndarray:
    """Zero curvature everywhere except at the listed boundary corners."""
    target = np.zeros(mesh.n_vertices)
    for v, k in corner_spec:
        v = int(v)
        if not 0 <= v < mesh.n_vertices:
            raise FlowError(f"corner vertex {v} out of range")
        if not mesh.boundary_vertex[v]:
            raise FlowError(f"corner vertex {v} is not on the boundary")
        target[v] = k
    total = target.sum()
    if abs(total - 2 * np.pi) > 1e-12:
        raise FlowError(f"corner targets sum to {total!r}; they must sum to 2*pi")
    return target


def targets_circular(mesh: Mesh, lengths) -> np.ndarray:
    """Boundary curvature proportional to the two adjacent boundary edges.

    ``K_i = c (l_prev + l_next)`` with ``c = pi / boundary length`` so the
    boundary targets sum to ``2 pi``.
    """
    if len(mesh.boundary_loops) != 1:
        raise FlowError(
            f"circular boundary needs exactly one boundary loop, found {len(mesh.boundary_loops)}"
        )
    loop = mesh.boundary_loops[0]
    seg = np.asarray(lengths)[mesh.boundary_loop_edges[0]]  # seg[k]: loop[k] -> loop[k+1]
    c = np.pi / seg.sum()
    target = np.zeros(mesh.n_vertices)
    target[loop] = c * (seg + np.roll(seg, 1))
    return target


# ------------------------------------------------------------- main loop

@dataclass
class _State:
    u: np.ndarray
    lengths: np.ndarray
    angles: np.ndarray
    K: np.ndarray
    target: np.ndarray

    @property
    def residual(self):
        return self.target - self.K

    @property
    def energy(self):
        r = self.residual
        return float(r @ r)

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residual)))


class _Problem:
    def __init__(self, mesh: Mesh, metric: PackingMetric, config: FlowConfig):
        self.mesh, self.metric, self.config = mesh, metric, config
        mode = config.boundary_mode
        topo = topology(mesh)
        self.fixed_target = None
        if mode is BoundaryMode.CLOSED_GENUS_ONE:
            if not topo.is_closed or topo.genus != 1:
                raise FlowError(
                    f"torus mode needs a closed genus-one mesh (chi={topo.euler_characteristic}, "
                    f"boundary loops={topo.boundary_loop_count})"
                )
            self.fixed_target = np.zeros(mesh.n_vertices)
        elif topo.is_closed:
            raise FlowError(f"boundary mode {mode.value!r} needs a mesh with boundary")
        elif mode is BoundaryMode.FIXED_CORNERS:
            self.fixed_target = targets_fixed(mesh, config.corner_spec)
            if abs(2 * np.pi * topo.euler_characteristic - 2 * np.pi) > 1e-12:
                raise FlowError("fixed-corner targets are only admissible on a disk")
        elif mode is BoundaryMode.CIRCULAR:
            if len(mesh.boundary_loops) != 1:
                raise FlowError("circular boundary needs exactly one boundary loop")
        self.interior = mesh.interior_vertex

    def evaluate(self, u) -> _State | None:
        """Geometry at ``u``; ``None`` if the metric leaves the valid region."""
        m = self.metric.with_u(u)
        try:
            lengths = edge_lengths(self.mesh, m)
        except MetricError:
            return None
        if check_triangle_inequalities(self.mesh, lengths):
            return None
        angles = corner_angles(self.mesh, lengths)
        K = vertex_curvatures(self.mesh, angles)
        mode = self.config.boundary_mode
        if mode is BoundaryMode.CIRCULAR:
            target = targets_circular(self.mesh, lengths)
        elif mode is BoundaryMode.FREE:
            target = np.where(self.interior, 0.0, K)
        else:
            target = self.fixed_target
        return _State(np.asarray(u, dtype=float), lengths, angles, K, target)

    def direction(self, s: _State) -> np.ndarray:
        if self.config.flow_kind is FlowKind.CALABI:
            L = dual_laplacian(self.mesh, self.metric.with_u(s.u), s.lengths, s.angles)
            du = calabi_direction(L, s.K, s.target)
            if self.config.accel == "cg" and self.config.boundary_mode is BoundaryMode.CIRCULAR:
                du = du - self._circular_target_adjoint(s)
        else:
            du = ricci_direction(s.K, s.target)
        if self.config.boundary_mode is BoundaryMode.FREE:
            du = apply_free_boundary(du, self.mesh)
        return du

    def _circular_target_adjoint(self, s: _State) -> np.ndarray:
        """``(dK_target/du)^T (K_target - K)`` for length-dependent circle targets.

        Conjugate gradient needs the exact gradient of the energy it line
        searches; the targets move with the boundary edge lengths.
        """
        mesh = self.mesh
        loop, eids = mesh.boundary_loops[0], mesh.boundary_loop_edges[0]
        seg = s.lengths[eids]
        total = seg.sum()
        rb = s.residual[loop]
        # target_i = pi (seg_i + seg_{i-1}) / total
        coef = np.pi / total * (rb + np.roll(rb, -1)) - np.pi / total**2 * (rb @ (seg + np.roll(seg, 1)))
        r = np.exp(s.u)
        a, b = mesh.edges[eids, 0], mesh.edges[eids, 1]
        cross = r[a] * r[b] * self.metric.cosines[eids]
        out = np.zeros(mesh.n_vertices)
        np.add.at(out, a, coef * (r[a] ** 2 + cross) / seg)
        np.add.at(out, b, coef * (r[b] ** 2 + cross) / seg)
        return out

    def center(self, s: _State) -> _State:
        """Remove the global scale mode; curvatures and targets are unchanged."""
        if self.config.boundary_mode is BoundaryMode.FREE:
            # boundary factors anchor the scale and must not move
            return s
        shift = s.u[self.interior].mean()
        return _State(s.u - shift, s.lengths * np.exp(-shift), s.angles, s.K, s.target)


def _acceptable(cand, state, config) -> bool:
    return cand is not None and (not config.backtracking or cand.energy < state.energy)


def _backtrack(prob, state, d, step, config):
    for _ in range(config.max_halvings + 1):
        cand = prob.evaluate(state.u + step * d)
        if _acceptable(cand, state, config):
            return cand, step
        step *= config.shrink
    return None


def _interpolating_search(prob, state, d, slope, step, config):
    """Backtracking plus one quadratic-interpolation refinement.

    ``slope`` is the energy's directional derivative at zero.  The trial
    step is shrunk until the energy decreases, then the minimiser of the
    quadratic through (0, E0, slope) and (t, E(t)) is tried and kept if it
    does better.
    """
    found = _backtrack(prob, state, d, step, config)
    if found is None:
        return None, step
    cand, t = found
    curv = cand.energy - state.energy - slope * t
    if curv > 0:
        t_star = -slope * t * t / (2 * curv)
        if 0 < t_star != t:
            refined = prob.evaluate(state.u + t_star * d)
            if _acceptable(refined, state, config) and refined.energy < cand.energy:
                return refined, t_star
    return cand, t


def run_flow(mesh: Mesh, metric: PackingMetric, config: FlowConfig):
    """Evolve ``metric.u`` until ``max |K - K_target| < epsilon``.

    Returns ``(metric, trace)``.  Hitting ``max_iterations`` is reported
    through ``trace.converged``; a step that cannot be repaired by halving
    raises :class:`FlowError`.
    """
    prob = _Problem(mesh, metric, config)
    state = prob.evaluate(np.array(metric.u, dtype=float))
    if state is None:
        raise FlowError("initial metric violates the triangle inequality")
    trace = FlowTrace()
    trace.record(0, state.energy, state.max_residual, 0.0)

    step = config.step
    prev_g = prev_d = None
    it = 0
    while True:
        if state.max_residual < config.epsilon:
            trace.converged = True
            trace.status = f"converged after {it} iterations"
            break
        if it >= config.max_iterations:
            trace.status = f"not converged after {it} iterations (max residual {state.max_residual:.3e})"
            break
        try:
            g = prob.direction(state)
        except GeometryError as exc:
            raise FlowError(f"iteration {it}: {exc}") from exc

        d = g
        if config.accel == "cg":
            if prev_g is not None:
                beta = max(0.0, g @ (g - prev_g) / (prev_g @ prev_g))
                d = g + beta * prev_d
                if d @ g <= 0:
                    d = g
            step = 2 * step
        else:
            step = config.step

        if not np.any(d):
            trace.converged = state.max_residual < config.epsilon
            trace.status = f"stationary after {it} iterations (max residual {state.max_residual:.3e})"
            break

        if config.accel == "cg":
            accepted, step = _interpolating_search(prob, state, d, -2.0 * (g @ d), step, config)
        else:
            accepted = _backtrack(prob, state, d, step, config)
            step = accepted[1] if accepted else step
            accepted = accepted[0] if accepted else None
        if accepted is None:
            if config.accel == "cg" and prev_g is not None:
                # restart along the plain direction before giving up
                prev_g = prev_d = None
                step = config.step
                continue
            raise FlowError(
                f"iteration {it}: no admissible step after {config.max_halvings} halvings "
                f"(max residual {state.max_residual:.3e})"
            )
        it += 1
        state = prob.center(accepted)
        trace.record(it, state.energy, state.max_residual, step)
        prev_g, prev_d = g, d
        if it % 500 == 0:
            log.info("iter %d  energy %.3e  max residual %.3e  step %.3g",
                     it, state.energy, state.max_residual, step)

    log.info("%s", trace.status)
    return metric.with_u(state.u), trace
