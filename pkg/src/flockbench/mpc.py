"""
Receding-horizon (MPC) flocking controllers.

Four models share one machinery: a finite-horizon double-integrator rollout,
a per-configuration stage cost, and a projected-gradient-descent solver over
the horizon's accelerations.

  - lattice_centralized / lattice_distributed: stage cost penalizes the
    squared deviation of every neighbor distance from the lattice scale d.
  - df_centralized / df_distributed ("declarative flocking"): stage cost is
    mean squared pairwise distance (cohesion) plus an omega-weighted sum of
    inverse squared neighbor distances (separation); no target geometry.

Centralized models optimize all agents' accelerations against one shared
noisy measurement, recomputing the neighbor edge set at every predicted
step.  Distributed models optimize a single agent against its own noisy
view, freezing its neighbor set at the current step and extrapolating
neighbors at constant sensed velocity.

Edge sums follow the ordered-pair convention (each unordered neighbor pair
contributes twice) for the centralized edge-set costs.

The solver uses Armijo backtracking (halving, initial step 1.0), projects
every per-step acceleration onto the a_max ball after each update, and stops
on a projected-gradient tolerance of 1e-6 or after 200 iterations.  Results
are feasible local minimizers; global optimality is not claimed.  Gradients
are analytic (backpropagated through the rollout, including the velocity
clamp); finite differences are used as an independent oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    EPS_DIST,
    EPS_DIST_SQ,
    FlockConfiguration,
    MotionLimits,
    clamp_norm,
)

__all__ = [
    "MpcParams",
    "SolveResult",
    "SolverError",
    "MPC_TAGS",
    "CENTRALIZED_MPC_TAGS",
    "DISTRIBUTED_MPC_TAGS",
    "rollout_centralized",
    "rollout_distributed",
    "lattice_deviation_centralized",
    "lattice_deviation_distributed",
    "cost_df_centralized",
    "cost_df_distributed",
    "mpc_objective",
    "mpc_objective_gradient",
    "solve_mpc",
    "solve_mpc_distributed_all",
]

CENTRALIZED_MPC_TAGS = ("lattice_centralized", "df_centralized")
DISTRIBUTED_MPC_TAGS = ("lattice_distributed", "df_distributed")
MPC_TAGS = CENTRALIZED_MPC_TAGS + DISTRIBUTED_MPC_TAGS

GRAD_TOL = 1e-6
MAX_ITER = 200
ARMIJO_C = 1e-4
MIN_STEP = 2.0**-40


@dataclass(frozen=True)
class MpcParams:
    """Horizon length, control penalty and stage-cost parameters.

    d is the lattice scale (lattice models), omega the separation weight
    (declarative-flocking models); each model validates that its parameter
    is present.
    """

    horizon: int = 3
    lam: float = 1.0
    r: float = 8.4
    d: float | None = 7.0
    omega: float | None = 50.0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.lam <= 0:
            raise ValueError("control penalty lam must be positive")
        if self.r <= 0:
            raise ValueError("interaction radius must be positive")
        if self.d is not None and self.d <= 0:
            raise ValueError("lattice scale d must be positive")
        if self.omega is not None and self.omega <= 0:
            raise ValueError("separation weight omega must be positive")

    def require_for(self, tag: str):
        if tag.startswith("lattice") and self.d is None:
            raise ValueError(f"{tag} requires the lattice scale d")
        if tag.startswith("df") and self.omega is None:
            raise ValueError(f"{tag} requires the separation weight omega")


@dataclass
class SolveResult:
    """Outcome of one MPC solve."""

    accel: np.ndarray
    controls: np.ndarray
    objectives: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


class SolverError(RuntimeError):
    """Raised when the solver hits a non-finite objective."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _check_tag(tag: str):
    if tag not in MPC_TAGS:
        raise ValueError(f"unknown MPC model tag {tag!r}; expected one of {MPC_TAGS}")


# --------------------------------------------------------------------------
# Prediction rollouts
# --------------------------------------------------------------------------


def _predict(x, v, u, dt, v_max):
    """One prediction step: position uses the current velocity, then the
    velocity is updated and clamped.  Controls are applied as given (the
    solver keeps them feasible through projection)."""
    x_next = x + dt * v
    v_next = clamp_norm(v + dt * u, v_max)
    return x_next, v_next


def rollout_centralized(
    init: FlockConfiguration, controls, limits: MotionLimits
) -> list:
    """Predict all agents under the given (T, n, m) acceleration plan.

    Returns T+1 configurations, the first being the initial (noisy) view.
    """
    u = np.asarray(controls, dtype=np.float64)
    if u.ndim != 3 or u.shape[1:] != init.positions.shape:
        raise ValueError(
            f"controls must have shape (T, {init.n}, {init.dimension}),"
            f" got {u.shape}"
        )
    x, v = init.positions, init.velocities
    out = [init]
    for t in range(u.shape[0]):
        x, v = _predict(x, v, u[t], limits.dt, limits.v_max)
        out.append(FlockConfiguration(x, v))
    return out


def rollout_distributed(
    i: int,
    view: FlockConfiguration,
    controls,
    neighbor_set,
    limits: MotionLimits,
) -> list:
    """Predict agent i under its own plan with everyone else coasting.

    Agent i follows the controlled double integrator; every other agent
    advances at its sensed velocity.  `neighbor_set` is the set frozen at
    the current step; it only gates the stage cost, not the prediction.
    """
    if not 0 <= i < view.n:
        raise IndexError(f"agent index {i} out of range for n={view.n}")
    for j in neighbor_set:
        if not 0 <= j < view.n or j == i:
            raise ValueError(f"invalid neighbor index {j} for agent {i}")
    u = np.asarray(controls, dtype=np.float64)
    if u.ndim != 2 or u.shape[1] != view.dimension:
        raise ValueError(
            f"controls must have shape (T, {view.dimension}), got {u.shape}"
        )
    pos = view.positions.copy()
    vel = view.velocities.copy()
    x_i, v_i = pos[i], vel[i]
    out = [view]
    for t in range(u.shape[0]):
        pos = pos + limits.dt * vel  # constant-velocity neighbors
        x_i, v_i = _predict(
            x_i[None], v_i[None], u[t][None], limits.dt, limits.v_max
        )
        x_i, v_i = x_i[0], v_i[0]
        pos[i] = x_i
        new_vel = vel.copy()
        new_vel[i] = v_i
        vel = new_vel
        out.append(FlockConfiguration(pos, vel))
    return out


# --------------------------------------------------------------------------
# Stage costs (public, per-configuration)
# --------------------------------------------------------------------------


def _edge_mask(positions: np.ndarray, r: float):
    """Strict-inequality adjacency mask and the distance matrix."""
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    mask = dist < r
    np.fill_diagonal(mask, False)
    return mask, dist


def lattice_deviation_centralized(
    config: FlockConfiguration, r: float, d: float
) -> float:
    """Total squared deviation of neighbor distances from the scale d,
    summed over ordered pairs (each unordered pair counts twice)."""
    mask, dist = _edge_mask(config.positions, r)
    dist_f = np.maximum(dist, EPS_DIST)
    dev = (dist_f - d) ** 2
    return float(dev[mask].sum())


def lattice_deviation_distributed(
    i: int, config: FlockConfiguration, neighbor_set, d: float
) -> float:
    """Squared deviation of agent i's frozen-neighborhood distances from d."""
    idx = sorted(neighbor_set)
    if not idx:
        return 0.0
    diff = config.positions[idx] - config.positions[i]
    dist = np.maximum(np.sqrt((diff * diff).sum(axis=-1)), EPS_DIST)
    return float(((dist - d) ** 2).sum())


def cost_df_centralized(config: FlockConfiguration, r: float, omega: float) -> float:
    """Declarative-flocking cost: mean squared distance over all pairs plus
    omega-weighted inverse squared distances over ordered neighbor pairs.

    Defined as 0 for fewer than two agents (no pairs).
    """
    n = config.n
    if n < 2:
        return 0.0
    mask, dist = _edge_mask(config.positions, r)
    sq = dist * dist
    iu = np.triu_indices(n, k=1)
    cohesion = (2.0 / (n * (n - 1))) * float(sq[iu].sum())
    sq_f = np.maximum(sq, EPS_DIST_SQ)
    separation = omega * float((1.0 / sq_f)[mask].sum())
    return cohesion + separation


def cost_df_distributed(
    i: int, config: FlockConfiguration, neighbor_set, omega: float
) -> float:
    """Per-agent declarative-flocking cost over the frozen neighbor set:
    mean squared neighbor distance plus omega-weighted inverse squared
    distances.  0 when the neighbor set is empty."""
    idx = sorted(neighbor_set)
    if not idx:
        return 0.0
    diff = config.positions[idx] - config.positions[i]
    sq = (diff * diff).sum(axis=-1)
    sq_f = np.maximum(sq, EPS_DIST_SQ)
    return float(sq.mean() + omega * (1.0 / sq_f).sum())


def _stage_cost(tag, config, params, agent=None, neighbor_set=None) -> float:
    if tag == "lattice_centralized":
        return lattice_deviation_centralized(config, params.r, params.d)
    if tag == "df_centralized":
        return cost_df_centralized(config, params.r, params.omega)
    if agent is None or neighbor_set is None:
        raise ValueError(f"{tag} needs agent index and frozen neighbor set")
    if tag == "lattice_distributed":
        return lattice_deviation_distributed(agent, config, neighbor_set, params.d)
    return cost_df_distributed(agent, config, neighbor_set, params.omega)


def mpc_objective(
    tag: str,
    trajectory,
    controls,
    params: MpcParams,
    agent: int | None = None,
    neighbor_set=None,
) -> float:
    """Full horizon objective: stage costs over predicted steps 1..T plus
    lam times the squared norm of the control sequence."""
    _check_tag(tag)
    params.require_for(tag)
    u = np.asarray(controls, dtype=np.float64)
    stage = sum(
        _stage_cost(tag, cfg, params, agent, neighbor_set) for cfg in trajectory[1:]
    )
    return stage + params.lam * float((u * u).sum())


# --------------------------------------------------------------------------
# Stage gradients with respect to positions
# --------------------------------------------------------------------------


def _stage_grad_centralized(tag, X, params):
    """Gradient of the centralized stage cost at positions X (n, m).

    The neighbor edge set is evaluated at X and treated as constant.
    """
    n = X.shape[0]
    mask, dist = _edge_mask(X, r=params.r)
    dist_f = np.maximum(dist, EPS_DIST)
    active = mask & (dist >= EPS_DIST)
    if tag == "lattice_centralized":
        coef = np.where(active, 4.0 * (dist_f - params.d) / dist_f, 0.0)
        return coef.sum(axis=1)[:, None] * X - coef @ X
    # df_centralized: cohesion over all pairs + separation over edges
    if n < 2:
        return np.zeros_like(X)
    c_n = 2.0 / (n * (n - 1))
    grad = 2.0 * c_n * (n * X - X.sum(axis=0))
    sq_f = dist_f * dist_f
    coef = np.where(active, -4.0 * params.omega / (sq_f * sq_f), 0.0)
    grad += coef.sum(axis=1)[:, None] * X - coef @ X
    return grad


def _edge_stage_terms(tag, dist, counts_per_row, params):
    """Per-edge stage cost and the scalar d(cost)/d(dist) for batched
    distributed problems.  dist has one row per edge."""
    dist_f = np.maximum(dist, EPS_DIST)
    active = dist >= EPS_DIST
    if tag == "lattice_distributed":
        cost = (dist_f - params.d) ** 2
        dcost = np.where(active, 2.0 * (dist_f - params.d), 0.0)
    else:  # df_distributed: (1/|N|) dist^2 + omega / dist^2
        inv_cnt = 1.0 / counts_per_row
        sq = dist * dist
        sq_f = np.maximum(sq, EPS_DIST_SQ)
        cost = inv_cnt * sq + params.omega / sq_f
        dcost = 2.0 * inv_cnt * dist + np.where(
            sq >= EPS_DIST_SQ, -2.0 * params.omega / (sq_f * dist_f), 0.0
        )
    return cost, dcost


# --------------------------------------------------------------------------
# Backpropagation through the rollout
# --------------------------------------------------------------------------


def _clamp_backprop(w, p, v_max):
    """Apply the (symmetric) Jacobian of the norm clamp at pre-clamp
    velocities w to the adjoint p, rowwise over the last axis."""
    norms = np.sqrt((w * w).sum(axis=-1, keepdims=True))
    over = norms > v_max
    if not over.any():
        return p
    safe = np.where(over, norms, 1.0)
    radial = (w * p).sum(axis=-1, keepdims=True) / (safe * safe)
    clamped = (v_max / safe) * (p - w * radial)
    return np.where(over, clamped, p)


def _backprop_controls(gx, W, U, dt, v_max, lam):
    """Adjoint pass: gradient of the objective w.r.t. controls.

    gx[t] is the stage gradient at predicted step t+1 (t = 0..T-1); W[t] is
    the pre-clamp velocity that produced step t+1's velocity.
    """
    T = U.shape[0]
    gu = np.empty_like(U)
    px = np.zeros_like(gx[-1])
    pv = np.zeros_like(gx[-1])
    for t in range(T - 1, -1, -1):
        px = px + gx[t]
        q = _clamp_backprop(W[t], pv, v_max)
        gu[t] = dt * q + 2.0 * lam * U[t]
        pv = dt * px + q
    return gu


def _centralized_rollout_arrays(X0, V0, U, limits):
    dt, v_max = limits.dt, limits.v_max
    x, v = X0, V0
    xs, ws = [], []
    for t in range(U.shape[0]):
        x = x + dt * v
        w = v + dt * U[t]
        v = clamp_norm(w, v_max)
        xs.append(x)
        ws.append(w)
    return xs, ws


def _centralized_stage_value(tag, x_t, params):
    mask, dist = _edge_mask(x_t, params.r)
    if tag == "lattice_centralized":
        dist_f = np.maximum(dist, EPS_DIST)
        return float(((dist_f - params.d) ** 2)[mask].sum())
    n = x_t.shape[0]
    if n < 2:
        return 0.0
    sq = dist * dist
    iu = np.triu_indices(n, k=1)
    value = (2.0 / (n * (n - 1))) * float(sq[iu].sum())
    sq_f = np.maximum(sq, EPS_DIST_SQ)
    return value + params.omega * float((1.0 / sq_f)[mask].sum())


def _centralized_objective(tag, X0, V0, U, params, limits):
    xs, _ = _centralized_rollout_arrays(X0, V0, U, limits)
    stage = sum(_centralized_stage_value(tag, x_t, params) for x_t in xs)
    return stage + params.lam * float((U * U).sum())


def _centralized_objective_grad(tag, X0, V0, U, params, limits):
    """Objective value and analytic gradient for a centralized model."""
    xs, ws = _centralized_rollout_arrays(X0, V0, U, limits)
    stage = 0.0
    gx = []
    for x_t in xs:
        stage += _centralized_stage_value(tag, x_t, params)
        gx.append(_stage_grad_centralized(tag, x_t, params))
    value = stage + params.lam * float((U * U).sum())
    grad = _backprop_controls(gx, ws, U, limits.dt, limits.v_max, params.lam)
    return value, grad


# --------------------------------------------------------------------------
# Batched distributed problems
# --------------------------------------------------------------------------


@dataclass
class _BatchProblem:
    """B independent single-agent problems evaluated in lockstep.

    Each row solves one agent against its frozen, constant-velocity
    neighbors; rows never interact, so a batch of one is bit-identical to
    that row inside any larger batch.
    """

    tag: str
    params: MpcParams
    limits: MotionLimits
    x0: np.ndarray  # (B, m) own positions
    v0: np.ndarray  # (B, m) own velocities
    src: np.ndarray  # (E,) batch row of each neighbor edge
    nbr_pos: np.ndarray  # (E, T, m) neighbor positions at steps 1..T
    counts: np.ndarray  # (B,) neighbor count per row

    @property
    def size(self) -> int:
        return self.x0.shape[0]

    def _rollout(self, U):
        dt, v_max = self.limits.dt, self.limits.v_max
        T = U.shape[1]
        x, v = self.x0, self.v0
        xs = np.empty((self.size, T, self.x0.shape[1]))
        ws = np.empty_like(xs)
        for t in range(T):
            x = x + dt * v
            w = v + dt * U[:, t]
            v = clamp_norm(w, v_max)
            xs[:, t] = x
            ws[:, t] = w
        return xs, ws

    def _edge_dist(self, xs):
        diff = xs[self.src] - self.nbr_pos  # (E, T, m)
        return diff, np.sqrt((diff * diff).sum(axis=-1))

    def objective(self, U):
        """Per-row objective values, shape (B,)."""
        xs, _ = self._rollout(U)
        out = self.params.lam * (U * U).sum(axis=(1, 2))
        if self.src.size:
            _, dist = self._edge_dist(xs)
            counts_per_row = self.counts[self.src][:, None].astype(np.float64)
            cost, _ = _edge_stage_terms(self.tag, dist, counts_per_row, self.params)
            out = out + np.bincount(
                self.src, weights=cost.sum(axis=1), minlength=self.size
            )
        return out

    def gradient(self, U):
        """Per-row analytic gradient, shape (B, T, m)."""
        xs, ws = self._rollout(U)
        T, m = U.shape[1], U.shape[2]
        gx = np.zeros((self.size, T, m))
        if self.src.size:
            diff, dist = self._edge_dist(xs)
            counts_per_row = self.counts[self.src][:, None].astype(np.float64)
            _, dcost = _edge_stage_terms(self.tag, dist, counts_per_row, self.params)
            dist_f = np.maximum(dist, EPS_DIST)
            contrib = (dcost / dist_f)[:, :, None] * diff  # (E, T, m)
            np.add.at(gx, self.src, contrib)
        gu = np.empty_like(U)
        px = np.zeros((self.size, m))
        pv = np.zeros((self.size, m))
        for t in range(T - 1, -1, -1):
            px = px + gx[:, t]
            q = _clamp_backprop(ws[:, t], pv, self.limits.v_max)
            gu[:, t] = self.limits.dt * q + 2.0 * self.params.lam * U[:, t]
            pv = self.limits.dt * px + q
        return gu


def _build_batch_problem(tag, views, agents, params, limits, neighbor_sets=None):
    """Assemble a batch problem from per-agent noisy views.

    views[k] is the view of agents[k]; each agent's neighbor set is frozen,
    either as given in neighbor_sets[k] or computed once from its own view
    (strict < r).
    """
    T = params.horizon
    m = views[0].dimension
    x0 = np.empty((len(agents), m))
    v0 = np.empty((len(agents), m))
    src, nbr_blocks, counts = [], [], np.zeros(len(agents), dtype=np.int64)
    for k, (i, view) in enumerate(zip(agents, views)):
        pos, vel = view.positions, view.velocities
        x0[k], v0[k] = pos[i], vel[i]
        if neighbor_sets is not None and neighbor_sets[k] is not None:
            nbr = np.asarray(sorted(neighbor_sets[k]), dtype=np.int64)
            if nbr.size and (nbr.min() < 0 or nbr.max() >= view.n or i in nbr):
                raise ValueError(f"invalid neighbor set for agent {i}")
        else:
            diff = pos - pos[i]
            dist = np.sqrt((diff * diff).sum(axis=-1))
            nbr = np.nonzero(dist < params.r)[0]
            nbr = nbr[nbr != i]
        counts[k] = nbr.size
        if nbr.size:
            src.extend([k] * nbr.size)
            # iterated constant-velocity extrapolation, matching the rollout
            block = np.empty((nbr.size, T, m))
            p = pos[nbr]
            for t in range(T):
                p = p + limits.dt * vel[nbr]
                block[:, t] = p
            nbr_blocks.append(block)
    nbr_pos = (
        np.concatenate(nbr_blocks, axis=0) if nbr_blocks else np.empty((0, T, m))
    )
    return _BatchProblem(
        tag=tag,
        params=params,
        limits=limits,
        x0=x0,
        v0=v0,
        src=np.asarray(src, dtype=np.int64),
        nbr_pos=nbr_pos,
        counts=counts,
    )


# --------------------------------------------------------------------------
# Projected gradient descent
# --------------------------------------------------------------------------


def _solve_batch(problem: _BatchProblem, warm, keep_trace=False):
    """Run per-row projected gradient descent with per-row Armijo line
    search; rows converge and stop independently."""
    B = problem.size
    a_max = problem.limits.a_max
    U = clamp_norm(warm, a_max)
    J = problem.objective(U)
    if not np.isfinite(J).all():
        raise SolverError(
            "non-finite MPC objective at the initial point",
            diagnostics={"objective": J, "controls": U},
        )
    trace = [float(J[0])] if keep_trace else None
    active = np.ones(B, dtype=bool)
    converged = np.zeros(B, dtype=bool)
    iterations = 0
    for _ in range(MAX_ITER):
        G = problem.gradient(U)
        cand = clamp_norm(U - G, a_max)
        pg = np.sqrt(((U - cand) ** 2).sum(axis=(1, 2)))
        converged |= active & (pg <= GRAD_TOL)
        active &= ~converged
        if not active.any():
            break
        iterations += 1
        step = np.ones(B)
        searching = active.copy()
        accepted = np.zeros(B, dtype=bool)
        while searching.any():
            U_try = clamp_norm(U - step[:, None, None] * G, a_max)
            J_try = problem.objective(U_try)
            if not np.isfinite(J_try[searching]).all():
                raise SolverError(
                    "non-finite MPC objective during line search",
                    diagnostics={"objective": J_try, "controls": U_try},
                )
            delta = ((U - U_try) ** 2).sum(axis=(1, 2))
            ok = searching & (J_try <= J - (ARMIJO_C / step) * delta)
            if ok.any():
                U[ok] = U_try[ok]
                J[ok] = J_try[ok]
                accepted |= ok
                searching &= ~ok
            step[searching] *= 0.5
            searching &= step >= MIN_STEP
        # rows whose line search stalled make no further progress
        active &= accepted
        if keep_trace:
            trace.append(float(J[0]))
        if not active.any():
            break
    return U, J, converged, iterations, trace


def _solve_centralized(tag, view, params, limits, warm, keep_trace=False):
    a_max = limits.a_max
    U = clamp_norm(warm, a_max)
    value, grad = _centralized_objective_grad(
        tag, view.positions, view.velocities, U, params, limits
    )
    if not np.isfinite(value):
        raise SolverError(
            "non-finite MPC objective at the initial point",
            diagnostics={"objective": value, "controls": U},
        )
    trace = [value] if keep_trace else None
    converged = False
    iterations = 0
    for _ in range(MAX_ITER):
        cand = clamp_norm(U - grad, a_max)
        if np.sqrt(((U - cand) ** 2).sum()) <= GRAD_TOL:
            converged = True
            break
        iterations += 1
        step = 1.0
        accepted = False
        while step >= MIN_STEP:
            U_try = clamp_norm(U - step * grad, a_max)
            value_try = _centralized_objective(
                tag, view.positions, view.velocities, U_try, params, limits
            )
            if not np.isfinite(value_try):
                raise SolverError(
                    "non-finite MPC objective during line search",
                    diagnostics={"objective": value_try, "controls": U_try},
                )
            delta = ((U - U_try) ** 2).sum()
            if value_try <= value - (ARMIJO_C / step) * delta:
                U, value = U_try, value_try
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        _, grad = _centralized_objective_grad(
            tag, view.positions, view.velocities, U, params, limits
        )
        if keep_trace:
            trace.append(value)
    return U, value, converged, iterations, trace


# --------------------------------------------------------------------------
# Public solve entry points
# --------------------------------------------------------------------------


def mpc_objective_gradient(
    tag: str,
    initial_view: FlockConfiguration,
    controls,
    params: MpcParams,
    limits: MotionLimits,
    agent: int | None = None,
    neighbor_set=None,
) -> np.ndarray:
    """Analytic gradient of the horizon objective with respect to the
    controls, at the given initial view.  Shape matches `controls`."""
    _check_tag(tag)
    params.require_for(tag)
    U = np.asarray(controls, dtype=np.float64)
    if tag in CENTRALIZED_MPC_TAGS:
        _, grad = _centralized_objective_grad(
            tag, initial_view.positions, initial_view.velocities, U, params, limits
        )
        return grad
    if agent is None:
        raise ValueError(f"{tag} needs the agent index")
    problem = _build_batch_problem(
        tag, [initial_view], [agent], params, limits, neighbor_sets=[neighbor_set]
    )
    return problem.gradient(U[None])[0]


def solve_mpc(
    tag: str,
    initial_view: FlockConfiguration,
    params: MpcParams,
    limits: MotionLimits,
    warm_start=None,
    agent: int | None = None,
    full_output: bool = False,
):
    """Minimize the horizon objective and return the first-step accelerations.

    Centralized tags return an (n, m) array for all agents; distributed tags
    solve for `agent` alone and return its (m,) acceleration.  `warm_start`
    is a full control sequence (projected onto the feasible set on entry);
    zeros are used when absent.  With full_output=True a SolveResult with
    the accepted-objective trace is returned instead.
    """
    _check_tag(tag)
    params.require_for(tag)
    T, m = params.horizon, initial_view.dimension
    if tag in CENTRALIZED_MPC_TAGS:
        shape = (T, initial_view.n, m)
        warm = np.zeros(shape) if warm_start is None else np.asarray(warm_start, dtype=np.float64)
        if warm.shape != shape:
            raise ValueError(f"warm start must have shape {shape}, got {warm.shape}")
        U, value, converged, iterations, trace = _solve_centralized(
            tag, initial_view, params, limits, warm, keep_trace=full_output
        )
        result = SolveResult(
            accel=U[0].copy(),
            controls=U,
            objectives=trace or [],
            iterations=iterations,
            converged=converged,
        )
    else:
        if agent is None:
            raise ValueError(f"{tag} needs the agent index")
        shape = (T, m)
        warm = np.zeros(shape) if warm_start is None else np.asarray(warm_start, dtype=np.float64)
        if warm.shape != shape:
            raise ValueError(f"warm start must have shape {shape}, got {warm.shape}")
        problem = _build_batch_problem(tag, [initial_view], [agent], params, limits)
        U, J, converged, iterations, trace = _solve_batch(
            problem, warm[None], keep_trace=full_output
        )
        result = SolveResult(
            accel=U[0, 0].copy(),
            controls=U[0],
            objectives=trace or [],
            iterations=iterations,
            converged=bool(converged[0]),
        )
    return result if full_output else result.accel


def solve_mpc_distributed_all(
    tag: str,
    views,
    params: MpcParams,
    limits: MotionLimits,
    warm_start=None,
):
    """Solve every agent's distributed problem against the same step
    snapshot (views[i] is agent i's noisy view) and return the stacked
    first-step accelerations (n, m) plus the full control plans (n, T, m).

    The per-agent problems are independent; batching them changes nothing
    but the amount of Python overhead.
    """
    _check_tag(tag)
    if tag not in DISTRIBUTED_MPC_TAGS:
        raise ValueError(f"{tag} is not a distributed MPC model")
    params.require_for(tag)
    n = len(views)
    T, m = params.horizon, views[0].dimension
    warm = (
        np.zeros((n, T, m))
        if warm_start is None
        else np.asarray(warm_start, dtype=np.float64)
    )
    if warm.shape != (n, T, m):
        raise ValueError(f"warm start must have shape {(n, T, m)}, got {warm.shape}")
    problem = _build_batch_problem(tag, views, list(range(n)), params, limits)
    U, J, converged, iterations, _ = _solve_batch(problem, warm)
    return U[:, 0].copy(), U
