"""
Non-MPC flocking controllers.

Both controllers map one agent's (possibly noisy) view of the configuration
to an acceleration command.  The view is expected to carry the agent's own
row exactly (see ``core.sense_local``); neighborhoods are computed from the
view's positions.  Outputs are raw commands: the simulation loop clamps them
to the acceleration bound when stepping the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS_DIST_SQ, FlockConfiguration

__all__ = [
    "ReynoldsParams",
    "OlfatiSaberParams",
    "reynolds_alignment",
    "reynolds_cohesion",
    "reynolds_separation",
    "reynolds_accel",
    "olfati_saber_accel",
]


@dataclass(frozen=True)
class ReynoldsParams:
    """Per-rule interaction radii and weights for the rule-based controller.

    Separation uses a smaller radius than cohesion/alignment since it only
    matters at close range.
    """

    r_c: float = 9.0
    r_s: float = 5.0
    r_al: float = 7.5
    w_c: float = 8.0
    w_s: float = 12.0
    w_al: float = 8.0

    def __post_init__(self):
        if min(self.r_c, self.r_s, self.r_al) <= 0:
            raise ValueError("rule radii must be positive")
        if min(self.w_c, self.w_s, self.w_al) < 0:
            raise ValueError("rule weights must be nonnegative")


@dataclass(frozen=True)
class OlfatiSaberParams:
    """Parameters of the potential-based controller.

    The pair potential is flat outside the interaction radius r and has its
    minimum at distance d.  epsilon shapes the smoothed norm, (a, b) the
    uneven sigmoid, h the bump-function plateau, and c_alignment weighs the
    velocity-consensus term.
    """

    r: float = 8.4
    d: float = 7.0
    epsilon: float = 0.1
    a: float = 5.0
    b: float = 5.0
    h: float = 0.2
    c_alignment: float = 1.0

    def __post_init__(self):
        if not 0 < self.a <= self.b:
            raise ValueError("sigmoid parameters must satisfy 0 < a <= b")
        if not 0 < self.h < 1:
            raise ValueError("bump threshold h must be in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.d < self.r:
            raise ValueError("need 0 < d < r")
        if self.c_alignment < 0:
            raise ValueError("c_alignment must be nonnegative")


def _neighbor_mask(view: FlockConfiguration, i: int, radius: float) -> np.ndarray:
    diff = view.positions - view.positions[i]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    mask = dist < radius
    mask[i] = False
    return mask


def reynolds_alignment(
    i: int, view: FlockConfiguration, params: ReynoldsParams
) -> np.ndarray:
    """Steer toward the mean velocity of the alignment neighborhood."""
    mask = _neighbor_mask(view, i, params.r_al)
    if not mask.any():
        return np.zeros(view.dimension)
    mean_vel = view.velocities[mask].mean(axis=0)
    return params.w_al * (mean_vel - view.velocities[i])


def reynolds_cohesion(
    i: int, view: FlockConfiguration, params: ReynoldsParams
) -> np.ndarray:
    """Steer toward the centroid of the cohesion neighborhood."""
    mask = _neighbor_mask(view, i, params.r_c)
    if not mask.any():
        return np.zeros(view.dimension)
    centroid = view.positions[mask].mean(axis=0)
    return params.w_c * (centroid - view.positions[i])


def reynolds_separation(
    i: int, view: FlockConfiguration, params: ReynoldsParams
) -> np.ndarray:
    """Steer away from close neighbors, inverse-square falloff.

    The squared distance is floored to keep the force finite if a sensed
    neighbor coincides with the agent.
    """
    mask = _neighbor_mask(view, i, params.r_s)
    if not mask.any():
        return np.zeros(view.dimension)
    away = view.positions[i] - view.positions[mask]
    sq = np.maximum((away * away).sum(axis=-1), EPS_DIST_SQ)
    return params.w_s * (away / sq[:, None]).mean(axis=0)


def reynolds_accel(
    i: int, view: FlockConfiguration, params: ReynoldsParams
) -> np.ndarray:
    """Sum of the alignment, cohesion and separation rules."""
    return (
        reynolds_alignment(i, view, params)
        + reynolds_cohesion(i, view, params)
        + reynolds_separation(i, view, params)
    )


# --------------------------------------------------------------------------
# Olfati-Saber potential controller
# --------------------------------------------------------------------------


def sigma_norm(z, epsilon: float):
    """Smoothed norm (1/eps) * (sqrt(1 + eps*|z|^2) - 1); differentiable at 0.

    Accepts a scalar distance or an array of vector norms.
    """
    z = np.asarray(z, dtype=np.float64)
    return (np.sqrt(1.0 + epsilon * z * z) - 1.0) / epsilon


def bump(z, h: float):
    """Smooth cutoff: 1 on [0, h), cosine taper on [h, 1], 0 elsewhere."""
    z = np.asarray(z, dtype=np.float64)
    out = np.zeros_like(z)
    out = np.where((z >= 0) & (z < h), 1.0, out)
    taper = 0.5 * (1.0 + np.cos(np.pi * (z - h) / (1.0 - h)))
    out = np.where((z >= h) & (z <= 1.0), taper, out)
    return out


def _uneven_sigmoid(z, a: float, b: float):
    c = abs(a - b) / np.sqrt(4.0 * a * b)
    shifted = z + c
    return 0.5 * ((a + b) * shifted / np.sqrt(1.0 + shifted * shifted) + (a - b))


def action_function(z, params: OlfatiSaberParams):
    """Pair force magnitude at sigma-distance z: bump-windowed uneven sigmoid
    crossing zero at the sigma-distance of d."""
    r_sig = sigma_norm(params.r, params.epsilon)
    d_sig = sigma_norm(params.d, params.epsilon)
    return bump(np.asarray(z) / r_sig, params.h) * _uneven_sigmoid(
        np.asarray(z) - d_sig, params.a, params.b
    )


def olfati_saber_accel(
    i: int, view: FlockConfiguration, params: OlfatiSaberParams
) -> np.ndarray:
    """Gradient-type pair forces plus weighted velocity consensus.

    For each neighbor j within r: a force of magnitude
    ``action_function(sigma_norm(|x_j - x_i|))`` along the smoothed
    direction ``(x_j - x_i) / sqrt(1 + eps |x_j - x_i|^2)``, plus
    ``c_alignment * bump(sigma_dist / sigma_r) * (v_j - v_i)``.
    """
    mask = _neighbor_mask(view, i, params.r)
    if not mask.any():
        return np.zeros(view.dimension)
    eps = params.epsilon
    rel = view.positions[mask] - view.positions[i]
    dist = np.sqrt((rel * rel).sum(axis=-1))
    dist_sig = sigma_norm(dist, eps)
    r_sig = sigma_norm(params.r, eps)

    # smoothed unit vectors (gradient of the sigma-norm), finite at overlap
    n_ij = rel / np.sqrt(1.0 + eps * dist * dist)[:, None]
    force = (action_function(dist_sig, params)[:, None] * n_ij).sum(axis=0)

    adjacency = bump(dist_sig / r_sig, params.h)
    rel_vel = view.velocities[mask] - view.velocities[i]
    consensus = params.c_alignment * (adjacency[:, None] * rel_vel).sum(axis=0)
    return force + consensus
