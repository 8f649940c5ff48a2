"""
Agent state, discrete-time dynamics, proximity nets and sensing noise.

Agents are double integrators on a fixed time grid: position advances with
the current velocity, velocity advances with the commanded acceleration, and
both acceleration and the updated velocity are kept inside norm balls by
radial projection (the vector is rescaled to the bound, direction preserved).

All functions here are pure except for ``RandomStream``, which owns mutable
generator state.  Configurations are immutable values safe to share between
workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AgentState",
    "FlockConfiguration",
    "MotionLimits",
    "NoiseSpec",
    "ProximityNet",
    "RandomStream",
    "mix_seed",
    "clamp_norm",
    "pairwise_distances",
    "step_dynamics",
    "neighbors",
    "proximity_net",
    "is_quasi_alpha_lattice",
    "sense_global",
    "sense_local",
]

# Squared-distance floor used wherever an inverse distance appears, so that
# coincident agents produce large-but-finite forces instead of NaN/inf.
EPS_DIST = 1e-6
EPS_DIST_SQ = EPS_DIST * EPS_DIST


@dataclass(frozen=True)
class AgentState:
    """Position and velocity of one agent (length units, length/step-time)."""

    position: np.ndarray
    velocity: np.ndarray


class FlockConfiguration:
    """Positions and velocities of all n agents at one time step.

    Stored as two (n, m) float64 arrays.  Arrays are copied on construction
    and marked read-only; agent identity is the row index and is stable for
    the whole run.
    """

    __slots__ = ("positions", "velocities")

    def __init__(self, positions, velocities):
        pos = np.array(positions, dtype=np.float64)
        vel = np.array(velocities, dtype=np.float64)
        if pos.ndim != 2 or vel.shape != pos.shape:
            raise ValueError(
                f"positions/velocities must be matching (n, m) arrays, "
                f"got {pos.shape} and {vel.shape}"
            )
        if pos.shape[0] < 1 or pos.shape[1] < 1:
            raise ValueError("need at least one agent and one dimension")
        if not (np.isfinite(pos).all() and np.isfinite(vel).all()):
            raise ValueError("positions/velocities must be finite")
        pos.flags.writeable = False
        vel.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    def __setattr__(self, name, value):
        raise AttributeError("FlockConfiguration is immutable")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def agent(self, i: int) -> AgentState:
        if not 0 <= i < self.n:
            raise IndexError(f"agent index {i} out of range for n={self.n}")
        return AgentState(self.positions[i], self.velocities[i])

    def __eq__(self, other):
        return (
            isinstance(other, FlockConfiguration)
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.velocities, other.velocities)
        )

    def __reduce__(self):
        # immutability is enforced through __setattr__, so pickling must
        # rebuild through the constructor
        return (self.__class__, (np.asarray(self.positions), np.asarray(self.velocities)))

    def __repr__(self):
        return f"FlockConfiguration(n={self.n}, m={self.dimension})"


@dataclass(frozen=True)
class MotionLimits:
    """Velocity bound, acceleration bound and step length of the time grid."""

    v_max: float = 8.0
    a_max: float = 1.0
    dt: float = 0.3

    def __post_init__(self):
        if not (self.v_max > 0 and self.a_max > 0 and self.dt > 0):
            raise ValueError("v_max, a_max and dt must all be positive")


@dataclass(frozen=True)
class NoiseSpec:
    """Std devs of the additive Gaussian sensing noise (0 = exact sensing)."""

    sigma_x: float = 0.0
    sigma_v: float = 0.0

    def __post_init__(self):
        if self.sigma_x < 0 or self.sigma_v < 0:
            raise ValueError("noise std devs must be nonnegative")

    @property
    def is_zero(self) -> bool:
        return self.sigma_x == 0.0 and self.sigma_v == 0.0


@dataclass(frozen=True)
class ProximityNet:
    """Graph over agent indices connecting pairs strictly closer than r.

    Edges are stored once per unordered pair as (i, j) with i < j; adjacency
    is symmetric by construction.
    """

    n: int
    r: float
    edges: frozenset = field(default_factory=frozenset)

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        return (min(i, j), max(i, j)) in self.edges

    def neighbors_of(self, i: int) -> set:
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out


# --------------------------------------------------------------------------
# Deterministic random stream
# --------------------------------------------------------------------------

_SPLITMIX_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> int:
    z = state & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(base_seed: int, index: int) -> int:
    """Derive the seed of stream `index` from a base seed (SplitMix64 mix).

    Distinct indices give distinct, decorrelated 64-bit seeds; the mapping is
    pure arithmetic, so it is identical on every platform.
    """
    return _splitmix64((base_seed + (index + 1) * _SPLITMIX_GOLDEN) & _MASK64)


class RandomStream:
    """Seeded deterministic random source.

    Uniform doubles come straight from the PCG64 bit stream:
    ``u = ((raw >> 11) + 1) * 2**-53``, which lies in (0, 1].  Standard
    normals use the basic Box-Muller transform on consecutive uniform pairs
    (``z0 = sqrt(-2 ln u1) cos(2 pi u2)``, ``z1 = ... sin(...)``); a request
    for k normals always consumes ``2 * ceil(k / 2)`` uniforms.  Both
    transforms are fixed here so a seed reproduces the exact same sample
    sequence on any platform.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._bits = np.random.PCG64(self.seed)

    def uniforms(self, count: int) -> np.ndarray:
        """`count` doubles uniform on (0, 1]."""
        if count == 0:
            return np.empty(0)
        raw = self._bits.random_raw(count)
        return ((raw >> np.uint64(11)) + np.uint64(1)) * 2.0**-53

    def normals(self, count: int) -> np.ndarray:
        """`count` standard normal samples (Box-Muller pairs)."""
        if count == 0:
            return np.empty(0)
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:count]


# --------------------------------------------------------------------------
# Dynamics
# --------------------------------------------------------------------------


def clamp_norm(vectors: np.ndarray, max_norm: float) -> np.ndarray:
    """Radially project each row of (n, m) `vectors` onto the max_norm ball."""
    v = np.asarray(vectors, dtype=np.float64)
    norms = np.sqrt((v * v).sum(axis=-1, keepdims=True))
    over = norms > max_norm
    if not over.any():
        return v.copy()
    scale = np.where(over, max_norm / np.where(over, norms, 1.0), 1.0)
    return v * scale


def step_dynamics(
    config: FlockConfiguration, accel, limits: MotionLimits
) -> FlockConfiguration:
    """Advance every agent one step.

    Accelerations are projected onto the a_max ball, the new velocity
    ``v + dt * a`` is projected onto the v_max ball, and positions advance
    with the *current* velocity: ``x' = x + dt * v``.
    """
    a = np.asarray(accel, dtype=np.float64)
    if a.shape != config.positions.shape:
        raise ValueError(
            f"acceleration shape {a.shape} does not match configuration "
            f"shape {config.positions.shape}"
        )
    a = clamp_norm(a, limits.a_max)
    new_vel = clamp_norm(config.velocities + limits.dt * a, limits.v_max)
    new_pos = config.positions + limits.dt * config.velocities
    return FlockConfiguration(new_pos, new_vel)


# --------------------------------------------------------------------------
# Proximity structure
# --------------------------------------------------------------------------


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    """Dense (n, n) Euclidean distance matrix."""
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def neighbors(config: FlockConfiguration, i: int, r: float) -> set:
    """Indices of agents strictly closer than r to agent i."""
    if not 0 <= i < config.n:
        raise IndexError(f"agent index {i} out of range for n={config.n}")
    if r <= 0:
        raise ValueError("interaction radius must be positive")
    diff = config.positions - config.positions[i]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    close = np.nonzero(dist < r)[0]
    return {int(j) for j in close if j != i}

def proximity_net(config: FlockConfiguration, r: float) -> ProximityNet:
    """Build the proximity net: edge {i, j} iff ||x_i - x_j|| < r (strict)."""
    if r <= 0:
        raise ValueError("interaction radius must be positive")
    dist = pairwise_distances(config.positions)
    ii, jj = np.nonzero(dist < r)
    edges = frozenset((int(a), int(b)) for a, b in zip(ii, jj) if a < b)
    return ProximityNet(n=config.n, r=r, edges=edges)


def is_quasi_alpha_lattice(
    config: FlockConfiguration, r: float, d: float, delta: float
) -> bool:
    """True iff every neighboring pair sits within delta of the scale d.

    delta = 0 tests an exact lattice; a configuration with no edges is
    vacuously regular.
    """
    if d <= 0:
        raise ValueError("lattice scale d must be positive")
    if delta < 0:
        raise ValueError("tolerance delta must be nonnegative")
    net = proximity_net(config, r)
    pos = config.positions
    for i, j in net.edges:
        diff = pos[i] - pos[j]
        dist = float(np.sqrt((diff * diff).sum()))
        if abs(dist - d) > delta:
            return False
    return True


# --------------------------------------------------------------------------
# Sensing noise
# --------------------------------------------------------------------------


def _noise_draw(config: FlockConfiguration, rng: RandomStream) -> np.ndarray:
    """Draw the per-call noise block in the documented order.

    2*n*m standard normals, consumed agent-ascending, position block before
    velocity block, component-ascending; reshaped to (n, 2, m).
    """
    n, m = config.n, config.dimension
    return rng.normals(2 * n * m).reshape(n, 2, m)


def sense_global(
    config: FlockConfiguration, noise: NoiseSpec, rng: RandomStream
) -> FlockConfiguration:
    """One shared noisy measurement of every agent (centralized sensing).

    Every position component gets an independent Gaussian(0, sigma_x)
    perturbation and every velocity component a Gaussian(0, sigma_v) one,
    freshly sampled per call.  The stream is advanced by exactly 2*n*m
    samples regardless of the noise level, so runs with different sigmas
    stay step-aligned.
    """
    z = _noise_draw(config, rng)
    if noise.is_zero:
        return config
    pos = config.positions
    vel = config.velocities
    if noise.sigma_x > 0:
        pos = pos + noise.sigma_x * z[:, 0, :]
    if noise.sigma_v > 0:
        vel = vel + noise.sigma_v * z[:, 1, :]
    return FlockConfiguration(pos, vel)


def sense_local(
    config: FlockConfiguration, i: int, noise: NoiseSpec, rng: RandomStream
) -> FlockConfiguration:
    """Agent i's noisy view: everyone perturbed except agent i itself.

    Each observing agent gets independent draws; the stream consumption
    (2*n*m samples) and ordering match sense_global, with agent i's own row
    left exact.
    """
    if not 0 <= i < config.n:
        raise IndexError(f"agent index {i} out of range for n={config.n}")
    z = _noise_draw(config, rng)
    if noise.is_zero:
        return config
    pos = config.positions.copy()
    vel = config.velocities.copy()
    if noise.sigma_x > 0:
        pos += noise.sigma_x * z[:, 0, :]
    if noise.sigma_v > 0:
        vel += noise.sigma_v * z[:, 1, :]
    pos[i] = config.positions[i]
    vel[i] = config.velocities[i]
    return FlockConfiguration(pos, vel)
