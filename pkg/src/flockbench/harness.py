"""
Experiment orchestration: model dispatch, seeded closed-loop simulation, and
the two benchmark experiments (model comparison and noise sweep).

Simulation loop, per step: sample sensing noise (one shared view for
centralized MPC models, one view per agent for everything else), compute
accelerations with the chosen model, advance the true noiseless state, and
evaluate the four metrics on the true state.  Noise only ever corrupts what
controllers see.

Reproducibility: run j of an experiment uses the seed
``mix_seed(base_seed, j)``; noise-sweep run j at level L uses
``mix_seed(base_seed, L * LEVEL_SEED_STRIDE + j)``.  Results are therefore
independent of the parallelism degree, every model in a comparison starts
run j from the same initial configuration, and a level-0 sweep replays the
comparison's runs exactly.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .controllers import (
    OlfatiSaberParams,
    ReynoldsParams,
    olfati_saber_accel,
    reynolds_accel,
)
from .core import (
    FlockConfiguration,
    MotionLimits,
    NoiseSpec,
    RandomStream,
    mix_seed,
    sense_global,
    sense_local,
    step_dynamics,
)
from .metrics import evaluate_metrics
from .mpc import (
    CENTRALIZED_MPC_TAGS,
    DISTRIBUTED_MPC_TAGS,
    MpcParams,
    SolverError,
    solve_mpc,
    solve_mpc_distributed_all,
)

__all__ = [
    "MODEL_TAGS",
    "ModelSpec",
    "ExperimentConfig",
    "RunRecord",
    "default_model_spec",
    "sample_initial_config",
    "simulate",
    "run_batch",
    "run_comparison",
    "run_noise_sweep",
    "noise_for_level",
    "aggregate_steps",
    "aggregate_finals",
]

MODEL_TAGS = (
    "reynolds",
    "olfati_saber",
    "lattice_centralized",
    "lattice_distributed",
    "df_centralized",
    "df_distributed",
)

_PARAM_TYPES = {
    "reynolds": ReynoldsParams,
    "olfati_saber": OlfatiSaberParams,
    "lattice_centralized": MpcParams,
    "lattice_distributed": MpcParams,
    "df_centralized": MpcParams,
    "df_distributed": MpcParams,
}


@dataclass(frozen=True)
class ModelSpec:
    """A controller choice: one tag plus the matching parameter record."""

    tag: str
    params: object

    def __post_init__(self):
        if self.tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.tag!r}")
        expected = _PARAM_TYPES[self.tag]
        if not isinstance(self.params, expected):
            raise ValueError(
                f"model {self.tag!r} expects {expected.__name__} parameters,"
                f" got {type(self.params).__name__}"
            )
        if isinstance(self.params, MpcParams):
            self.params.require_for(self.tag)


def default_model_spec(tag: str, r: float = 8.4) -> ModelSpec:
    """The benchmark defaults for a tag, at interaction radius r."""
    if tag == "reynolds":
        return ModelSpec(tag, ReynoldsParams())
    if tag == "olfati_saber":
        return ModelSpec(tag, OlfatiSaberParams(r=r))
    return ModelSpec(tag, MpcParams(r=r))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; see `default_model_spec` for models."""

    model: ModelSpec
    n: int = 30
    steps: int = 100
    limits: MotionLimits = MotionLimits()
    r: float = 8.4
    noise: NoiseSpec = NoiseSpec()
    runs: int = 20
    base_seed: int = 1
    init_position_box: tuple = ((-15.0, 15.0), (-15.0, 15.0))
    init_velocity_box: tuple = ((0.0, 2.0), (0.0, 2.0))
    output_dir: str | None = None

    def __post_init__(self):
        if self.n < 1 or self.steps < 1 or self.runs < 1:
            raise ValueError("n, steps and runs must all be at least 1")
        if self.r <= 0:
            raise ValueError("interaction radius must be positive")
        if len(self.init_position_box) != len(self.init_velocity_box):
            raise ValueError("position and velocity boxes must share a dimension")
        for box in (self.init_position_box, self.init_velocity_box):
            for lo, hi in box:
                if lo > hi:
                    raise ValueError(f"box range ({lo}, {hi}) has min > max")

    @property
    def dimension(self) -> int:
        return len(self.init_position_box)


@dataclass
class RunRecord:
    """One closed-loop run: per-step metrics plus the final state."""

    run_id: int
    metrics: list
    final: FlockConfiguration
    duration: float


def sample_initial_config(cfg: ExperimentConfig, rng: RandomStream) -> FlockConfiguration:
    """Uniformly sample initial positions and velocities from the boxes.

    Component order is fixed (agent-ascending, position before velocity,
    component-ascending) so a seed pins the exact configuration.
    """
    n, m = cfg.n, cfg.dimension
    u = rng.uniforms(2 * n * m).reshape(n, 2, m)
    pos_box = np.asarray(cfg.init_position_box, dtype=np.float64)
    vel_box = np.asarray(cfg.init_velocity_box, dtype=np.float64)
    pos = pos_box[:, 0] + (pos_box[:, 1] - pos_box[:, 0]) * u[:, 0, :]
    vel = vel_box[:, 0] + (vel_box[:, 1] - vel_box[:, 0]) * u[:, 1, :]
    return FlockConfiguration(pos, vel)


# --------------------------------------------------------------------------
# Closed-loop simulation
# --------------------------------------------------------------------------


def _local_views(config, noise, rng):
    return [sense_local(config, i, noise, rng) for i in range(config.n)]


def _shift_plan(controls, axis_t):
    """Receding-horizon warm start: drop the applied step, zero-pad the end."""
    shifted = np.roll(controls, -1, axis=axis_t)
    index = [slice(None)] * controls.ndim
    index[axis_t] = -1
    shifted[tuple(index)] = 0.0
    return shifted


def simulate(
    cfg: ExperimentConfig,
    seed: int,
    run_id: int = 0,
    initial: FlockConfiguration | None = None,
) -> RunRecord:
    """Run the closed loop for cfg.steps steps from a seeded initial state.

    `initial` replaces the box-sampled starting configuration (the noise
    stream still comes from the seed); it must have cfg.n agents.
    """
    rng = RandomStream(seed)
    if initial is None:
        config = sample_initial_config(cfg, rng)
    else:
        if initial.n != cfg.n or initial.dimension != cfg.dimension:
            raise ValueError(
                f"initial configuration is {initial.n}x{initial.dimension}, "
                f"expected {cfg.n}x{cfg.dimension}"
            )
        config = initial
    tag = cfg.model.tag
    params = cfg.model.params
    warm = None
    records = []
    started = time.perf_counter()
    for step in range(cfg.steps):
        try:
            if tag == "reynolds":
                views = _local_views(config, cfg.noise, rng)
                accel = np.stack(
                    [reynolds_accel(i, views[i], params) for i in range(cfg.n)]
                )
            elif tag == "olfati_saber":
                views = _local_views(config, cfg.noise, rng)
                accel = np.stack(
                    [olfati_saber_accel(i, views[i], params) for i in range(cfg.n)]
                )
            elif tag in CENTRALIZED_MPC_TAGS:
                view = sense_global(config, cfg.noise, rng)
                result = solve_mpc(
                    tag, view, params, cfg.limits, warm_start=warm, full_output=True
                )
                accel = result.accel
                warm = _shift_plan(result.controls, axis_t=0)
            elif tag in DISTRIBUTED_MPC_TAGS:
                views = _local_views(config, cfg.noise, rng)
                accel, plans = solve_mpc_distributed_all(
                    tag, views, params, cfg.limits, warm_start=warm
                )
                warm = _shift_plan(plans, axis_t=1)
            else:  # pragma: no cover - ModelSpec validates tags
                raise ValueError(f"unknown model tag {tag!r}")
        except SolverError as err:
            err.diagnostics.update(run_id=run_id, step=step, model=tag)
            raise
        config = step_dynamics(config, accel, cfg.limits)
        records.append(evaluate_metrics(config, cfg.r))
    return RunRecord(
        run_id=run_id,
        metrics=records,
        final=config,
        duration=time.perf_counter() - started,
    )


def _simulate_task(args):
    cfg, seed, run_id = args
    return simulate(cfg, seed, run_id)


def run_batch(cfg: ExperimentConfig, seeds, workers: int = 1) -> list:
    """Run one seeded simulation per seed, optionally across processes.

    Results come back ordered by run index, so output files are identical
    for any worker count.
    """
    tasks = [(cfg, seed, run_id) for run_id, seed in enumerate(seeds)]
    if workers <= 1 or len(tasks) <= 1:
        return [_simulate_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_simulate_task, tasks))


# --------------------------------------------------------------------------
# Experiments
# --------------------------------------------------------------------------


def run_comparison(
    cfg: ExperimentConfig, models, runs: int | None = None, workers: int = 1
) -> dict:
    """Run every model over the same paired run seeds.

    Returns {tag: [RunRecord, ...]}; run j of each model starts from the
    identical sampled initial configuration because the seed only depends
    on (base_seed, j).
    """
    runs = cfg.runs if runs is None else runs
    seeds = [mix_seed(cfg.base_seed, j) for j in range(runs)]
    out = {}
    for spec in models:
        model_cfg = replace(cfg, model=spec, runs=runs)
        out[spec.tag] = run_batch(model_cfg, seeds, workers)
    return out


def noise_for_level(level: int) -> NoiseSpec:
    """Benchmark noise schedule: level i has sigma_x = 0.2 i, sigma_v = 0.1 i."""
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    return NoiseSpec(sigma_x=0.2 * level, sigma_v=0.1 * level)


# run-index stride between noise levels; level L run j draws the seed for
# index L * stride + j, so level 0 replays the comparison's run seeds exactly
LEVEL_SEED_STRIDE = 1_000_000


def run_noise_sweep(
    cfg: ExperimentConfig,
    models,
    levels,
    runs: int | None = None,
    workers: int = 1,
) -> dict:
    """Run every model at every noise level.

    Returns {(tag, level): [RunRecord, ...]}.  Run j at level L uses
    ``mix_seed(base_seed, L * LEVEL_SEED_STRIDE + j)``: models are paired per
    level, and a level-0 sweep reproduces the noiseless comparison runs.
    """
    runs = cfg.runs if runs is None else runs
    if runs > LEVEL_SEED_STRIDE:
        raise ValueError(f"at most {LEVEL_SEED_STRIDE} runs per noise level")
    out = {}
    for level in levels:
        seeds = [
            mix_seed(cfg.base_seed, level * LEVEL_SEED_STRIDE + j)
            for j in range(runs)
        ]
        noisy_cfg = replace(cfg, noise=noise_for_level(level), runs=runs)
        for spec in models:
            model_cfg = replace(noisy_cfg, model=spec)
            out[(spec.tag, level)] = run_batch(model_cfg, seeds, workers)
    return out


# --------------------------------------------------------------------------
# Aggregation
# --------------------------------------------------------------------------


def _mean_or_none(values):
    present = [v for v in values if v is not None]
    if not present:
        return None, len(values)
    return sum(present) / len(present), len(values) - len(present)


def aggregate_steps(records_by_model: dict) -> list:
    """Per-model, per-step means across runs.

    Diameters of all-isolated configurations are excluded from the mean;
    their count is reported alongside.
    """
    rows = []
    for tag, records in records_by_model.items():
        steps = len(records[0].metrics)
        for step in range(steps):
            at_step = [rec.metrics[step] for rec in records]
            diam, none_count = _mean_or_none([m.max_diameter for m in at_step])
            rows.append(
                {
                    "model": tag,
                    "step": step,
                    "mean_num_components": float(
                        np.mean([m.num_components for m in at_step])
                    ),
                    "mean_max_diameter": diam,
                    "max_diameter_none_count": none_count,
                    "mean_velocity_convergence": float(
                        np.mean([m.velocity_convergence for m in at_step])
                    ),
                    "mean_irregularity": float(
                        np.mean([m.irregularity for m in at_step])
                    ),
                }
            )
    return rows


def aggregate_finals(records_by_model_level: dict) -> list:
    """Per-model, per-level means of the final-step metrics."""
    rows = []
    for (tag, level), records in sorted(
        records_by_model_level.items(), key=lambda kv: (kv[0][1], kv[0][0])
    ):
        finals = [rec.metrics[-1] for rec in records]
        diam, none_count = _mean_or_none([m.max_diameter for m in finals])
        noise = noise_for_level(level)
        rows.append(
            {
                "model": tag,
                "level": level,
                "sigma_x": noise.sigma_x,
                "sigma_v": noise.sigma_v,
                "mean_num_components": float(
                    np.mean([m.num_components for m in finals])
                ),
                "mean_max_diameter": diam,
                "max_diameter_none_count": none_count,
                "mean_velocity_convergence": float(
                    np.mean([m.velocity_convergence for m in finals])
                ),
                "mean_irregularity": float(np.mean([m.irregularity for m in finals])),
            }
        )
    return rows
