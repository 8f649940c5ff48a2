"""
flockbench command line: seeded simulations, the model-comparison benchmark,
the sensing-noise sweep, and chart rendering from summary CSVs.

Configuration is a flat key/value document (``key = value`` per line, ``#``
comments, dotted section prefixes).  Command-line flags override file values
and the fully resolved configuration is echoed into the output directory.
"""

from __future__ import annotations

import argparse
import os
import sys

from .controllers import OlfatiSaberParams, ReynoldsParams
from .core import MotionLimits, NoiseSpec
from .harness import (
    MODEL_TAGS,
    ExperimentConfig,
    ModelSpec,
    aggregate_finals,
    aggregate_steps,
    run_comparison,
    run_noise_sweep,
    simulate,
)
from .mpc import MpcParams
from .output import (
    COMPARISON_SUMMARY_FIELDS,
    NOISE_SUMMARY_FIELDS,
    emit_plots,
    read_summary_csv,
    write_steps_csv,
    write_summary_csv,
)

DEFAULTS = {
    "model": "df_distributed",
    "dimension": "2",
    "n": "30",
    "steps": "100",
    "runs": "20",
    "seed": "1",
    "r": "8.4",
    "workers": "0",
    "limits.dt": "0.3",
    "limits.v_max": "8",
    "limits.a_max": "1",
    "noise.sigma_x": "0",
    "noise.sigma_v": "0",
    "init.position_min": "-15",
    "init.position_max": "15",
    "init.velocity_min": "0",
    "init.velocity_max": "2",
    "reynolds.r_c": "9",
    "reynolds.r_s": "5",
    "reynolds.r_al": "7.5",
    "reynolds.w_c": "8",
    "reynolds.w_s": "12",
    "reynolds.w_al": "8",
    "olfati.d": "7",
    "olfati.epsilon": "0.1",
    "olfati.a": "5",
    "olfati.b": "5",
    "olfati.h": "0.2",
    "olfati.c_alignment": "1",
    "mpc.horizon": "3",
    "mpc.lam": "1",
    "mpc.d": "7",
    "mpc.omega": "50",
}


class CliError(Exception):
    pass


def parse_config_file(path: str) -> dict:
    settings = {}
    try:
        with open(path) as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                settings[key.strip()] = value.strip()
    except OSError as err:
        raise CliError(f"cannot read config file {path}: {err}") from err
    return settings


def resolve_settings(args) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        file_settings = parse_config_file(args.config)
        unknown = set(file_settings) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
        settings.update(file_settings)
    for key, flag in (
        ("model", "model"),
        ("seed", "seed"),
        ("runs", "runs"),
        ("workers", "workers"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            settings[key] = str(value)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise CliError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in DEFAULTS:
            raise CliError(f"unknown config key {key!r}")
        settings[key] = value.strip()
    return settings


def _get_float(settings, key) -> float:
    try:
        return float(settings[key])
    except ValueError as err:
        raise CliError(f"config key {key} is not a number: {settings[key]!r}") from err


def _get_int(settings, key) -> int:
    try:
        return int(settings[key], 0)
    except ValueError as err:
        raise CliError(f"config key {key} is not an integer: {settings[key]!r}") from err


def _box(settings, lo_key, hi_key, dimension) -> tuple:
    lows = [float(v) for v in settings[lo_key].split(",")]
    highs = [float(v) for v in settings[hi_key].split(",")]
    if len(lows) == 1:
        lows = lows * dimension
    if len(highs) == 1:
        highs = highs * dimension
    if len(lows) != dimension or len(highs) != dimension:
        raise CliError(f"{lo_key}/{hi_key} must have 1 or {dimension} entries")
    return tuple(zip(lows, highs))


def build_model_spec(settings, tag: str) -> ModelSpec:
    if tag not in MODEL_TAGS:
        raise CliError(f"unknown model {tag!r}; choose from {', '.join(MODEL_TAGS)}")
    r = _get_float(settings, "r")
    if tag == "reynolds":
        params = ReynoldsParams(
            r_c=_get_float(settings, "reynolds.r_c"),
            r_s=_get_float(settings, "reynolds.r_s"),
            r_al=_get_float(settings, "reynolds.r_al"),
            w_c=_get_float(settings, "reynolds.w_c"),
            w_s=_get_float(settings, "reynolds.w_s"),
            w_al=_get_float(settings, "reynolds.w_al"),
        )
    elif tag == "olfati_saber":
        params = OlfatiSaberParams(
            r=r,
            d=_get_float(settings, "olfati.d"),
            epsilon=_get_float(settings, "olfati.epsilon"),
            a=_get_float(settings, "olfati.a"),
            b=_get_float(settings, "olfati.b"),
            h=_get_float(settings, "olfati.h"),
            c_alignment=_get_float(settings, "olfati.c_alignment"),
        )
    else:
        params = MpcParams(
            horizon=_get_int(settings, "mpc.horizon"),
            lam=_get_float(settings, "mpc.lam"),
            r=r,
            d=_get_float(settings, "mpc.d"),
            omega=_get_float(settings, "mpc.omega"),
        )
    return ModelSpec(tag, params)


def build_experiment(settings, tag: str, out_dir: str | None) -> ExperimentConfig:
    dimension = _get_int(settings, "dimension")
    return ExperimentConfig(
        model=build_model_spec(settings, tag),
        n=_get_int(settings, "n"),
        steps=_get_int(settings, "steps"),
        limits=MotionLimits(
            v_max=_get_float(settings, "limits.v_max"),
            a_max=_get_float(settings, "limits.a_max"),
            dt=_get_float(settings, "limits.dt"),
        ),
        r=_get_float(settings, "r"),
        noise=NoiseSpec(
            sigma_x=_get_float(settings, "noise.sigma_x"),
            sigma_v=_get_float(settings, "noise.sigma_v"),
        ),
        runs=_get_int(settings, "runs"),
        base_seed=_get_int(settings, "seed"),
        init_position_box=_box(
            settings, "init.position_min", "init.position_max", dimension
        ),
        init_velocity_box=_box(
            settings, "init.velocity_min", "init.velocity_max", dimension
        ),
        output_dir=out_dir,
    )


def _resolve_models(settings, models_arg: str) -> list:
    if models_arg.strip() == "all":
        tags = list(MODEL_TAGS)
    else:
        tags = [tag.strip() for tag in models_arg.split(",") if tag.strip()]
    if not tags:
        raise CliError("no models selected")
    return [build_model_spec(settings, tag) for tag in tags]


def _parse_levels(text: str) -> list:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        levels = list(range(int(lo), int(hi) + 1))
    else:
        levels = [int(part) for part in text.split(",") if part.strip()]
    if not levels or any(level < 0 for level in levels):
        raise CliError(f"invalid noise levels {text!r}")
    return levels


def _workers(settings) -> int:
    workers = _get_int(settings, "workers")
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _prepare_out(out_dir: str, settings) -> None:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "effective_config.txt")
    with open(path, "w") as handle:
        for key in sorted(settings):
            handle.write(f"{key} = {settings[key]}\n")


def _cmd_simulate(args) -> int:
    settings = resolve_settings(args)
    cfg = build_experiment(settings, settings["model"], args.out)
    _prepare_out(args.out, settings)
    record = simulate(cfg, seed=_get_int(settings, "seed"))
    write_steps_csv(os.path.join(args.out, "steps.csv"), {cfg.model.tag: [record]})
    final = record.final
    with open(os.path.join(args.out, "final_state.csv"), "w") as handle:
        cols = [f"x{k}" for k in range(final.dimension)] + [
            f"v{k}" for k in range(final.dimension)
        ]
        handle.write("agent," + ",".join(cols) + "\n")
        for i in range(final.n):
            values = [f"{v:.17g}" for v in final.positions[i]] + [
                f"{v:.17g}" for v in final.velocities[i]
            ]
            handle.write(f"{i}," + ",".join(values) + "\n")
    print(f"simulated {cfg.model.tag}: {cfg.steps} steps, n={cfg.n} -> {args.out}")
    return 0


def _cmd_compare(args) -> int:
    settings = resolve_settings(args)
    models = _resolve_models(settings, args.models)
    cfg = build_experiment(settings, models[0].tag, args.out)
    _prepare_out(args.out, settings)
    records = run_comparison(cfg, models, runs=cfg.runs, workers=_workers(settings))
    write_steps_csv(os.path.join(args.out, "steps.csv"), records)
    summary = aggregate_steps(records)
    write_summary_csv(
        os.path.join(args.out, "summary.csv"), summary, COMPARISON_SUMMARY_FIELDS
    )
    emit_plots(summary, args.out, x_key="step")
    print(
        f"compared {len(records)} models x {cfg.runs} runs x {cfg.steps} steps"
        f" -> {args.out}"
    )
    return 0


def _cmd_noise_sweep(args) -> int:
    settings = resolve_settings(args)
    models = _resolve_models(settings, args.models)
    levels = _parse_levels(args.levels)
    cfg = build_experiment(settings, models[0].tag, args.out)
    _prepare_out(args.out, settings)
    records = run_noise_sweep(
        cfg, models, levels, runs=cfg.runs, workers=_workers(settings)
    )
    for level in levels:
        at_level = {
            tag: recs for (tag, lv), recs in records.items() if lv == level
        }
        write_steps_csv(
            os.path.join(args.out, f"steps_level{level}.csv"), at_level
        )
    summary = aggregate_finals(records)
    write_summary_csv(
        os.path.join(args.out, "noise_summary.csv"), summary, NOISE_SUMMARY_FIELDS
    )
    emit_plots(summary, args.out, x_key="level")
    print(
        f"swept {len(models)} models over levels {levels[0]}..{levels[-1]}"
        f" ({cfg.runs} runs each) -> {args.out}"
    )
    return 0


def _cmd_plot(args) -> int:
    fields, rows = read_summary_csv(args.summary)
    if not rows:
        raise CliError(f"summary file {args.summary} has no data rows")
    x_key = "level" if "level" in fields else "step"
    os.makedirs(args.out, exist_ok=True)
    paths = emit_plots(rows, args.out, x_key=x_key)
    print(f"wrote {len(paths)} charts -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flockbench",
        description="flocking-controller simulation and benchmarking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_models=False):
        p.add_argument("--config", help="key/value configuration file")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a single config key (repeatable)",
        )
        p.add_argument("--workers", type=int, help="parallel run workers (0 = auto)")
        if with_models:
            p.add_argument(
                "--models",
                default="all",
                help="comma-separated model tags or 'all'",
            )
            p.add_argument("--runs", type=int, help="runs per model")

    p_sim = sub.add_parser("simulate", help="run one seeded simulation")
    p_sim.add_argument("--model", required=True, choices=MODEL_TAGS)
    common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="benchmark models on shared seeds")
    common(p_cmp, with_models=True)
    p_cmp.set_defaults(func=_cmd_compare, model=None)

    p_sweep = sub.add_parser("noise-sweep", help="benchmark under sensing noise")
    p_sweep.add_argument(
        "--levels", default="1..10", help="noise levels, e.g. 1..10 or 2,4,6"
    )
    common(p_sweep, with_models=True)
    p_sweep.set_defaults(func=_cmd_noise_sweep, model=None)

    p_plot = sub.add_parser("plot", help="render charts from a summary CSV")
    p_plot.add_argument("--summary", required=True, help="summary CSV path")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
