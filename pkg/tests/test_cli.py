import os
import subprocess
import sys

import pytest

from flockbench.cli import main, parse_config_file

FAST_OVERRIDES = [
    "--set", "n=4",
    "--set", "steps=3",
]


def run_cli(args):
    return main(list(args))


def test_simulate_writes_outputs(tmp_path, capsys):
    out = tmp_path / "sim"
    code = run_cli(
        ["simulate", "--model", "reynolds", "--seed", "11", "--out", str(out)]
        + FAST_OVERRIDES
    )
    assert code == 0
    assert (out / "steps.csv").exists()
    assert (out / "final_state.csv").exists()
    assert (out / "effective_config.txt").exists()
    echoed = (out / "effective_config.txt").read_text()
    assert "n = 4" in echoed and "seed = 11" in echoed
    lines = (out / "steps.csv").read_text().splitlines()
    assert len(lines) == 1 + 3  # header + one row per step


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("n = 6\nsteps = 2\nnoise.sigma_x = 0.1  # noisy\n")
    parsed = parse_config_file(str(cfg))
    assert parsed == {"n": "6", "steps": "2", "noise.sigma_x": "0.1"}
    out = tmp_path / "sim"
    code = run_cli(
        [
            "simulate",
            "--model",
            "reynolds",
            "--config",
            str(cfg),
            "--seed",
            "3",
            "--out",
            str(out),
            "--set",
            "steps=4",  # flag wins over file
        ]
    )
    assert code == 0
    lines = (out / "steps.csv").read_text().splitlines()
    assert len(lines) == 1 + 4


def test_unknown_config_key_fails(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    code = run_cli(
        ["simulate", "--model", "reynolds", "--config", str(cfg), "--out", str(tmp_path / "x")]
    )
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_missing_config_file_fails(tmp_path, capsys):
    code = run_cli(
        [
            "simulate",
            "--model",
            "reynolds",
            "--config",
            str(tmp_path / "absent.cfg"),
            "--out",
            str(tmp_path / "x"),
        ]
    )
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_compare_and_plot(tmp_path):
    out = tmp_path / "cmp"
    code = run_cli(
        [
            "compare",
            "--models",
            "reynolds,olfati_saber",
            "--runs",
            "2",
            "--seed",
            "9",
            "--out",
            str(out),
            "--workers",
            "1",
        ]
        + FAST_OVERRIDES
    )
    assert code == 0
    assert (out / "steps.csv").exists()
    assert (out / "summary.csv").exists()
    assert (out / "num_components.svg").exists()
    replot = tmp_path / "replot"
    code = run_cli(
        ["plot", "--summary", str(out / "summary.csv"), "--out", str(replot)]
    )
    assert code == 0
    assert (replot / "irregularity.svg").exists()


def test_noise_sweep_outputs(tmp_path):
    out = tmp_path / "sweep"
    code = run_cli(
        [
            "noise-sweep",
            "--models",
            "reynolds",
            "--levels",
            "0,2",
            "--runs",
            "2",
            "--seed",
            "4",
            "--out",
            str(out),
            "--workers",
            "1",
        ]
        + FAST_OVERRIDES
    )
    assert code == 0
    assert (out / "steps_level0.csv").exists()
    assert (out / "steps_level2.csv").exists()
    assert (out / "noise_summary.csv").exists()
    header = (out / "noise_summary.csv").read_text().splitlines()[0]
    assert header.startswith("model,level,sigma_x,sigma_v,")


def test_cli_determinism_across_processes(tmp_path):
    # same seeds, separate processes, different worker counts: identical CSVs
    env = dict(os.environ)
    outputs = []
    for name, workers in (("one", "1"), ("two", "2")):
        out = tmp_path / name
        cmd = [
            sys.executable,
            "-m",
            "flockbench",
            "compare",
            "--models",
            "reynolds,df_distributed",
            "--runs",
            "2",
            "--seed",
            "21",
            "--out",
            str(out),
            "--workers",
            workers,
            "--set",
            "n=4",
            "--set",
            "steps=3",
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        outputs.append((out / "steps.csv").read_bytes())
        outputs.append((out / "summary.csv").read_bytes())
    assert outputs[0] == outputs[2]
    assert outputs[1] == outputs[3]


def test_model_rejects_unknown_choice():
    with pytest.raises(SystemExit):
        run_cli(["simulate", "--model", "nonsense", "--out", "/tmp/unused"])
