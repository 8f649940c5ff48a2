import xml.etree.ElementTree as ET

import pytest

from flockbench import ExperimentConfig, default_model_spec, mix_seed
from flockbench.harness import aggregate_steps, run_batch
from flockbench.output import (
    COMPARISON_SUMMARY_FIELDS,
    emit_plots,
    format_value,
    read_summary_csv,
    render_line_chart,
    write_steps_csv,
    write_summary_csv,
)

STEP_HEADER = (
    "model,run_id,step,num_components,max_diameter,velocity_convergence,irregularity"
)


def tiny_records(runs=1, steps=2):
    cfg = ExperimentConfig(
        model=default_model_spec("reynolds"), n=3, steps=steps, base_seed=5
    )
    seeds = [mix_seed(cfg.base_seed, j) for j in range(runs)]
    return {"reynolds": run_batch(cfg, seeds)}


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def test_format_value():
    assert format_value(None) == ""
    assert format_value(3) == "3"
    assert format_value("reynolds") == "reynolds"
    assert format_value(1.0) == "1"
    third = format_value(1.0 / 3.0)
    assert third == "0.33333333333333331"  # 17 significant digits round-trips
    assert float(third) == 1.0 / 3.0


def test_empty_records_write_header_only(tmp_path):
    path = tmp_path / "steps.csv"
    write_steps_csv(path, {})
    assert path.read_text() == STEP_HEADER + "\n"


def test_steps_csv_rows_and_order(tmp_path):
    path = tmp_path / "steps.csv"
    write_steps_csv(path, tiny_records(runs=1, steps=2))
    lines = path.read_text().splitlines()
    assert lines[0] == STEP_HEADER
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "reynolds" and first[1] == "0" and first[2] == "0"
    assert lines[2].split(",")[2] == "1"


def test_none_diameter_serialized_empty(tmp_path):
    cfg = ExperimentConfig(
        model=default_model_spec("reynolds"),
        n=2,
        steps=1,
        base_seed=5,
        init_position_box=((-500.0, 500.0),) * 2,  # agents far apart
    )
    records = {"reynolds": run_batch(cfg, [42])}
    assert records["reynolds"][0].metrics[0].max_diameter is None
    path = tmp_path / "steps.csv"
    write_steps_csv(path, records)
    row = path.read_text().splitlines()[1].split(",")
    assert row[4] == ""


def test_csv_byte_identical_rerun(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_steps_csv(a, tiny_records(runs=2, steps=3))
    write_steps_csv(b, tiny_records(runs=2, steps=3))
    assert a.read_bytes() == b.read_bytes()


def test_summary_roundtrip(tmp_path):
    rows = aggregate_steps(tiny_records(runs=2, steps=2))
    path = tmp_path / "summary.csv"
    write_summary_csv(path, rows, COMPARISON_SUMMARY_FIELDS)
    fields, parsed = read_summary_csv(path)
    assert fields == COMPARISON_SUMMARY_FIELDS
    assert len(parsed) == len(rows)
    assert parsed[0]["model"] == "reynolds"
    assert parsed[0]["step"] == 0
    assert parsed[0]["mean_num_components"] == pytest.approx(
        rows[0]["mean_num_components"]
    )


# --------------------------------------------------------------------------
# SVG charts
# --------------------------------------------------------------------------


def test_constant_series_renders_horizontal_polyline():
    svg = render_line_chart(
        [("mymodel", [(0, 2.0), (1, 2.0), (2, 2.0)])],
        title="demo",
        x_label="step",
        y_label="value",
    )
    root = ET.fromstring(svg)  # valid XML
    ns = "{http://www.w3.org/2000/svg}"
    polylines = [
        el for el in root.iter(f"{ns}polyline") if el.get("fill") == "none"
    ]
    assert len(polylines) >= 1
    pts = [p.split(",") for p in polylines[0].get("points").split()]
    ys = {y for _, y in pts}
    assert len(ys) == 1  # horizontal


def test_chart_has_one_legend_entry_per_model():
    series = [
        (f"model{k}", [(0, float(k)), (1, float(k) + 0.5)]) for k in range(6)
    ]
    svg = render_line_chart(series, title="t", x_label="x", y_label="y")
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    legend = [el for el in root.iter(f"{ns}text") if el.get("class") == "legend"]
    assert [el.text for el in legend] == [f"model{k}" for k in range(6)]


def test_chart_gaps_break_polyline():
    svg = render_line_chart(
        [("m", [(0, 1.0), (1, 1.5), (2, None), (3, 2.0), (4, 2.5)])],
        title="t",
        x_label="x",
        y_label="y",
    )
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    series_lines = [
        el for el in root.iter(f"{ns}polyline") if el.get("fill") == "none"
    ]
    assert len(series_lines) == 2


def test_chart_deterministic_bytes():
    series = [("a", [(0, 1.0), (1, 2.0)]), ("b", [(0, 2.0), (1, 1.0)])]
    one = render_line_chart(series, title="t", x_label="x", y_label="y")
    two = render_line_chart(series, title="t", x_label="x", y_label="y")
    assert one == two


def test_emit_plots_writes_one_file_per_metric(tmp_path):
    rows = aggregate_steps(tiny_records(runs=1, steps=3))
    paths = emit_plots(rows, tmp_path, x_key="step")
    assert len(paths) == 4
    for path in paths:
        ET.parse(path)  # strict XML parse
    names = {p.split("/")[-1] for p in map(str, paths)}
    assert names == {
        "num_components.svg",
        "max_diameter.svg",
        "velocity_convergence.svg",
        "irregularity.svg",
    }


def test_emit_plots_rejects_empty_summary(tmp_path):
    with pytest.raises(ValueError):
        emit_plots([], tmp_path)
