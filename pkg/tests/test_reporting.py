"""Trajectory CSVs, JSON output, audit log and sweep plots."""
import json
import math
from datetime import datetime, timedelta

import numpy as np

from oio_bench.services.reporting import (
    PlotRenderer,
    StreamingCsvSink,
    append_violation,
    dumps,
    read_trajectory_csv,
    read_violations,
    trajectory_columns,
    write_trajectory_csv,
)
from oio_bench.services.dynamics import LostSales
from oio_bench.services.policies import MaxCOSDPolicy
from oio_bench.services.simulator import run


def test_columns():
    assert trajectory_columns(2) == [
        "t", "x[1]", "x[2]", "y[1]", "y[2]", "d[1]", "d[2]", "s[1]", "s[2]", "g[1]", "g[2]",
        "loss", "cycle_k", "updated",
    ]


def test_csv_preserves_values(maxcosd_run, tmp_path):
    path = write_trajectory_csv(maxcosd_run, tmp_path / "traj.csv")
    frame = read_trajectory_csv(path)
    assert list(frame.columns) == trajectory_columns(1)
    assert len(frame) == maxcosd_run.T
    assert frame["t"].tolist() == list(range(1, maxcosd_run.T + 1))
    np.testing.assert_array_equal(frame["y[1]"].to_numpy(), maxcosd_run.y[:, 0])
    np.testing.assert_array_equal(frame["loss"].to_numpy(), maxcosd_run.loss)
    assert set(frame["updated"].unique()) <= {0, 1}


def test_streaming_sink_matches_full_write(unit_box, setting1_loss, poisson_one, tmp_path):
    sink = StreamingCsvSink(tmp_path / "stream.csv", block=64)
    traj = run(
        LostSales(), poisson_one, setting1_loss, unit_box, MaxCOSDPolicy(unit_box, 0.05),
        T=250, seed=3, sink=sink,
    )
    streamed = read_trajectory_csv(sink.close())
    full = read_trajectory_csv(write_trajectory_csv(traj, tmp_path / "full.csv"))
    assert sink.flushed == 250
    assert streamed.equals(full)


def test_dumps_is_canonical():
    text = dumps({"b": np.float64(1.5), "a": [np.int64(2), float("nan"), float("inf")]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [2, None, "inf"], "b": 1.5}


def test_violation_audit_log(tmp_path):
    path = tmp_path / "violations.jsonl"
    violation = {"period": 2, "y": [0.5], "x": [0.8]}
    append_violation(path, 7, violation, replication=1)
    append_violation(path, 8, violation, replication=2)
    events = read_violations(path)
    assert [e["seed"] for e in events] == [7, 8]
    assert events[0]["severity"] == "CRITICAL"
    assert events[0]["period"] == 2
    assert events[1]["replication"] == 2
    assert datetime.fromisoformat(events[0]["timestamp"]).utcoffset() == timedelta(0)


def test_missing_audit_log(tmp_path):
    assert read_violations(tmp_path / "absent.jsonl") == []


class TestPlot:
    def test_render_points(self):
        svg = PlotRenderer().render_sweep([1e-3, 1e-2, 1e-1], [30.0, 10.0, 20.0], [1.0, 0.5, 2.0])
        assert svg.startswith("<svg")
        assert svg.count("<circle") == 3
        assert "<polyline" in svg
        assert ">1e-2<" in svg

    def test_non_finite_means_skipped(self):
        svg = PlotRenderer().render_sweep([1e-3, 1e-2], [math.nan, 4.0], [0.0, 0.0])
        assert svg.count("<circle") == 1

    def test_empty_sweep(self, tmp_path):
        path = PlotRenderer().write_sweep(tmp_path / "plot.svg", [], [], [])
        text = path.read_text()
        assert "<polyline" not in text
        assert text.rstrip().endswith("</svg>")

    def test_template_loaded_from_directory(self, tmp_path):
        (tmp_path / "compact.svg.j2").write_text("<svg>{{ points | length }} points: {{ title }}</svg>")
        renderer = PlotRenderer(template_dir=tmp_path, template_name="compact.svg.j2")
        svg = renderer.render_sweep([1e-2, 1e-1], [3.0, 2.0], [0.1, 0.1], title="cell")
        assert svg == "<svg>2 points: cell</svg>"
