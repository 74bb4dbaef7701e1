"""
Result serialization: trajectory CSVs, JSON documents, audit log and SVG plots.

Features:
- Trajectory CSV with columns t, x[i].., y[i].., d[i].., s[i].., g[i].., loss, cycle_k, updated
- Streaming CSV sink for long horizons (flushes in blocks)
- Deterministic JSON (sorted keys, no timestamps unless the caller adds them)
- JSONL violation audit log
- Jinja2-rendered SVG line plot of a gamma sweep
"""
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import logging
from jinja2 import Environment, FileSystemLoader

from oio_bench.models.records import Trajectory

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"
SWEEP_TEMPLATE = "sweep_plot.svg.j2"
VECTOR_FIELDS = ("x", "y", "d", "s", "g")


def trajectory_columns(n: int) -> List[str]:
    """CSV header for an n-product trajectory."""
    columns = ["t"]
    for name in VECTOR_FIELDS:
        columns.extend(f"{name}[{i}]" for i in range(1, n + 1))
    return columns + ["loss", "cycle_k", "updated"]


def trajectory_frame(traj: Trajectory, start: int = 0, stop: Optional[int] = None) -> pd.DataFrame:
    """Rows start..stop-1 (0-based) of a trajectory as a DataFrame."""
    stop = traj.T if stop is None else stop
    rows = slice(start, stop)
    vectors = np.hstack([getattr(traj, name)[rows] for name in VECTOR_FIELDS])
    frame = pd.DataFrame(vectors, columns=trajectory_columns(traj.n)[1:-3])
    frame.insert(0, "t", np.arange(start + 1, stop + 1))
    frame["loss"] = traj.loss[rows]
    frame["cycle_k"] = traj.cycle[rows]
    frame["updated"] = traj.updated[rows].astype(int)
    return frame


def write_trajectory_csv(traj: Trajectory, path: PathLike) -> Path:
    """Write a full trajectory to CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory_frame(traj).to_csv(path, index=False, float_format="%.17g")
    return path


def read_trajectory_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)


class StreamingCsvSink:
    """
    Per-period simulator sink appending trajectory rows to a CSV file.

    Rows are buffered and flushed every ``block`` periods and at ``close()``,
    so memory stays bounded by the block while the file grows with t.
    """

    def __init__(self, path: PathLike, block: int = 10_000):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.block = block
        self.flushed = 0
        self._traj: Optional[Trajectory] = None
        self._last = 0

    def __call__(self, t: int, traj: Trajectory) -> None:
        self._traj = traj
        self._last = t
        if t - self.flushed >= self.block:
            self.flush()

    def flush(self) -> None:
        if self._traj is None or self._last <= self.flushed:
            return
        frame = trajectory_frame(self._traj, self.flushed, self._last)
        frame.to_csv(
            self.path,
            mode="w" if self.flushed == 0 else "a",
            header=self.flushed == 0,
            index=False,
            float_format="%.17g",
        )
        self.flushed = self._last

    def close(self) -> Path:
        self.flush()
        return self.path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no inf/nan
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, finite numbers only."""
    return json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n"


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    return path


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def append_violation(path: PathLike, seed: int, violation: Dict[str, Any], **extra: Any) -> Dict[str, Any]:
    """
    Append a feasibility violation to the JSONL audit log.

    Args:
        path: audit log file (created on first write)
        seed: stream seed of the replication
        violation: FeasibilityViolation.to_dict()
        extra: additional context (replication, gamma, ...)

    Returns:
        The event written
    """
    event = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "period": violation.get("period"),
        "y": violation.get("y"),
        "x": violation.get("x"),
        "severity": "CRITICAL",
    }
    event.update(_jsonable(extra))

    logger.critical(f"Feasibility violation: seed={seed} period={event['period']}")

    with open(path, "a") as f:
        f.write(json.dumps(event) + "\n")
    return event


def read_violations(path: PathLike) -> List[Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


class PlotRenderer:
    """
    Renders sweep plots from the Jinja2 SVG template.

    Features:
    - log-scaled x axis (gamma), linear y axis (mean regret)
    - stderr whiskers around each point
    - decade ticks on the x axis
    """

    WIDTH = 640
    HEIGHT = 400
    MARGIN = 60

    def __init__(self, template_dir: Optional[PathLike] = None, template_name: str = SWEEP_TEMPLATE):
        self.jinja_env = Environment(
            loader=FileSystemLoader(str(template_dir or TEMPLATE_DIR)),
            autoescape=False
        )
        self.template_name = template_name

    def render_sweep(
        self,
        gammas: Sequence[float],
        means: Sequence[float],
        stderrs: Sequence[float],
        title: str = "Mean regret vs gamma",
    ) -> str:
        """
        SVG text of mean R_T against gamma on a log-x axis.

        Points with a non-finite mean are skipped.
        """
        g = np.asarray(gammas, dtype=float)
        m = np.asarray(means, dtype=float)
        e = np.nan_to_num(np.asarray(stderrs, dtype=float))
        keep = np.isfinite(m) & (g > 0)
        g, m, e = g[keep], m[keep], e[keep]

        plot_w = self.WIDTH - 2 * self.MARGIN
        plot_h = self.HEIGHT - 2 * self.MARGIN
        if g.size:
            lx = np.log10(g)
            x_lo, x_hi = float(lx.min()), float(lx.max())
            y_lo = float(min(0.0, (m - e).min()))
            y_hi = float((m + e).max())
        else:
            lx = g
            x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
        if x_hi == x_lo:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
        if y_hi == y_lo:
            y_hi = y_lo + 1.0

        def sx(v: float) -> float:
            return self.MARGIN + (v - x_lo) / (x_hi - x_lo) * plot_w

        def sy(v: float) -> float:
            return self.HEIGHT - self.MARGIN - (v - y_lo) / (y_hi - y_lo) * plot_h

        points = [
            {
                "x": round(sx(float(a)), 2),
                "y": round(sy(float(b)), 2),
                "low": round(sy(float(b - c)), 2),
                "high": round(sy(float(b + c)), 2),
                "gamma": float(gv),
                "mean": float(b),
            }
            for a, b, c, gv in zip(lx, m, e, g)
        ]
        x_ticks = [
            {"x": round(sx(float(k)), 2), "label": f"1e{k}"}
            for k in range(int(math.ceil(x_lo)), int(math.floor(x_hi)) + 1)
        ]
        y_ticks = [
            {"y": round(sy(float(v)), 2), "label": f"{v:.4g}"}
            for v in np.linspace(y_lo, y_hi, 5)
        ]

        template = self.jinja_env.get_template(self.template_name)
        return template.render(
            width=self.WIDTH,
            height=self.HEIGHT,
            margin=self.MARGIN,
            title=title,
            points=points,
            polyline=" ".join(f"{p['x']},{p['y']}" for p in points),
            x_ticks=x_ticks,
            y_ticks=y_ticks,
        )

    def write_sweep(self, path: PathLike, gammas, means, stderrs, title: str = "Mean regret vs gamma") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render_sweep(gammas, means, stderrs, title=title), encoding="utf-8")
        return path


# Global instance
plot_renderer = PlotRenderer()
