"""Machine-readable report emitters: CSV with a fixed column order, versioned JSON.

Floats are rendered with 17 significant digits (round-trip exact), line
endings are pinned to "\\n", and no wall-clock data enters the files, so
identical runs produce byte-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .estimates import BarrierFamily, eta, xi

REPORT_SCHEMA_VERSION = 1

# One row per sweep instance; absent quantities stay empty.
SWEEP_COLUMNS = [
    "instance", "family", "topology", "n", "L", "density", "N", "b", "bins",
    "lambda1", "lambda1_mode", "lambda1_err_est", "K_eff", "K_min_radius", "d",
    "k_ratio", "a", "delta", "case", "case_mu",
    "bound_lichnerowicz", "bound_ling", "bound_case",
    "margin_lichnerowicz", "margin_ling", "margin_case",
    "gradient_margin", "dominance_min", "transit_margin", "holder_margin",
    "soliton_gamma", "soliton_resid_rr", "soliton_resid_tan",
    "bianchi_resid", "constancy_std", "trace_resid",
    "eigenid_resid", "eigenid_member", "potential_shift",
    "verdict_spectrum", "verdict_bounds", "verdict_estimates", "verdict_soliton",
    "error",
]

SUITE_COLUMNS = ["criterion", "instance", "quantity", "value", "expected",
                 "tolerance", "status"]

BARRIER_COLUMNS = ["t", "xi", "eta", "z"]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    return str(value)


def render_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(col)) for col in columns])
    return buf.getvalue()


def emit_csv(rows: list[dict], path: str | Path, columns: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(rows, columns))
    return path


def json_payload(rows: list[dict], summary: dict, environment: dict) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "environment": environment,
        "summary": summary,
        "rows": rows,
    }


def render_json(payload: dict) -> str:
    def _default(value):
        if isinstance(value, (np.integer,)):
            return int(value)
        if isinstance(value, (np.floating,)):
            return float(value)
        if isinstance(value, np.ndarray):
            return value.tolist()
        raise TypeError(f"not JSON serializable: {type(value)}")

    return json.dumps(payload, sort_keys=True, indent=2, default=_default,
                      allow_nan=True) + "\n"


def emit_json(payload: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_json(payload))
    return path


def environment_stamp(grids) -> dict:
    return {"package": "driftlab", "version": __version__,
            "report_schema": REPORT_SCHEMA_VERSION, "grids": sorted(set(grids))}


def barrier_table(a: float, b: float, delta: float, mu: float,
                  points: int = 1001) -> list[dict]:
    """Plot-ready samples (t, xi, eta, z) over the full interval [-pi/2, pi/2]."""
    z = BarrierFamily(a=float(a), b=float(b), delta=float(delta), mu=float(mu),
                      sigma=None, label="standard")
    t = np.linspace(-math.pi / 2.0, math.pi / 2.0, points)
    xv, ev, zv = xi(t), eta(t), z.value(t)
    return [{"t": float(t[i]), "xi": float(xv[i]), "eta": float(ev[i]),
             "z": float(zv[i])} for i in range(points)]
