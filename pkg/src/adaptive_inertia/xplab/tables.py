"""Table analogs built from run records: inertia probes, comparisons, summary."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from statistics import fmean

from .config import PROBE_TIMES

REDUCTION_BAND = (19.0, 25.0)  # percent, reported band for the adaptive arm

INERTIA_HEADER = (["network", "disturbance", "seed", "controller", "M0", "gain"]
                  + [f"M_{t:g}s" for t in PROBE_TIMES] + ["M_min_observed", "M_max_observed"])
COMPARISON_HEADER = ["network", "disturbance", "seed", "controller",
                     "H_const", "H_adapt", "H_reduction_pct",
                     "tau_const", "tau_adapt", "tau_reduction_pct",
                     "max_re_const", "max_re_adapt"]
SUMMARY_HEADER = ["network", "controller", "rows", "avg_H_reduction_pct",
                  "avg_tau_reduction_pct", "negative_H_rows", "negative_tau_rows"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def _pct(rate) -> float:
    return 100.0 * float(rate)


def _ok(records):
    return [r for r in records if r.report is not None]


def inertia_rows(records) -> list[list]:
    rows = []
    for rec in _ok(records):
        c, ctrl = rec.cell, rec.report["controller"]
        if ctrl["type"] == "constant":
            M0, gain = ctrl["M"], 0.0
        else:
            M0, gain = ctrl["resolved"]["M0"], ctrl["resolved"]["gain"]
        probes = [rec.probes.get(f"{t:g}") for t in PROBE_TIMES]
        rows.append([c["network"], c["disturbance"], c["seed"], c["controller"], float(M0),
                     float(gain), *probes, *map(float, rec.report["M_range"])])
    return rows


def emit_inertia_table(records) -> str:
    return to_csv(INERTIA_HEADER, inertia_rows(records))


def comparison_rows(records) -> list[list]:
    by_key = {r.key: r for r in _ok(records)}
    rows = []
    for rec in _ok(records):
        red = rec.report.get("reduction_vs_baseline")
        if red is None:
            continue
        base = by_key[red["baseline"]].report
        a, c = rec.report, rec.cell
        rows.append([c["network"], c["disturbance"], c["seed"], c["controller"],
                     base["H_T"], a["H_T"], _pct(red["H"]),
                     base["tau"], a["tau"], _pct(red["tau"]),
                     base["max_real_part"], a["max_real_part"]])
    return rows


def emit_comparison_table(records) -> str:
    return to_csv(COMPARISON_HEADER, comparison_rows(records))


def summarise(comparison_csv: str) -> list[list]:
    """Per (network, controller) means over disturbances and seeds."""
    header, rows = read_csv(comparison_csv)
    col = {name: i for i, name in enumerate(header)}
    groups: dict[tuple[str, str], list[list[str]]] = {}
    for row in rows:
        groups.setdefault((row[col["network"]], row[col["controller"]]), []).append(row)
    out = []
    for (net, ctrl), items in groups.items():
        h = [float(r[col["H_reduction_pct"]]) for r in items]
        tau = [float(r[col["tau_reduction_pct"]]) for r in items]
        out.append([net, ctrl, len(items), fmean(h), fmean(tau),
                    sum(x < 0 for x in h), sum(x < 0 for x in tau)])
    return out


def findings(records, summary_rows, config_hash: str) -> list[dict]:
    """Discrepancies worth a reader's attention; none of them fail the run."""
    out = []
    for rec in records:
        if rec.error is not None:
            out.append({"kind": "cell_failed", "cell": rec.key, "detail": rec.error})
            continue
        rep = rec.report
        if not rep["stability_pass"]:
            out.append({"kind": "stability_threshold", "cell": rec.key,
                        "max_real_part": rep["max_real_part"],
                        "threshold": rep["stability_threshold"]})
        red = rep.get("reduction_vs_baseline")
        if red is not None and red["H"] < 0:
            out.append({"kind": "negative_H_reduction", "cell": rec.key,
                        "H_reduction_pct": _pct(red["H"])})
    lo, hi = REDUCTION_BAND
    for net, ctrl, _, avg_h, _, _, _ in summary_rows:
        if not lo <= avg_h <= hi:
            out.append({"kind": "outside_reported_band", "network": net, "controller": ctrl,
                        "avg_H_reduction_pct": avg_h, "band_pct": [lo, hi]})
    for f in out:
        f["config_hash"] = config_hash
    return out


def emit_summary(records, config_hash: str) -> tuple[str, str]:
    comparison = emit_comparison_table(records)
    rows = summarise(comparison)
    text = to_csv(SUMMARY_HEADER, rows)
    payload = {
        "config_hash": config_hash,
        "runs": len(records),
        "failed": sum(r.error is not None for r in records),
        "summary": [dict(zip(SUMMARY_HEADER, row)) for row in rows],
        "findings": findings(records, rows, config_hash),
    }
    return text, json.dumps(_json_safe(payload), sort_keys=True, indent=2) + "\n"


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


def write_tables(records, out_dir: Path, config_hash: str) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_csv, summary_json = emit_summary(records, config_hash)
    files = {
        "inertia": (out_dir / "inertia.csv", emit_inertia_table(records)),
        "comparison": (out_dir / "comparison.csv", emit_comparison_table(records)),
        "summary": (out_dir / "summary.csv", summary_csv),
        "summary_json": (out_dir / "summary.json", summary_json),
    }
    for path, text in files.values():
        path.write_text(text)
    return {k: v[0] for k, v in files.items()}
