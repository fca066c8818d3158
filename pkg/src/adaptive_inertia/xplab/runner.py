"""Scenario-matrix execution: network x disturbance x controller x seed."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .. import controller as ctl
from .. import metrics
from ..dynamics import ConstantInertia, Trajectory, simulate
from ..netgen import LaplacianMatrix, Network, generate, laplacian
from ..spectral import Spectrum, decompose, disturbance_projection, spectrum_csv
from .config import (PROBE_TIMES, ControllerEntry, DisturbanceEntry, ExperimentConfig,
                     NetworkEntry, load_preset_file)
from .presets import PAPER_M0, paper_preset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prepared:
    net: Network
    L: LaplacianMatrix
    spectrum: Spectrum


@dataclass
class RunRecord:
    config_hash: str
    cell: dict[str, Any]
    report: dict[str, Any] | None
    probes: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def key(self) -> str:
        return cell_key(self.cell)

    def to_dict(self) -> dict[str, Any]:
        out = {"config_hash": self.config_hash, "cell": self.cell, "probes": self.probes}
        if self.report is not None:
            out.update(self.report)
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunRecord":
        d = dict(d)
        base = {k: d.pop(k) for k in ("config_hash", "cell", "probes")}
        error = d.pop("error", None)
        return cls(base["config_hash"], base["cell"], d or None, base["probes"], error)


@dataclass
class MatrixResult:
    records: list[RunRecord]
    config_hash: str

    @property
    def failures(self) -> list[RunRecord]:
        return [r for r in self.records if r.error is not None]


def cell_key(cell: dict[str, Any]) -> str:
    return f"{cell['network']}__{cell['disturbance']}__s{cell['seed']}__{cell['controller']}"


def prepare_network(entry: NetworkEntry, seed: int, K: float) -> Prepared:
    net = generate(entry.kind, entry.n, seed=seed, **entry.generator_params())
    L = laplacian(net, K)
    return Prepared(net, L, decompose(L))


def baseline_M0(cfg: ExperimentConfig, kind: str, spectrum: Spectrum) -> float:
    if cfg.M0_mode == "paper":
        return PAPER_M0[kind]
    return ctl.baseline_inertia(cfg.sim.D, spectrum.lambda_max)


def resolve_controller(cfg: ExperimentConfig, entry: ControllerEntry, net_entry: NetworkEntry,
                       dist: DisturbanceEntry, prep: Prepared):
    """Inertia policy plus a JSON description of what was resolved."""
    D = cfg.sim.D
    if entry.type == "constant":
        M = entry.M if entry.M is not None else baseline_M0(cfg, net_entry.kind, prep.spectrum)
        return ConstantInertia(M), {"name": entry.name, "type": "constant", "M": M}

    overrides = entry.overrides()
    if entry.preset == "paper":
        preset = paper_preset(net_entry.kind, dist.kind, cfg.M0_mode == "paper", **overrides)
    elif entry.preset in (None, "tuned"):
        fields = {"gain": 0.0, **overrides}
        if cfg.M0_mode == "paper" and "M0_mode" not in fields:
            fields.update(M0_mode="explicit", M0_value=PAPER_M0[net_entry.kind])
        preset = ctl.ControllerPreset(**fields)
    else:
        preset = load_preset_file(entry.preset)
        if overrides:
            preset = ctl.ControllerPreset(**{**preset.to_dict(), **overrides})
    config = preset.resolve(prep.spectrum, D)
    desc: dict[str, Any] = {"name": entry.name, "type": "adaptive",
                            "preset": entry.preset or "inline", **preset.to_dict()}
    if entry.preset == "tuned":
        spec = dist.spec()
        gamma = dist.amplitude * disturbance_projection(prep.spectrum,
                                                        spec.direction_vector(prep.spectrum))
        design = ctl.design_gain(config, prep.spectrum, D, gamma, entry.safety_factor,
                                 kick=dist.kick)
        config = ctl.ControllerConfig(**{**config.__dict__, "gain": design.gain})
        desc.update(gain=design.gain, stability_bound=design.stability_bound,
                    rate_bound=design.rate_bound)
    desc["resolved"] = config.to_dict()
    return ctl.AdaptiveInertia(config), desc


def probe_inertia(traj: Trajectory, times=PROBE_TIMES) -> dict[str, float]:
    return {f"{t:g}": float(traj.inertia_at(t)) for t in times if t <= traj.t_end + 1e-12}


def _network_meta(net: Network) -> dict[str, Any]:
    return {"kind": net.kind, "n": net.n, "params": dict(net.params), "seed": net.seed}


def run_cell(cfg: ExperimentConfig, net_entry: NetworkEntry, dist: DisturbanceEntry,
             ctrl: ControllerEntry, seed: int, prep: Prepared, config_hash: str,
             out_dir: Path | None = None) -> RunRecord:
    cell = {"network": net_entry.label, "disturbance": dist.label, "seed": seed,
            "controller": ctrl.name, "controller_type": ctrl.type}
    try:
        policy, desc = resolve_controller(cfg, ctrl, net_entry, dist, prep)
        params = cfg.sim.params()
        traj = simulate(prep.L, dist.spec(), params, policy, prep.spectrum)
        meta = {"network": net_entry.label, "disturbance": dist.label, "seed": seed}
        rep = metrics.evaluate(traj, params.D, cfg.horizon_T, cfg.stability_threshold, meta)
        report = {
            "network": _network_meta(prep.net),
            "disturbance": dist.spec().to_dict(),
            "controller": desc,
            "T": cfg.horizon_T,
            "H_T": rep.H_T,
            "H_inf": rep.H_inf_estimate,
            "tau": rep.tau,
            "max_real_part": rep.max_real_part,
            "stability_pass": rep.stability_pass,
            "stability_threshold": cfg.stability_threshold,
            "M_range": list(rep.M_range_observed),
        }
        record = RunRecord(config_hash, cell, report, probe_inertia(traj))
        if out_dir is not None and cfg.write_trajectories:
            path = out_dir / "trajectories" / f"{record.key}.csv"
            path.write_text(traj.to_csv(cfg.trajectory_modes))
        return record
    except Exception as exc:  # a failed cell must not stop the matrix
        log.warning("cell %s failed: %s", cell_key(cell), exc)
        return RunRecord(config_hash, cell, None, {}, f"{type(exc).__name__}: {exc}")


def _report_from(record: RunRecord) -> metrics.PerformanceReport:
    r = record.report
    meta = {"network": record.cell["network"], "disturbance": record.cell["disturbance"],
            "seed": record.cell["seed"]}
    return metrics.PerformanceReport(r["H_T"], r["H_inf"], r["tau"], r["max_real_part"],
                                     r["stability_pass"], tuple(r["M_range"]), r["T"], meta)


def attach_comparisons(records: list[RunRecord]) -> None:
    """Pair every adaptive run with the constant run of the same cell."""
    baselines = {}
    for rec in records:
        if rec.cell["controller_type"] == "constant" and rec.report is not None:
            c = rec.cell
            baselines[(c["network"], c["disturbance"], c["seed"])] = rec
    for rec in records:
        c = rec.cell
        if c["controller_type"] != "adaptive" or rec.report is None:
            continue
        base = baselines.get((c["network"], c["disturbance"], c["seed"]))
        if base is None:
            continue
        cmp = metrics.compare(_report_from(base), _report_from(rec))
        rec.report["reduction_vs_baseline"] = {
            "baseline": base.key, "H": cmp.reduction_rate_H, "tau": cmp.reduction_rate_tau,
        }


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def run_matrix(cfg: ExperimentConfig, write: bool = True) -> MatrixResult:
    """Run every cell; results are identical for any thread count."""
    config_hash = cfg.fingerprint()
    out_dir = Path(cfg.output_dir) if write else None
    if out_dir is not None:
        for sub in ("networks", "spectra", "runs", "trajectories", "tables"):
            (out_dir / sub).mkdir(parents=True, exist_ok=True)

    prepared: dict[tuple[str, int], Prepared | Exception] = {}
    for net_entry in cfg.networks:
        for seed in cfg.seeds:
            try:
                prep = prepare_network(net_entry, seed, cfg.sim.K)
            except Exception as exc:
                prepared[(net_entry.label, seed)] = exc
                continue
            prepared[(net_entry.label, seed)] = prep
            if out_dir is not None:
                stem = f"{net_entry.label}__s{seed}"
                (out_dir / "networks" / f"{stem}.json").write_text(
                    json.dumps(prep.net.to_dict(), sort_keys=True) + "\n")
                (out_dir / "spectra" / f"{stem}.csv").write_text(spectrum_csv(prep.spectrum))

    jobs = []
    for net_entry in cfg.networks:
        for dist in cfg.disturbances:
            for ctrl in cfg.controllers:
                for seed in cfg.seeds:
                    jobs.append((net_entry, dist, ctrl, seed))

    def work(job):
        net_entry, dist, ctrl, seed = job
        prep = prepared[(net_entry.label, seed)]
        if isinstance(prep, Exception):
            cell = {"network": net_entry.label, "disturbance": dist.label, "seed": seed,
                    "controller": ctrl.name, "controller_type": ctrl.type}
            return RunRecord(config_hash, cell, None, {}, f"{type(prep).__name__}: {prep}")
        return run_cell(cfg, net_entry, dist, ctrl, seed, prep, config_hash, out_dir)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(work, jobs))
    else:
        records = [work(j) for j in jobs]
    records.sort(key=lambda r: r.key)
    attach_comparisons(records)

    if out_dir is not None:
        for rec in records:
            (out_dir / "runs" / f"{rec.key}.json").write_text(_dump(rec.to_dict()))
        from .tables import write_tables
        write_tables(records, out_dir / "tables", config_hash)
    return MatrixResult(records, config_hash)


def load_records(run_dir: Path) -> list[RunRecord]:
    files = sorted((Path(run_dir) / "runs").glob("*.json"))
    records = [RunRecord.from_dict(json.loads(f.read_text())) for f in files]
    records.sort(key=lambda r: r.key)
    return records
