"""Command line entry point (``adaptive-inertia`` / ``python -m adaptive_inertia``)."""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from .. import controller as ctl
from ..netgen import NetworkError, generate
from ..spectral import disturbance_projection, eigenvectors_csv, spectrum_csv
from .config import (ConfigError, ControllerEntry, DisturbanceEntry, ExperimentConfig,
                     NetworkEntry, load_config, parse_config, with_overrides)
from .runner import load_records, prepare_network, resolve_controller, run_cell, run_matrix
from .tables import write_tables

NETWORK_ALIASES = {
    "ring": "RG", "rg": "RG", "er": "ER", "erdos-renyi": "ER", "random": "ER",
    "sw": "SW", "small-world": "SW", "sf": "SF", "scale-free": "SF",
    "sp": "SP", "star": "SP", "spider-web": "SP",
}


class Failure(click.ClickException):
    """Validation or runtime failure; exit status 1."""

    exit_code = 1


def _common(f):
    """Flags shared by every subcommand."""
    opts = [
        click.option("--config", "config_path", type=str, default=None,
                     help="Experiment TOML file or built-in name (paper, smoke)."),
        click.option("--seed", type=int, default=None, help="Override the seed list."),
        click.option("--out", type=click.Path(path_type=Path), default=None,
                     help="Output directory (or file for single artifacts)."),
        click.option("--threads", type=click.IntRange(min=1), default=None),
        click.option("--dt", type=float, default=None, help="Integration step [s]."),
        click.option("--t-end", "t_end", type=float, default=None, help="Run length [s]."),
    ]
    for opt in reversed(opts):
        f = opt(f)

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ConfigError as exc:
            raise Failure(f"invalid configuration: {exc}") from None
        except (ValueError, KeyError, ArithmeticError, OSError) as exc:
            raise Failure(f"{type(exc).__name__}: {exc}") from None
    return wrapper


def _network_option(f):
    f = click.option("--network", "network", default="star", show_default=True,
                     help="ring, er, sw, sf, star (or RG/ER/SW/SF/SP).")(f)
    return click.option("--n", "n", type=int, default=100, show_default=True)(f)


def _kind(name: str) -> str:
    kind = NETWORK_ALIASES.get(name.lower(), name.upper())
    if kind not in ("RG", "ER", "SW", "SF", "SP"):
        raise ConfigError("network", f"unknown network {name!r}")
    return kind


def _base_config(config_path, seed, threads, dt, t_end, out=None, **extra) -> ExperimentConfig:
    if config_path is not None:
        cfg = load_config(config_path)
        if extra:
            data = cfg.model_dump()
            data.update(extra)
            cfg = parse_config(data)
    else:
        cfg = parse_config(extra)
    return with_overrides(cfg, seed=seed, threads=threads, dt=dt, t_end=t_end,
                          out=None if out is None else str(out))


def _single(cfg: ExperimentConfig, network: str, n: int) -> tuple[NetworkEntry, int]:
    """Network entry for single-run commands: --network wins over the config's first entry."""
    kind = _kind(network)
    matches = [e for e in cfg.networks if e.kind == kind]
    entry = matches[0].model_copy(update={"n": n}) if matches else NetworkEntry(kind=kind, n=n)
    return entry, cfg.seeds[0]


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


_DEFAULTS = dict(
    networks=[{"kind": "SP"}], disturbances=[{"kind": "impulse"}],
    controllers=[{"name": "constant", "type": "constant"}],
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose: bool) -> None:
    """Adaptive inertia control experiments on oscillator networks."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command("generate")
@_network_option
@_common
def generate_cmd(network, n, config_path, seed, out, threads, dt, t_end):
    """Write a generated network as JSON."""
    cfg = _base_config(config_path, seed, threads, dt, t_end, **({} if config_path else _DEFAULTS))
    entry, s = _single(cfg, network, n)
    try:
        net = generate(entry.kind, entry.n, seed=s, **entry.generator_params())
    except NetworkError as exc:
        raise Failure(str(exc)) from None
    _emit(net.to_json() + "\n", out)


@cli.command("spectrum")
@_network_option
@click.option("--eigenvectors", is_flag=True, help="Also write the n x n eigenvector matrix.")
@_common
def spectrum_cmd(network, n, eigenvectors, config_path, seed, out, threads, dt, t_end):
    """Write Laplacian eigenvalues as CSV (k, lambda_k)."""
    cfg = _base_config(config_path, seed, threads, dt, t_end, **({} if config_path else _DEFAULTS))
    entry, s = _single(cfg, network, n)
    prep = prepare_network(entry, s, cfg.sim.K)
    _emit(spectrum_csv(prep.spectrum), out)
    if eigenvectors:
        target = None if out is None else out.with_name(out.stem + "_eigenvectors.csv")
        _emit(eigenvectors_csv(prep.spectrum), target)


@cli.command("simulate")
@_network_option
@click.option("--disturbance", default="impulse", show_default=True,
              type=click.Choice(["impulse", "monotonic_decay", "oscillatory_decay"]))
@click.option("--controller", default="constant", show_default=True,
              type=click.Choice(["constant", "paper", "tuned"]),
              help="Constant baseline, reported preset, or analytically tuned gain.")
@click.option("--amplitude", type=float, default=1.0, show_default=True)
@click.option("--horizon", type=float, default=None, help="Metric horizon T [s].")
@_common
def simulate_cmd(network, n, disturbance, controller, amplitude, horizon, config_path, seed,
                 out, threads, dt, t_end):
    """Run one simulation; prints the report JSON and writes the trajectory with --out."""
    cfg = _base_config(config_path, seed, threads, dt, t_end, **({} if config_path else _DEFAULTS))
    if horizon is not None:
        cfg = parse_config({**cfg.model_dump(), "horizon_T": horizon})
    entry, s = _single(cfg, network, n)
    dist = DisturbanceEntry(kind=disturbance, amplitude=amplitude)
    ctrl = (ControllerEntry(name="constant", type="constant") if controller == "constant"
            else ControllerEntry(name=controller, type="adaptive", preset=controller))
    one = parse_config({**cfg.model_dump(), "networks": [entry.model_dump()],
                        "disturbances": [dist.model_dump()],
                        "controllers": [ctrl.model_dump()]})
    prep = prepare_network(entry, s, one.sim.K)
    if out is not None:
        (out / "trajectories").mkdir(parents=True, exist_ok=True)
    rec = run_cell(one, entry, dist, ctrl, s, prep, one.fingerprint(), out)
    if rec.error is not None:
        raise Failure(rec.error)
    text = json.dumps(rec.to_dict(), sort_keys=True, indent=2) + "\n"
    if out is not None:
        (out / "report.json").write_text(text)
    click.echo(text, nl=False)


@cli.command("tune")
@_network_option
@click.option("--disturbance", default="impulse", show_default=True,
              type=click.Choice(["impulse", "monotonic_decay", "oscillatory_decay"]))
@click.option("--mode-count", type=int, default=1, show_default=True)
@click.option("--safety", type=float, default=0.75, show_default=True)
@click.option("--amplitude", type=float, default=1.0, show_default=True)
@_common
def tune_cmd(network, n, disturbance, mode_count, safety, amplitude, config_path, seed, out,
             threads, dt, t_end):
    """Print M0, the two gain bounds and the tuned gain for a network."""
    cfg = _base_config(config_path, seed, threads, dt, t_end, **({} if config_path else _DEFAULTS))
    entry, s = _single(cfg, network, n)
    prep = prepare_network(entry, s, cfg.sim.K)
    dist = DisturbanceEntry(kind=disturbance, amplitude=amplitude)
    ctrl = ControllerEntry(name="tuned", type="adaptive", preset="tuned",
                           mode_count=mode_count, safety_factor=safety)
    _, desc = resolve_controller(cfg, ctrl, entry, dist, prep)
    result = {"network": entry.kind, "n": entry.n, "seed": s, "D": cfg.sim.D,
              "lambda_max": prep.spectrum.lambda_max, "M0": desc["resolved"]["M0"],
              "stability_bound": desc["stability_bound"], "rate_bound": desc["rate_bound"],
              "safety_factor": safety, "gain": desc["gain"],
              "mode_set": desc["resolved"]["mode_set"]}
    _emit(json.dumps(result, indent=2) + "\n", out)


@cli.command("matrix")
@_common
def matrix_cmd(config_path, seed, out, threads, dt, t_end):
    """Run every configured cell and write networks, spectra, runs, trajectories, tables."""
    cfg = _base_config(config_path or "paper", seed, threads, dt, t_end, out)
    result = run_matrix(cfg)
    ok = len(result.records) - len(result.failures)
    click.echo(f"{ok}/{len(result.records)} runs ok; config {result.config_hash[:12]}; "
               f"output in {cfg.output_dir}")
    if result.failures:
        for rec in result.failures:
            click.echo(f"FAILED {rec.key}: {rec.error}", err=True)
        raise Failure(f"{len(result.failures)} cell(s) failed")


@cli.command("report")
@_common
def report_cmd(config_path, seed, out, threads, dt, t_end):
    """Re-render tables from the run records stored under --out."""
    if out is None:
        if config_path is None:
            raise click.UsageError("report needs --out DIR or --config")
        out = Path(load_config(config_path).output_dir)
    records = load_records(out)
    if not records:
        raise Failure(f"no run records under {out / 'runs'}")
    hashes = sorted({r.config_hash for r in records})
    if len(hashes) != 1:
        raise Failure(f"run records come from {len(hashes)} different configs")
    paths = write_tables(records, out / "tables", hashes[0])
    for p in paths.values():
        click.echo(str(p))


def main(argv=None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args, prog_name="adaptive-inertia", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    return 0
