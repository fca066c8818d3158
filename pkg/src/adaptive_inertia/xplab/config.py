"""Experiment configuration: TOML file -> validated :class:`ExperimentConfig`."""

from __future__ import annotations

import hashlib
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..controller import ControllerPreset
from ..dynamics import DisturbanceSpec, SimParams

PROBE_TIMES = (0.1, 1.0, 3.0, 5.0, 10.0)
BUILTIN = {"paper": "paper.toml", "smoke": "smoke.toml"}


class ConfigError(ValueError):
    """Invalid configuration; ``key_path`` names the offending entry."""

    def __init__(self, key_path: str, message: str):
        super().__init__(f"{key_path}: {message}" if key_path else message)
        self.key_path = key_path


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NetworkEntry(_Strict):
    kind: Literal["RG", "ER", "SW", "SF", "SP"]
    name: Optional[str] = None
    n: int = Field(100, ge=2)
    d: int = 4
    p: float = 0.1
    p_rewire: float = 0.05
    m: int = 2

    @property
    def label(self) -> str:
        return self.name or self.kind

    def generator_params(self) -> dict:
        return {"RG": {"d": self.d}, "ER": {"p": self.p},
                "SW": {"d": self.d, "p_rewire": self.p_rewire},
                "SF": {"m": self.m}, "SP": {}}[self.kind]


class DisturbanceEntry(_Strict):
    kind: Literal["impulse", "monotonic_decay", "oscillatory_decay"]
    name: Optional[str] = None
    amplitude: float = 1.0
    direction: Literal["principal", "uniform", "node", "explicit"] = "principal"
    node: Optional[int] = None
    vector: Optional[list[float]] = None
    kick: Literal["velocity", "momentum"] = "velocity"

    @property
    def label(self) -> str:
        return self.name or self.kind

    def spec(self) -> DisturbanceSpec:
        return DisturbanceSpec(self.kind, self.amplitude, self.direction, self.node,
                               None if self.vector is None else tuple(self.vector), self.kick)


class ControllerEntry(_Strict):
    """``constant`` baseline or ``adaptive`` arm.

    An adaptive arm takes ``preset = "paper"`` (reported per-topology
    structures), ``preset = "tuned"`` (gain from the analytic bounds), a path
    to a preset TOML file, or inline preset keys.
    """

    name: str
    type: Literal["constant", "adaptive"]
    M: Optional[float] = Field(None, gt=0)
    preset: Optional[str] = None
    M0_mode: Optional[Literal["formula", "explicit"]] = None
    M0_value: Optional[float] = Field(None, gt=0)
    gain: Optional[float] = Field(None, ge=0)
    mode_count: Optional[int] = Field(None, ge=1)
    weights: Optional[list[float]] = None
    filter_cutoff_hz: Optional[float] = Field(None, gt=0)
    rate_limit_frac: Optional[float] = Field(None, gt=0)
    margin: Optional[float] = Field(None, gt=0, le=1)
    M_max_frac: Optional[float] = Field(None, ge=1)
    safety_factor: float = Field(0.75, gt=0, le=1)

    @model_validator(mode="after")
    def _check(self):
        if self.type == "adaptive" and self.preset is None and self.gain is None:
            raise ValueError("adaptive controller needs a preset or a gain")
        return self

    def overrides(self) -> dict:
        keys = ("M0_mode", "M0_value", "gain", "mode_count", "weights", "filter_cutoff_hz",
                "rate_limit_frac", "margin", "M_max_frac")
        out = {k: getattr(self, k) for k in keys if getattr(self, k) is not None}
        if "weights" in out:
            out["weights"] = tuple(out["weights"])
        return out


class SimEntry(_Strict):
    D: float = Field(0.8, gt=0)
    K: float = Field(1.0, gt=0)
    dt: float = Field(1e-3, gt=0)
    t_end: float = Field(10.0, gt=0)
    control_period: float = Field(0.01, gt=0)

    def params(self) -> SimParams:
        return SimParams(self.D, self.K, self.dt, self.t_end, self.control_period)


class ExperimentConfig(_Strict):
    networks: list[NetworkEntry] = Field(min_length=1)
    disturbances: list[DisturbanceEntry] = Field(min_length=1)
    controllers: list[ControllerEntry] = Field(min_length=1)
    sim: SimEntry = SimEntry()
    horizon_T: float = Field(5.0, gt=0)
    seeds: list[int] = Field([1], min_length=1)
    output_dir: str = "out"
    threads: int = Field(1, ge=1)
    M0_mode: Literal["formula", "paper"] = "formula"
    stability_threshold: float = -0.25
    trajectory_modes: int = Field(5, ge=1)
    write_trajectories: bool = True

    @model_validator(mode="after")
    def _check(self):
        if self.horizon_T > self.sim.t_end:
            raise ValueError(f"horizon_T ({self.horizon_T}) exceeds sim.t_end ({self.sim.t_end})")
        for field, items in (("networks", self.networks), ("disturbances", self.disturbances),
                             ("controllers", self.controllers)):
            labels = [getattr(x, "label", None) or x.name for x in items]
            if len(set(labels)) != len(labels):
                raise ValueError(f"{field}: names must be unique, got {labels}")
        if sum(c.type == "constant" for c in self.controllers) > 1:
            raise ValueError("controllers: at most one constant baseline")
        return self

    def fingerprint(self) -> str:
        """sha256 over everything that affects results (not threads or output_dir)."""
        payload = self.model_dump(mode="json", exclude={"threads", "output_dir"})
        for ctrl in payload["controllers"]:
            preset = ctrl.get("preset")
            if preset and preset not in ("paper", "tuned"):
                try:
                    digest = hashlib.sha256(Path(preset).read_bytes()).hexdigest()
                except OSError:
                    digest = "missing"
                ctrl["preset"] = f"file:{digest}"
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _key_path(loc) -> str:
    parts = []
    for item in loc:
        if isinstance(item, int):
            parts.append(f"[{item}]")
        else:
            parts.append(("." if parts else "") + str(item))
    return "".join(parts)


def parse_config(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(_key_path(err["loc"]), err["msg"]) from None
    try:
        cfg.sim.params()
    except ValueError as exc:
        raise ConfigError("sim", str(exc)) from None
    if base_dir is not None:
        cfg = _absolutise_presets(cfg, base_dir)
    return cfg


def _absolutise_presets(cfg: ExperimentConfig, base_dir: Path) -> ExperimentConfig:
    ctrls = []
    for c in cfg.controllers:
        if c.preset and c.preset not in ("paper", "tuned") and not Path(c.preset).is_absolute():
            c = c.model_copy(update={"preset": str((base_dir / c.preset).resolve())})
        ctrls.append(c)
    return cfg.model_copy(update={"controllers": ctrls})


def _read_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"not valid TOML: {exc}") from None
    except OSError as exc:
        raise ConfigError(str(path), str(exc)) from None


def load_config(path_or_name: str | Path) -> ExperimentConfig:
    """Load a TOML experiment file, or a built-in by name (``paper``, ``smoke``)."""
    if str(path_or_name) in BUILTIN:
        ref = resources.files("adaptive_inertia.xplab").joinpath(BUILTIN[str(path_or_name)])
        return parse_config(tomllib.loads(ref.read_text()))
    path = Path(path_or_name)
    return parse_config(_read_toml(path), path.parent)


def load_preset_file(path: str | Path) -> ControllerPreset:
    data = _read_toml(Path(path))
    allowed = {"M0_mode", "M0_value", "gain", "mode_count", "weights", "filter_cutoff_hz",
               "rate_limit_frac", "margin", "M_max_frac"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown preset key")
    if "gain" not in data:
        raise ConfigError(f"{path}.gain", "field required")
    try:
        return ControllerPreset(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(path), str(exc)) from None


def with_overrides(cfg: ExperimentConfig, *, seed: int | None = None, out: str | None = None,
                   threads: int | None = None, dt: float | None = None,
                   t_end: float | None = None) -> ExperimentConfig:
    data = cfg.model_dump()
    if seed is not None:
        data["seeds"] = [seed]
    if out is not None:
        data["output_dir"] = out
    if threads is not None:
        data["threads"] = threads
    if dt is not None:
        data["sim"]["dt"] = dt
    if t_end is not None:
        data["sim"]["t_end"] = t_end
    return parse_config(data)

