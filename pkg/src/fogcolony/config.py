"""Scenario configuration: INI file with one section per parameter group.

Every key is optional except ``infrastructure.n_devices`` and
``workload.n_apps`` (both may be supplied by a scenario matrix instead).
Unknown sections or keys are rejected so typos do not pass silently.
"""
from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path

from .evolve import GAConfig
from .fitness import COST_MODEL, WALL_CLOCK


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` names the file, line and field."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None, key: str | None = None):
        self.path, self.line, self.key = path, line, key
        where = path or "<config>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {key + ': ' if key else ''}{message}")


@dataclass(frozen=True)
class InfraParams:
    n_devices: int | None = None
    attach_m: int = 2
    latency_min: float = 2.0
    latency_max: float = 6.0
    capacity_min: int = 1
    capacity_max: int = 4
    gateway_fraction: float = 0.25
    cloud_latency: float = 100.0


@dataclass(frozen=True)
class WorkloadParams:
    n_apps: int | None = None
    services_min: int = 2
    services_max: int = 5
    req_min: int = 1
    req_max: int = 2
    popularity_max: float = 0.75
    inter_request_min: float = 5.0
    inter_request_max: float = 10.0


@dataclass(frozen=True)
class GeneticParams:
    pop_size: int = 100
    generations: int = 100
    p_cross: float = 0.95
    p_mut: float = 0.3
    p_mut_join: float = 0.5
    p_mut_split: float = 0.5
    p_rep_agg: float = 0.5
    split_prob_init: float = 0.5


@dataclass(frozen=True)
class ExperimentParams:
    seed: int = 0
    fitness_mode: str = COST_MODEL
    fixed_size: int = 5
    output_dir: str = "results"
    workers: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    infrastructure: InfraParams = field(default_factory=InfraParams)
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    genetic: GeneticParams = field(default_factory=GeneticParams)
    experiment: ExperimentParams = field(default_factory=ExperimentParams)

    @property
    def label(self) -> str:
        return f"{self.infrastructure.n_devices}nodes{self.workload.n_apps}apps"

    def ga_config(self) -> GAConfig:
        g = self.genetic
        return GAConfig(
            pop_size=g.pop_size,
            gen_num=g.generations,
            p_cross=g.p_cross,
            p_mut=g.p_mut,
            p_mut_join=g.p_mut_join,
            p_mut_split=g.p_mut_split,
            p_rep_agg=g.p_rep_agg,
            split_prob_init=g.split_prob_init,
            workers=self.experiment.workers,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_ini(self) -> str:
        lines = []
        for name, sect in self.to_dict().items():
            lines.append(f"[{name}]")
            lines += [f"{k} = {v}" for k, v in sect.items() if v is not None]
            lines.append("")
        return "\n".join(lines)

    def replace(self, **sections) -> "ScenarioConfig":
        """Copy with per-section overrides, e.g. ``replace(genetic={"generations": 5})``."""
        parts = {}
        for name, overrides in sections.items():
            parts[name] = dataclasses.replace(getattr(self, name), **overrides)
        out = dataclasses.replace(self, **parts)
        validate(out)
        return out


_SECTIONS = {
    "infrastructure": InfraParams,
    "workload": WorkloadParams,
    "genetic": GeneticParams,
    "experiment": ExperimentParams,
}


def _locate(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` in the file, keyed by (section, key)."""
    out = {}
    sect = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            sect = m.group(1).strip()
            out[(sect, "")] = no
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and sect is not None:
            out[(sect, m.group(1).strip().lower())] = no
    return out


def _convert(kind, raw: str):
    kind = str(kind)
    if "int" in kind and "float" not in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def parse_config(text: str, path: str | None = None) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=path or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc), path, line) from None
    lines = _locate(text)
    parts = {}
    for sect in parser.sections():
        if sect not in _SECTIONS:
            raise ConfigError(f"unknown section [{sect}]", path, lines.get((sect, "")))
    for name, cls in _SECTIONS.items():
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        if parser.has_section(name):
            for key, raw in parser.items(name):
                line = lines.get((name, key))
                if key not in kinds:
                    raise ConfigError("unknown field", path, line, f"{name}.{key}")
                try:
                    values[key] = _convert(kinds[key], raw.strip())
                except ValueError:
                    raise ConfigError(f"cannot parse {raw.strip()!r} as {kinds[key]}", path, line, f"{name}.{key}") from None
        parts[name] = cls(**values)
    cfg = ScenarioConfig(**parts)
    validate(cfg, path, lines)
    return cfg


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    return parse_config(p.read_text(), str(p))


def validate(cfg: ScenarioConfig, path: str | None = None, lines: dict | None = None, require_size: bool = False) -> None:
    """Check every field; raises :class:`ConfigError` naming the first bad one."""
    lines = lines or {}

    def fail(sect, key, msg):
        raise ConfigError(msg, path, lines.get((sect, key)) or lines.get((sect, "")), f"{sect}.{key}")

    i, w, g, e = cfg.infrastructure, cfg.workload, cfg.genetic, cfg.experiment
    if require_size and i.n_devices is None:
        fail("infrastructure", "n_devices", "required field is missing")
    if require_size and w.n_apps is None:
        fail("workload", "n_apps", "required field is missing")
    if i.n_devices is not None and i.n_devices <= i.attach_m:
        fail("infrastructure", "n_devices", f"must exceed attach_m={i.attach_m}")
    if i.attach_m < 1:
        fail("infrastructure", "attach_m", "must be >= 1")
    if not 0 < i.latency_min <= i.latency_max:
        fail("infrastructure", "latency_max", "need 0 < latency_min <= latency_max")
    if not 0 < i.capacity_min <= i.capacity_max:
        fail("infrastructure", "capacity_max", "need 0 < capacity_min <= capacity_max")
    if not 0 < i.gateway_fraction <= 1:
        fail("infrastructure", "gateway_fraction", "must be in (0, 1]")
    if i.cloud_latency < 0:
        fail("infrastructure", "cloud_latency", "must be >= 0")
    if w.n_apps is not None and w.n_apps < 1:
        fail("workload", "n_apps", "must be >= 1")
    if not 1 <= w.services_min <= w.services_max:
        fail("workload", "services_max", "need 1 <= services_min <= services_max")
    if not 0 < w.req_min <= w.req_max:
        fail("workload", "req_max", "need 0 < req_min <= req_max")
    if not 0 <= w.popularity_max <= 1:
        fail("workload", "popularity_max", "must be in [0, 1]")
    if not 0 < w.inter_request_min <= w.inter_request_max:
        fail("workload", "inter_request_max", "need 0 < inter_request_min <= inter_request_max")
    if g.pop_size < 2 or g.pop_size % 2:
        fail("genetic", "pop_size", "must be even and >= 2")
    if g.generations < 0:
        fail("genetic", "generations", "must be >= 0")
    for key in ("p_cross", "p_mut", "p_mut_join", "p_mut_split", "p_rep_agg", "split_prob_init"):
        if not 0 <= getattr(g, key) <= 1:
            fail("genetic", key, "must be a probability in [0, 1]")
    if abs(g.p_mut_join + g.p_mut_split - 1) > 1e-9:
        fail("genetic", "p_mut_split", "p_mut_join + p_mut_split must equal 1")
    if e.fitness_mode not in (COST_MODEL, WALL_CLOCK):
        fail("experiment", "fitness_mode", f"must be {COST_MODEL!r} or {WALL_CLOCK!r}")
    if e.fixed_size < 1:
        fail("experiment", "fixed_size", "must be >= 1")
    if e.workers < 1:
        fail("experiment", "workers", "must be >= 1")
    if e.seed < 0:
        fail("experiment", "seed", "must be >= 0")
