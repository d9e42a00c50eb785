"""Experiment configuration: four blocks serialised as JSON.

Example::

    {
      "model":  {"spacing_p": 2.0, "spacing_q": 2.0, "p0": 0.5, "q0": 0.0, "mass": 1.0,
                 "w_width": 2.0, "v_width": 2.0, "coupling": 1.0},
      "system": {"n_modes": 4, "doubled": true, "beta": 1.0},
      "run":    {"n_times": 41, "t_max": null, "window_constant": 0.5, "seed": 0, ...},
      "output": {"formats": ["csv", "json"], "svg": false, "out_dir": "out"}
    }

Unknown keys are rejected.  ``sweep`` lists in the ``run`` block drive the
``sweep`` subcommand.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError

SCHEMA_VERSION = 1


@dataclass
class ModelBlock:
    spacing_p: float = 2.0
    spacing_q: float = 2.0
    p0: float = 0.5
    q0: float = 0.0
    mass: float = 1.0
    w_width: float = 2.0
    v_width: float = 2.0
    coupling: float = 1.0


@dataclass
class SystemBlock:
    n_modes: int = 4
    doubled: bool = True
    beta: float = 1.0


@dataclass
class RunBlock:
    n_times: int = 41
    t_max: float | None = None
    window_constant: float = 0.5
    seed: int = 0
    identity_tol: float = 1e-10
    krylov_tol: float = 1e-9
    krylov_max_dim: int = 40
    n_random: int = 5
    f_index: int = 0
    order: int = 2
    lambda_values: list = field(default_factory=lambda: [1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    eps_values: list = field(default_factory=lambda: [1e-7, 1e-6, 1e-5, 1e-4])
    sweep_n: list = field(default_factory=lambda: [4, 6])
    sweep_lambda: list = field(default_factory=lambda: [0.0, 1.0])


@dataclass
class OutputBlock:
    formats: list = field(default_factory=lambda: ["csv", "json"])
    svg: bool = False
    out_dir: str = "out"


_BLOCKS = {"model": ModelBlock, "system": SystemBlock, "run": RunBlock, "output": OutputBlock}


@dataclass
class ExperimentConfig:
    model: ModelBlock = field(default_factory=ModelBlock)
    system: SystemBlock = field(default_factory=SystemBlock)
    run: RunBlock = field(default_factory=RunBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def __post_init__(self):
        self.validate()

    # -- validation -------------------------------------------------------

    def validate(self):
        m, s, r, o = self.model, self.system, self.run, self.output
        for name in ("spacing_p", "spacing_q", "mass", "w_width", "v_width"):
            if not _positive(getattr(m, name)):
                raise ConfigError(f"model.{name} must be a positive number")
        if not isinstance(s.n_modes, int) or isinstance(s.n_modes, bool) or s.n_modes < 1:
            raise ConfigError("system.n_modes must be a positive integer")
        if not _number(s.beta) or s.beta < 0:
            raise ConfigError("system.beta must be non-negative")
        for name in ("identity_tol", "krylov_tol", "window_constant"):
            if not _positive(getattr(r, name)):
                raise ConfigError(f"run.{name} must be positive")
        if not isinstance(r.n_times, int) or r.n_times < 2:
            raise ConfigError("run.n_times must be an integer >= 2")
        if r.t_max is not None and not _positive(r.t_max):
            raise ConfigError("run.t_max must be positive or null")
        if not isinstance(r.seed, int):
            raise ConfigError("run.seed must be an integer")
        if not isinstance(r.krylov_max_dim, int) or r.krylov_max_dim < 2:
            raise ConfigError("run.krylov_max_dim must be an integer >= 2")
        if not 0 <= r.f_index < s.n_modes:
            raise ConfigError("run.f_index must select one of the system modes")
        if not isinstance(r.order, int) or r.order < 1:
            raise ConfigError("run.order must be a positive integer")
        for name in ("lambda_values", "eps_values"):
            vals = getattr(r, name)
            if len(vals) < 2 or not all(_positive(v) for v in vals):
                raise ConfigError(f"run.{name} needs at least two positive entries")
        if not r.sweep_n or not all(isinstance(n, int) and n >= 1 for n in r.sweep_n):
            raise ConfigError("run.sweep_n must list positive integers")
        if not r.sweep_lambda or not all(_number(x) for x in r.sweep_lambda):
            raise ConfigError("run.sweep_lambda must list numbers")
        bad = set(o.formats) - {"csv", "json"}
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")
        return self

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **dataclasses.asdict(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @property
    def hash(self) -> str:
        """SHA-256 of the canonical JSON, excluding the output directory."""
        d = self.to_dict()
        d["output"] = {k: v for k, v in d["output"].items() if k != "out_dir"}
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        data = dict(data)
        version = data.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        unknown = set(data) - set(_BLOCKS)
        if unknown:
            raise ConfigError(f"unknown configuration blocks {sorted(unknown)}")
        blocks = {}
        for name, klass in _BLOCKS.items():
            raw = data.get(name, {})
            if not isinstance(raw, dict):
                raise ConfigError(f"block {name!r} must be a mapping")
            known = {f.name for f in dataclasses.fields(klass)}
            extra = set(raw) - known
            if extra:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(extra)}")
            blocks[name] = klass(**raw)
        return cls(**blocks)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
        return cls.from_json(text)

    def replace(self, **blocks) -> ExperimentConfig:
        """Copy with block fields overridden, e.g. ``replace(system={"n_modes": 2})``."""
        d = self.to_dict()
        for name, changes in blocks.items():
            d[name] = {**d[name], **changes}
        return ExperimentConfig.from_dict(d)


def _number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and x == x and abs(x) != float("inf")


def _positive(x) -> bool:
    return _number(x) and x > 0
