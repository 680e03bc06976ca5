"""Experiment configuration: YAML files, defaults per experiment, and
command-line overrides (flags beat file values, file values beat defaults)."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import yaml

DEFAULT_SEED = 20240611
BACKENDS = ("exact", "float")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    backend: str = "exact"
    out: str | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        self.seed = seed

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "backend": self.backend,
            "out": self.out,
            "params": copy.deepcopy(self.params),
        }

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"experiment", "seed", "backend", "out", "params"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        params = d.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError("params must be a mapping")
        return cls(
            experiment=d.get("experiment"),
            params=dict(params),
            seed=d.get("seed", DEFAULT_SEED),
            backend=d.get("backend", "exact"),
            out=d.get("out"),
        )

    @classmethod
    def from_yaml(cls, text):
        return cls.from_dict(parse_yaml(text))


def parse_yaml(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    return data


def load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_yaml(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_param(item):
    """``key=value`` with a YAML value; dotted keys address nested params."""
    if "=" not in item:
        raise ConfigError(f"--param expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    value = parse_value(raw)
    out = {}
    cur = out
    parts = key.split(".")
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
    cur[parts[-1]] = value
    return out


def parse_value(raw):
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError:
        return raw


def resolve(experiment, defaults, file_data=None, seed=None, backend=None, out=None, params=()):
    """Build the effective config: defaults, then the file, then flags."""
    file_data = dict(file_data or {})
    if file_data.get("experiment") not in (None, experiment):
        raise ConfigError(f"config file is for {file_data['experiment']!r}, not {experiment!r}")
    unknown = set(file_data) - {"experiment", "seed", "backend", "out", "params"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = _merge(defaults, file_data.get("params") or {})
    for item in params:
        merged = _merge(merged, parse_param(item))
    unknown_params = set(merged) - set(defaults)
    if unknown_params:
        raise ConfigError(f"unknown parameters for {experiment}: {sorted(unknown_params)}")
    return ExperimentConfig(
        experiment=experiment,
        params=merged,
        seed=seed if seed is not None else file_data.get("seed", DEFAULT_SEED),
        backend=backend or file_data.get("backend", "exact"),
        out=out or file_data.get("out"),
    )
