"""Experiment configuration: built-in defaults, strict JSON overrides, hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Tuple

from ..allocator.model import SolverConfig
from ..forecast import DEFAULT_LAYERS, TrainConfig
from ..workload import ScenarioConfig

OURS = "Ours"
METHOD_NAMES = (OURS, "Exact", "Heuristic", "DLD", "MEC", "GSA")
DEFAULT_METHODS = (OURS, "DLD", "MEC", "GSA")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    train: TrainConfig = TrainConfig()
    solver: SolverConfig = SolverConfig()
    layer_sizes: Tuple[int, ...] = DEFAULT_LAYERS
    methods: Tuple[str, ...] = DEFAULT_METHODS
    seeds: Tuple[int, ...] = tuple(range(30))
    deadline_min: float = 0.2
    deadline_max: float = 2.0
    output_dir: str = "results"

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("methods: must be non-empty")
        bad = [m for m in self.methods if m not in METHOD_NAMES]
        if bad:
            raise ConfigError(f"methods: unknown method(s) {bad}; choose from {list(METHOD_NAMES)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods: duplicates are not allowed")
        if not self.seeds:
            raise ConfigError("seeds: must be non-empty")
        if not self.deadline_min < self.deadline_max:
            raise ConfigError("deadline_min: must be < deadline_max")
        if self.layer_sizes[0] != 8 or self.layer_sizes[-1] != 3:
            raise ConfigError("layer_sizes: must start with 8 inputs and end with 3 outputs")


_SECTIONS = {"scenario": ScenarioConfig, "train": TrainConfig, "solver": SolverConfig}


def _to_plain(value):
    if dataclasses.is_dataclass(value):
        return {f.name: _to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    return value


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    return _to_plain(cfg)


def _merge_section(cls, defaults, overrides, path: str):
    if not isinstance(overrides, dict):
        raise ConfigError(f"{path}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    for key in overrides:
        if key not in names:
            raise ConfigError(f"{path}.{key}: unknown key" if path else f"{key}: unknown key")
    merged = {}
    for name, f in names.items():
        key_path = f"{path}.{name}" if path else name
        if name not in overrides:
            merged[name] = getattr(defaults, name)
            continue
        value = overrides[name]
        if name in _SECTIONS and cls is ExperimentConfig:
            merged[name] = _merge_section(_SECTIONS[name], getattr(defaults, name), value, key_path)
            continue
        default = getattr(defaults, name)
        merged[name] = _coerce(value, default, key_path)
    try:
        return cls(**merged)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or '<root>'}: {exc}") from exc


def _coerce(value, default, key_path):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key_path}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key_path}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key_path}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"{key_path}: expected a list, got {value!r}")
        if default:
            return tuple(_coerce(v, default[0], f"{key_path}[{i}]") for i, v in enumerate(value))
        return tuple(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key_path}: expected a string, got {value!r}")
        return value
    return value


def config_from_dict(doc: Dict[str, Any]) -> ExperimentConfig:
    return _merge_section(ExperimentConfig, ExperimentConfig(), doc, "")


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{p}: config file not found")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    return config_from_dict(doc)


def with_override(cfg: ExperimentConfig, dotted_key: str, value) -> ExperimentConfig:
    """Return ``cfg`` with one (possibly nested) key replaced, validated like a file override."""
    doc: Dict[str, Any] = {}
    node = doc
    parts = dotted_key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    base = config_to_dict(cfg)

    def deep_merge(a, b):
        for k, v in b.items():
            if isinstance(v, dict) and isinstance(a.get(k), dict):
                deep_merge(a[k], v)
            else:
                a[k] = v
        return a
    return config_from_dict(deep_merge(base, doc))


def canonical_json(cfg: ExperimentConfig) -> str:
    doc = config_to_dict(cfg)
    doc.pop("output_dir")  # where results land is not part of the experiment
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()
