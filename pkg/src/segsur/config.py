"""Declarative pipeline configuration (JSON, versioned schema)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .surrogates import DEFAULT_ROSTER, MODEL_KINDS

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    """Defaults reproduce the reference protocol: nested sizes 50/100/200,
    5 repetitions, a 1000-iteration cap and the full model roster."""

    schema_version: int = SCHEMA_VERSION
    sizes: tuple[int, ...] = (50, 100, 200)
    repetitions: int = 5
    global_seed: int = 20250
    iteration_cap: int = 1000
    models: tuple[str, ...] = DEFAULT_ROSTER
    output_dir: str = "."
    workers: int = 1
    ese_iterations: int = 300
    shap_rows: int = 0  # 0 = explain every dataset row
    shap_background: int = 250
    pdp_grid_size: int = 20

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.models = tuple(self.models)
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.schema_version}, "
                f"expected {SCHEMA_VERSION}"
            )
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.iteration_cap < 1:
            raise ConfigError("iteration_cap must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for m in self.models:
            if m not in MODEL_KINDS:
                raise ConfigError(f"unknown model kind {m!r} in roster")
        if self.shap_background < 1:
            raise ConfigError("shap_background must be >= 1")

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_json(self, path) -> None:
        data = asdict(self)
        data["sizes"] = list(self.sizes)
        data["models"] = list(self.models)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
