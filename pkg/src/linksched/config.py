"""Experiment configuration: a TOML document with one table per section.

Unknown sections or keys are rejected so that typos fail loudly.  Every
default reproduces the experimental setup of the study (K-user networks in
a 250 m square, 10 dBm / 10 MHz / -174 dBm/Hz, three 64-wide layers,
lr 1e-2, B=32, 500 epochs, 100 contrastive epochs at temperature 0.1,
three seeds).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .channel import GeometryParams, PathLossParams, SystemParams

__all__ = ["ConfigError", "ModelParams", "TrainParams", "ExperimentParams", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    dims: tuple = (1, 64, 64, 64)
    leaky_slope: float = 1e-2


@dataclass(frozen=True)
class TrainParams:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 500
    ssl_epochs: int = 100
    tau: float = 0.1
    perturb_low: float = 0.9
    perturb_high: float = 1.1
    prune: bool = True
    prune_quantile: float = 0.25

    def __post_init__(self):
        if self.epochs < 0 or self.ssl_epochs < 0:
            raise ConfigError("epoch counts must be non-negative")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0 < self.perturb_low <= self.perturb_high:
            raise ConfigError("need 0 < perturb_low <= perturb_high")
        if not 0 <= self.prune_quantile <= 1:
            raise ConfigError("prune_quantile must lie in [0, 1]")


@dataclass(frozen=True)
class ExperimentParams:
    master_seed: int = 20211
    seeds: tuple = (0, 1, 2)
    k_values: tuple = (4, 6, 8, 10)
    n_train: int = 256
    n_test: int = 256
    sample_sizes: tuple = (32, 64, 128, 256)
    k_train_generalization: tuple = (4, 10)
    k_sample_complexity: tuple = (4, 10)
    convergence_threshold: float = 0.8
    k_max_exhaustive: int = 20
    bench_k_values: tuple = (4, 5, 6, 7, 8, 9, 10)
    bench_samples: int = 20
    out_dir: str = "runs"


SECTIONS = {
    "system": SystemParams,
    "geometry": GeometryParams,
    "pathloss": PathLossParams,
    "model": ModelParams,
    "training": TrainParams,
    "experiment": ExperimentParams,
}


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemParams = field(default_factory=SystemParams)
    geometry: GeometryParams = field(default_factory=GeometryParams)
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    model: ModelParams = field(default_factory=ModelParams)
    training: TrainParams = field(default_factory=TrainParams)
    experiment: ExperimentParams = field(default_factory=ExperimentParams)

    def to_dict(self) -> dict:
        out = {}
        for name in SECTIONS:
            sec = dataclasses.asdict(getattr(self, name))
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in sec.items()}
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for name, klass in SECTIONS.items():
            sec = doc.get(name, {})
            if not isinstance(sec, dict):
                raise ConfigError(f"section [{name}] must be a table")
            allowed = {f.name: f for f in dataclasses.fields(klass)}
            bad = set(sec) - set(allowed)
            if bad:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
            vals = {k: tuple(v) if isinstance(v, list) else v for k, v in sec.items()}
            try:
                kwargs[name] = klass(**vals)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid [{name}]: {exc}") from exc
        return cls(**kwargs)

    def replace(self, section: str, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    def digest(self) -> str:
        return _digest(self.to_dict())

    def data_digest(self) -> str:
        """Digest of everything that determines dataset contents."""
        d = self.to_dict()
        keep = {k: d[k] for k in ("system", "geometry", "pathloss")}
        keep["master_seed"] = d["experiment"]["master_seed"]
        return _digest(keep)

    def to_toml(self) -> str:
        lines = ["# link scheduling experiment configuration", ""]
        for name, sec in self.to_dict().items():
            lines.append(f"[{name}]")
            for k, v in sec.items():
                lines.append(f"{k} = {_toml_value(v)}")
            lines.append("")
        return "\n".join(lines)


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_dict(doc)
