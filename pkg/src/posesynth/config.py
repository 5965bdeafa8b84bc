"""Run and training configuration with file/env/flag layering.

Precedence: explicit flag overrides > POSESYNTH_* environment variables >
config file values > built-in defaults.  Unknown keys are rejected so typos
fail loudly instead of silently using a default.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field, fields


@dataclass
class TrainConfig:
    batch_size: int = 32
    epochs: int = 10
    learning_rate: float = 1e-4
    views: int = 4
    lambda_3d: float = 0.1
    samples_per_epoch: int = 2000
    seed: int = 0
    width: int = 1024
    activation_slope: float = 0.01
    sigma_azimuth0: float = math.pi
    sigma_tilt0: float = 0.05
    azimuth_increment: float = 0.0
    tilt_increment: float = 0.05
    alpha_base: float = 1e-5

    def validate(self) -> "TrainConfig":
        for name in ("batch_size", "epochs", "learning_rate", "lambda_3d",
                     "samples_per_epoch", "width", "activation_slope"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.views < 2:
            raise ValueError("views must be >= 2 for the cross-view loss to bite")
        if self.samples_per_epoch < self.batch_size:
            raise ValueError("samples_per_epoch smaller than one batch")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        return self


@dataclass
class RunConfig:
    layout: str = "h36m17"
    seeds: str | None = None
    output_dir: str = "runs/out"
    dataset_2d: str | None = None
    dataset_3d: str | None = None
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self) -> "RunConfig":
        self.train.validate()
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d


def _coerce(value, target_type):
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def _apply(cfg, values: dict, source: str):
    train_fields = {f.name: f for f in fields(TrainConfig)}
    run_fields = {f.name: f for f in fields(RunConfig)}
    for key, value in values.items():
        if key == "train":
            if not isinstance(value, dict):
                raise ValueError("'train' must be a mapping")
            for tkey, tval in value.items():
                if tkey not in train_fields:
                    raise ValueError(f"unknown train key {tkey!r} ({source})")
                ftype = {"batch_size": int, "epochs": int, "views": int,
                         "samples_per_epoch": int, "seed": int,
                         "width": int}.get(tkey, float)
                setattr(cfg.train, tkey, _coerce(tval, ftype))
        elif key in train_fields:
            # flat train keys are accepted for flag/env convenience
            _apply(cfg, {"train": {key: value}}, source)
        elif key in run_fields:
            setattr(cfg, key, value if value is None else str(value))
        else:
            raise ValueError(f"unknown config key {key!r} ({source})")


def _env_values(env) -> dict:
    out: dict = {}
    prefix = "POSESYNTH_"
    run_keys = {f.name for f in fields(RunConfig)} - {"train"}
    train_keys = {f.name for f in fields(TrainConfig)}
    for name, value in env.items():
        if not name.startswith(prefix):
            continue
        key = name[len(prefix):].lower()
        if key.startswith("train_") and key[len("train_"):] in train_keys:
            out.setdefault("train", {})[key[len("train_"):]] = value
        elif key in run_keys:
            out[key] = value
        elif key in train_keys:
            out.setdefault("train", {})[key] = value
    return out


def load_run_config(path=None, overrides=None, env=None) -> RunConfig:
    """Assemble a validated RunConfig from file, environment and flag layers."""
    cfg = RunConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            _apply(cfg, json.load(fh), f"file {path}")
    _apply(cfg, _env_values(os.environ if env is None else env), "environment")
    if overrides:
        _apply(cfg, {k: v for k, v in overrides.items() if v is not None}, "flags")
    return cfg.validate()


def config_hash(cfg: RunConfig) -> str:
    import hashlib
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
