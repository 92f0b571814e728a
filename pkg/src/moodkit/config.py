"""Layered pipeline configuration and the stage hash chain.

One YAML file overrides the coded defaults; ``--set key.path=value`` entries
override the file. Every stage's outputs embed a config hash computed from
the resolved sections that stage depends on plus the hashes of its upstream
artifacts, so any config drift or manual edit upstream is detected before a
downstream stage runs.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import yaml

from .errors import ConfigurationError

DEFAULTS: dict = {
    "seed": 7,
    "workdir": "runs/default",
    "corpus": {
        "preset": "default",      # default | trend
        "videos": 20,
        "frames": 133,
        "image_size": 48,
        "noise": 0.06,
        "pairs": 600,
    },
    "sampler": {"temporal_length": 100, "stride": 3, "frames_per_clip": 5},
    "siamese": {
        "embed_dim": 256,
        "head": [256, 128, 2],
        "dropout": 0.3,
        "margin": 0.25,
        "loss_weight": 0.5,
        "cosine_mode": "similarity",
        "encoder": "conv4",
        "epochs": 40,
        "batch_size": 64,
        "lr": 1.0e-4,
        "val_fraction": 0.2,
    },
    "mood": {
        "backbone": "toy3d",
        "feature_dim": None,
        "input_size": 112,
        "dropout": 0.5,
        "epochs": 30,
        "batch_size": 128,
        "lr": 1.0e-4,
        "val_fraction": 0.2,
    },
    "distill": {
        "temperature": 3.0,
        "alpha": 0.05,
    },
    "ablation": {
        "models": ["resmood", "resmoodemo", "tsnet"],
        "n": [3, 5, 7, 9],
        "t": [50, 100, 150, 200],
        "backbone": ["resnet3d-18", "resnet3d-34", "resnet3d-50"],
        "temperatures": [3, 5, 7],
        "alphas": [0.05, 0.1, 0.15, 0.2],
    },
}

#: Desk-scale overrides: trains at the synthetic corpus' native resolution
#: with batches sized for a CPU, and a base learning rate suited to encoders
#: trained from scratch (the coded defaults assume a pretrained encoder).
DESK_PROFILE: dict = {
    "siamese": {"lr": 1.0e-3},
    "mood": {"input_size": 48, "batch_size": 32},
    "ablation": {"backbone": ["toy3d", "resnet3d-18"]},
}


def _deep_update(base: dict, override: dict) -> dict:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def _apply_set(config: dict, entry: str) -> None:
    if "=" not in entry:
        raise ConfigurationError(f"--set expects key.path=value, got {entry!r}")
    dotted, raw = entry.split("=", 1)
    keys = dotted.strip().split(".")
    target = config
    for key in keys[:-1]:
        if not isinstance(target.get(key), dict):
            raise ConfigurationError(f"--set {entry!r}: {key!r} is not a config section")
        target = target[key]
    if keys[-1] not in target:
        raise ConfigurationError(f"--set {entry!r}: unknown key {keys[-1]!r}")
    target[keys[-1]] = yaml.safe_load(raw)


def resolve_config(config_file: str | Path | None = None,
                   overrides: list[str] | None = None,
                   profile: str | None = None) -> dict:
    """defaults <- profile <- file <- --set entries, left to right."""
    config = copy.deepcopy(DEFAULTS)
    if profile == "desk":
        _deep_update(config, copy.deepcopy(DESK_PROFILE))
    elif profile is not None:
        raise ConfigurationError(f"unknown profile {profile!r}; known: desk")
    if config_file is not None:
        with open(config_file, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"{config_file}: top level must be a mapping")
        unknown = set(loaded) - set(config)
        if unknown:
            raise ConfigurationError(f"{config_file}: unknown sections {sorted(unknown)}")
        _deep_update(config, loaded)
    for entry in overrides or []:
        _apply_set(config, entry)
    return config


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def derive_seed(master_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


#: Config sections each stage's outputs depend on; the stage hash also folds
#: in the hashes of the stage's upstream artifacts.
STAGE_SECTIONS = {
    "synth": ("seed", "corpus"),
    "derive-labels": (),
    "make-clips": ("sampler",),
    "train-siamese": ("seed", "siamese"),
    "pseudo-label": (),
    "train-mood": ("seed", "mood"),
    "train-ts": ("seed", "mood", "distill"),
    "evaluate": (),
    "ablate": ("seed", "sampler", "mood", "distill", "ablation"),
}


def stage_hash(stage: str, config: dict, upstream: dict[str, str] | None = None,
               extra: dict | None = None) -> str:
    if stage not in STAGE_SECTIONS:
        raise ConfigurationError(f"unknown stage {stage!r}")
    payload = {
        "stage": stage,
        "config": {section: config[section] for section in STAGE_SECTIONS[stage]},
        "upstream": dict(sorted((upstream or {}).items())),
        "extra": extra or {},
    }
    return config_hash(payload)
