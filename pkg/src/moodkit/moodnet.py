"""Clip-level mood classifiers.

MoodNet (CLI name ``resmood``) is a 3D backbone with a single 3-class mood
head. MoodDeltaNet (``resmoodemo``) shares the backbone between the mood head
and a 2-class emotion-change head; the two cross-entropies are summed without
task weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .errors import ConfigurationError
from .networks import BACKBONE_FAMILIES, ProjectionHead, build_backbone
from .training import TrainConfig, predict_logits, seed_everything, train_loop

#: Mood value <-> head index. Index order is fixed so checkpoints interoperate.
MOOD_CLASS_ORDER = (-1, 0, 1)
MOOD_TO_INDEX = {m: i for i, m in enumerate(MOOD_CLASS_ORDER)}
INDEX_TO_MOOD = {i: m for i, m in enumerate(MOOD_CLASS_ORDER)}


@dataclass(frozen=True)
class ModelSpec:
    model: str = "resmood"  # resmood (mood head) | resmoodemo (mood + delta heads)
    backbone: str = "toy3d"
    feature_dim: int | None = None  # None: family default (toy3d 128, resnet3d 1024)
    mood_head: tuple[int, ...] = (512, 256, 3)
    delta_head: tuple[int, ...] = (512, 256, 2)
    dropout: float = 0.5
    input_size: int = 112

    def __post_init__(self):
        if self.model not in ("resmood", "resmoodemo"):
            raise ConfigurationError(f"model must be resmood|resmoodemo, got {self.model!r}")
        if self.backbone not in BACKBONE_FAMILIES:
            raise ConfigurationError(f"unknown backbone {self.backbone!r}; known: {BACKBONE_FAMILIES}")
        if self.mood_head[-1] != 3 or self.delta_head[-1] != 2:
            raise ConfigurationError("mood head must end in 3 classes and delta head in 2")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        d = dict(d)
        d["mood_head"] = tuple(d["mood_head"])
        d["delta_head"] = tuple(d["delta_head"])
        return cls(**d)


class MoodNet(torch.nn.Module):
    """Backbone + mood head: clip tensor (N, 3, frames, H, W) -> 3 logits."""

    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        self.backbone = build_backbone(spec.backbone, spec.feature_dim)
        self.mood_head = ProjectionHead(self.backbone.feature_dim, spec.mood_head, spec.dropout)

    def forward(self, clip: torch.Tensor) -> torch.Tensor:
        if clip.dim() != 5 or clip.shape[1] != 3:
            raise ValueError(f"expected clip tensor (N, 3, frames, H, W), got {tuple(clip.shape)}")
        return self.mood_head(self.backbone(clip))


class MoodDeltaNet(torch.nn.Module):
    """Shared backbone feeding both the mood head and the emotion-change head."""

    def __init__(self, spec: ModelSpec):
        super().__init__()
        self.spec = spec
        self.backbone = build_backbone(spec.backbone, spec.feature_dim)
        self.mood_head = ProjectionHead(self.backbone.feature_dim, spec.mood_head, spec.dropout)
        self.delta_head = ProjectionHead(self.backbone.feature_dim, spec.delta_head, spec.dropout)

    def forward(self, clip: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if clip.dim() != 5 or clip.shape[1] != 3:
            raise ValueError(f"expected clip tensor (N, 3, frames, H, W), got {tuple(clip.shape)}")
        shared = self.backbone(clip)
        return self.mood_head(shared), self.delta_head(shared)

    def mood_logits(self, clip: torch.Tensor) -> torch.Tensor:
        return self(clip)[0]


def build_model(spec: ModelSpec) -> torch.nn.Module:
    return MoodDeltaNet(spec) if spec.model == "resmoodemo" else MoodNet(spec)


def joint_loss(mood_logits: torch.Tensor, mood_targets: torch.Tensor,
               delta_logits: torch.Tensor | None = None,
               delta_targets: torch.Tensor | None = None) -> torch.Tensor:
    """Cross-entropy on the mood head plus, when the delta pair is supplied,
    cross-entropy on the change head; the unweighted sum. Providing only one
    of (delta_logits, delta_targets) is an error."""
    if (delta_logits is None) != (delta_targets is None):
        raise ValueError("joint_loss needs both delta_logits and delta_targets, or neither")
    loss = F.cross_entropy(mood_logits, mood_targets)
    if delta_logits is not None:
        loss = loss + F.cross_entropy(delta_logits, delta_targets)
    return loss


def _mood_batch_loss(model, batch):
    x, y = batch
    return joint_loss(model(x), y)


def _dual_batch_loss(model, batch):
    x, y, delta = batch
    mood_logits, delta_logits = model(x)
    return joint_loss(mood_logits, y, delta_logits, delta)


def weighted_f1_of_model(model, x: torch.Tensor, y: torch.Tensor, batch_size: int = 256) -> float:
    from .evaluation import weighted_f1  # local import; evaluation is metric-only
    forward = model.mood_logits if isinstance(model, MoodDeltaNet) else None
    logits = predict_logits(model, x, batch_size, forward=forward)
    preds = logits.argmax(dim=1).tolist()
    return weighted_f1(preds, y.tolist())


def train_mood_model(clips: torch.Tensor, moods: torch.Tensor,
                     spec: ModelSpec, config: TrainConfig,
                     deltas: torch.Tensor | None = None,
                     val: tuple[torch.Tensor, torch.Tensor] | None = None) -> tuple[torch.nn.Module, dict]:
    """Train a clip classifier on tensors (clips: (N, 3, n, H, W), moods:
    class indices). resmoodemo additionally requires per-clip delta targets.
    Returns (model, metrics) with training weighted F1, plus best/final
    validation weighted F1 when a held-out set is given."""
    if spec.model == "resmoodemo":
        if deltas is None:
            raise ConfigurationError("resmoodemo requires delta labels for every clip")
        tensors = [clips, moods, deltas]
        batch_loss = _dual_batch_loss
    else:
        tensors = [clips, moods]
        batch_loss = _mood_batch_loss
    seed_everything(config.seed)
    model = build_model(spec)

    def on_epoch(m, epoch):
        if val is None:
            return {}
        return {"val_f1": weighted_f1_of_model(m, val[0], val[1])}

    history = train_loop(model, tensors, config, batch_loss, on_epoch)
    metrics = {
        "history": history,
        "train_f1": weighted_f1_of_model(model, clips, moods),
        "val_f1_best": max((h["val_f1"] for h in history if "val_f1" in h), default=None),
        "val_f1_final": history[-1].get("val_f1"),
    }
    return model, metrics
