"""Twin-encoder emotion-similarity network and its losses.

Two images pass through one shared encoder; the concatenated embeddings feed
a 2-way projection head (similar vs dissimilar) trained with cross-entropy,
while the cosine similarity of the raw embeddings feeds a contrastive term.
A trained model stamps pseudo emotion-change labels onto clip endpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import torch
import torch.nn.functional as F

from .errors import ConfigurationError, DegenerateDatasetError, MoodkitError
from .networks import ProjectionHead, build_encoder
from .training import TrainConfig, holdout_split, seed_everything, train_loop

#: Class-index convention shared with the delta heads downstream:
#: index 1 = similar (little emotion change), index 0 = dissimilar.
SIMILAR_CLASS = 1


@dataclass(frozen=True)
class SiameseSpec:
    embed_dim: int = 256
    head_widths: tuple[int, ...] = (256, 128, 2)
    dropout: float = 0.3
    margin: float = 0.25
    loss_weight: float = 0.5  # weight on the cross-entropy term
    cosine_mode: str = "similarity"  # or "distance" (see contrastive_loss)
    encoder: str = "conv4"

    def __post_init__(self):
        if self.head_widths[-1] != 2:
            raise ConfigurationError(f"head must end in 2 classes, got {self.head_widths}")
        if not 0.0 <= self.loss_weight <= 1.0:
            raise ConfigurationError(f"loss_weight must be in [0, 1], got {self.loss_weight}")
        if self.cosine_mode not in ("similarity", "distance"):
            raise ConfigurationError(f"cosine_mode must be similarity|distance, got {self.cosine_mode!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "SiameseSpec":
        d = dict(d)
        d["head_widths"] = tuple(d["head_widths"])
        return cls(**d)


class SiameseNet(torch.nn.Module):
    """Shared encoder E and head P over the concatenated pair embedding.
    Any module exposing ``embed_dim`` and mapping (N, C, H, W) to
    (N, embed_dim) can serve as the encoder."""

    def __init__(self, spec: SiameseSpec, encoder: torch.nn.Module | None = None):
        super().__init__()
        self.spec = spec
        self.encoder = encoder if encoder is not None else build_encoder(spec.encoder, spec.embed_dim)
        if getattr(self.encoder, "embed_dim", spec.embed_dim) != spec.embed_dim:
            raise ConfigurationError(
                f"encoder emits {self.encoder.embed_dim}, spec wants {spec.embed_dim}")
        self.head = ProjectionHead(2 * spec.embed_dim, spec.head_widths, spec.dropout)
        # Non-zero once train_siamese (or a checkpoint restore) has fit the model.
        self.register_buffer("fit_steps", torch.zeros((), dtype=torch.long))

    def forward(self, image_a: torch.Tensor, image_b: torch.Tensor):
        """Returns (logits, d): 2-class logits and the cosine similarity of
        the pre-concatenation embeddings."""
        if image_a.shape != image_b.shape:
            raise ValueError(f"pair shapes differ: {tuple(image_a.shape)} vs {tuple(image_b.shape)}")
        v1 = self.encoder(image_a)
        v2 = self.encoder(image_b)
        logits = self.head(torch.cat([v1, v2], dim=1))
        d = F.cosine_similarity(v1, v2, dim=1)
        return logits, d


def contrastive_loss(d: torch.Tensor, y: torch.Tensor, margin: float = 0.25,
                     mode: str = "similarity") -> torch.Tensor:
    """Mean over the batch of y*(1-d) + (1-y)*max(0, d-margin), with d the
    cosine similarity: similar pairs are pulled toward d=1, dissimilar pairs
    pushed below the margin.

    mode="distance" is the comparison variant where d is a cosine distance
    and the classic form y*d + (1-y)*max(0, margin-d) applies.
    """
    if d.numel() == 0:
        raise ValueError("contrastive_loss over an empty batch")
    y = y.to(d.dtype)
    if mode == "similarity":
        per_pair = y * (1.0 - d) + (1.0 - y) * torch.clamp(d - margin, min=0.0)
    elif mode == "distance":
        per_pair = y * d + (1.0 - y) * torch.clamp(margin - d, min=0.0)
    else:
        raise ConfigurationError(f"unknown contrastive mode {mode!r}")
    return per_pair.mean()


def total_siamese_loss(loss_bce, loss_contrastive, loss_weight: float):
    """Convex combination: loss_weight * cross-entropy + (1 - loss_weight) * contrastive."""
    if not 0.0 <= loss_weight <= 1.0:
        raise ConfigurationError(f"loss_weight must be in [0, 1], got {loss_weight}")
    return loss_weight * loss_bce + (1.0 - loss_weight) * loss_contrastive


def label_from_logits(logits: torch.Tensor) -> int:
    """Argmax over the 2 logits; index 1 means similar."""
    return int(torch.argmax(logits.reshape(-1)).item())


def _pair_batch_loss(spec: SiameseSpec):
    def batch_loss(model, batch):
        a, b, y = batch
        logits, d = model(a, b)
        loss_bce = F.cross_entropy(logits, y)
        if spec.cosine_mode == "distance":
            loss_con = contrastive_loss(1.0 - d, y, spec.margin, mode="distance")
        else:
            loss_con = contrastive_loss(d, y, spec.margin, mode="similarity")
        return total_siamese_loss(loss_bce, loss_con, spec.loss_weight)
    return batch_loss


def pair_accuracy(model: SiameseNet, a: torch.Tensor, b: torch.Tensor, y: torch.Tensor,
                  batch_size: int = 256) -> float:
    model.eval()
    with torch.no_grad():
        preds = []
        for i in range(0, a.shape[0], batch_size):
            logits, _ = model(a[i:i + batch_size], b[i:i + batch_size])
            preds.append(logits.argmax(dim=1))
    return float((torch.cat(preds) == y).float().mean().item())


def train_siamese(image_a: torch.Tensor, image_b: torch.Tensor, targets: torch.Tensor,
                  spec: SiameseSpec, config: TrainConfig,
                  encoder: torch.nn.Module | None = None) -> tuple[SiameseNet, dict]:
    """Train on a pair set; returns the model and a metrics dict including
    held-out pair accuracy. Refuses a single-class training set, under which
    the contrastive term is degenerate."""
    seed_everything(config.seed)
    model = SiameseNet(spec, encoder=encoder)
    train_idx, val_idx = holdout_split(targets.shape[0], config.val_fraction)
    y_train = targets[train_idx]
    if torch.unique(y_train).numel() < 2:
        raise DegenerateDatasetError("pair training set contains a single class")
    tensors = [image_a[train_idx], image_b[train_idx], y_train]
    a_val, b_val, y_val = image_a[val_idx], image_b[val_idx], targets[val_idx]

    def on_epoch(m, epoch):
        if val_idx.numel() == 0:
            return {}
        return {"val_accuracy": pair_accuracy(m, a_val, b_val, y_val)}

    history = train_loop(model, tensors, config, _pair_batch_loss(spec), on_epoch)
    model.fit_steps.fill_(config.epochs * max(1, len(train_idx) // config.batch_size))
    metrics = {
        "history": history,
        "train_accuracy": pair_accuracy(model, *tensors),
        "val_accuracy": history[-1].get("val_accuracy"),
        "train_pairs": int(train_idx.numel()),
        "val_pairs": int(val_idx.numel()),
    }
    return model, metrics


def pseudo_label(model: SiameseNet, frame_a: torch.Tensor, frame_b: torch.Tensor) -> int:
    """Emotion-change label for one frame pair: argmax over the two logits
    (1 = similar). Runs in inference mode with stored normalization
    statistics, so repeated calls agree bit-for-bit."""
    if int(model.fit_steps.item()) == 0:
        raise MoodkitError("siamese model has not been trained; refusing to pseudo-label")
    model.eval()
    with torch.no_grad():
        if frame_a.dim() == 3:
            frame_a, frame_b = frame_a.unsqueeze(0), frame_b.unsqueeze(0)
        logits, _ = model(frame_a, frame_b)
    return label_from_logits(logits[0])


def pseudo_label_batch(model: SiameseNet, frames_a: torch.Tensor, frames_b: torch.Tensor,
                       batch_size: int = 256) -> torch.Tensor:
    """Vectorized pseudo_label over stacked endpoint frames."""
    if int(model.fit_steps.item()) == 0:
        raise MoodkitError("siamese model has not been trained; refusing to pseudo-label")
    model.eval()
    labels = []
    with torch.no_grad():
        for i in range(0, frames_a.shape[0], batch_size):
            logits, _ = model(frames_a[i:i + batch_size], frames_b[i:i + batch_size])
            labels.append(logits.argmax(dim=1))
    return torch.cat(labels)


def write_delta_labels(rows: list[dict], path: str | Path) -> None:
    """JSON-lines: {"video_id", "window_start", "delta"}, joined to the clip
    manifest by (video_id, window_start)."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(
                {"video_id": row["video_id"], "window_start": row["window_start"],
                 "delta": row["delta"]}, sort_keys=True) + "\n")


def read_delta_labels(path: str | Path) -> dict[tuple[str, int], int]:
    out: dict[tuple[str, int], int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                out[(row["video_id"], row["window_start"])] = row["delta"]
    return out
