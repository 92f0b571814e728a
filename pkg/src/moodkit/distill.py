"""Teacher-student distillation for the mood task.

A trained dual-head teacher provides temperature-softened mood targets; the
single-head student optimizes alpha * cross-entropy + (1 - alpha) * KL on the
softened distributions. The student never reads emotion-change labels, and
evaluation always uses the student's raw (temperature-1) logits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .errors import ConfigurationError
from .moodnet import ModelSpec, MoodNet, weighted_f1_of_model
from .training import TrainConfig, seed_everything, train_loop

TEMPERATURE_GRID = (3.0, 5.0, 7.0)
ALPHA_GRID = (0.05, 0.1, 0.15, 0.2)


@dataclass(frozen=True)
class DistillConfig:
    temperature: float = 3.0
    alpha: float = 0.05

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigurationError(f"temperature must be > 0, got {self.temperature}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in [0, 1], got {self.alpha}")


def soft_targets(logits: torch.Tensor, temperature: float) -> torch.Tensor:
    """softmax(logits / T) along the last dim. Sums to 1 and preserves the
    argmax for every T > 0; large T approaches the uniform distribution."""
    if temperature <= 0:
        raise ConfigurationError(f"temperature must be > 0, got {temperature}")
    return F.softmax(logits / temperature, dim=-1)


def distillation_loss(student_logits: torch.Tensor, teacher_logits: torch.Tensor,
                      temperature: float) -> torch.Tensor:
    """KL(teacher || student) on the T-softened distributions, scaled by T^2
    so gradient magnitudes stay comparable across the temperature grid."""
    if temperature <= 0:
        raise ConfigurationError(f"temperature must be > 0, got {temperature}")
    if student_logits.shape != teacher_logits.shape:
        raise ValueError(
            f"logit shapes differ: {tuple(student_logits.shape)} vs {tuple(teacher_logits.shape)}")
    if student_logits.dim() == 1:
        student_logits = student_logits.unsqueeze(0)
        teacher_logits = teacher_logits.unsqueeze(0)
    log_p_student = F.log_softmax(student_logits / temperature, dim=-1)
    p_teacher = F.softmax(teacher_logits / temperature, dim=-1)
    return F.kl_div(log_p_student, p_teacher, reduction="batchmean") * temperature ** 2


def ts_total_loss(loss_student, loss_distill, alpha: float):
    """alpha * supervised student loss + (1 - alpha) * distillation loss."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must be in [0, 1], got {alpha}")
    return alpha * loss_student + (1.0 - alpha) * loss_distill


def train_student(teacher: torch.nn.Module, clips: torch.Tensor, moods: torch.Tensor,
                  student_spec: ModelSpec, distill_config: DistillConfig, config: TrainConfig,
                  val: tuple[torch.Tensor, torch.Tensor] | None = None) -> tuple[MoodNet, dict]:
    """Distill the frozen teacher's mood head into a fresh single-head student.

    The teacher runs in inference mode (stored normalization statistics)
    throughout; its parameters receive no gradient."""
    if student_spec.model != "resmood":
        raise ConfigurationError("the student is a single-head model (resmood)")
    teacher_mood_dim = teacher.mood_head.net[-1].out_features
    if teacher_mood_dim != student_spec.mood_head[-1]:
        raise ConfigurationError(
            f"teacher emits {teacher_mood_dim} mood classes, student expects {student_spec.mood_head[-1]}")
    teacher.eval()
    for p in teacher.parameters():
        p.requires_grad_(False)

    seed_everything(config.seed)
    student = MoodNet(student_spec)

    def batch_loss(model, batch):
        x, y = batch
        student_logits = model(x)
        with torch.no_grad():
            teacher_logits = teacher.mood_logits(x) if hasattr(teacher, "mood_logits") else teacher(x)
        loss_s = F.cross_entropy(student_logits, y)
        loss_d = distillation_loss(student_logits, teacher_logits, distill_config.temperature)
        return ts_total_loss(loss_s, loss_d, distill_config.alpha)

    def on_epoch(m, epoch):
        if val is None:
            return {}
        return {"val_f1": weighted_f1_of_model(m, val[0], val[1])}

    history = train_loop(student, [clips, moods], config, batch_loss, on_epoch)
    metrics = {
        "history": history,
        "train_f1": weighted_f1_of_model(student, clips, moods),
        "val_f1_best": max((h["val_f1"] for h in history if "val_f1" in h), default=None),
        "val_f1_final": history[-1].get("val_f1"),
        "temperature": distill_config.temperature,
        "alpha": distill_config.alpha,
    }
    return student, metrics


def write_grid_csv(rows: list[dict], path: str | Path) -> None:
    """Temperature/alpha grid results as CSV with header T,alpha,f1."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["T", "alpha", "f1"])
        for row in rows:
            writer.writerow([row["T"], row["alpha"], row["f1"]])
