"""Metrics and the ablation grid runner.

weighted_f1 is implemented directly from the confusion matrix (support-
weighted mean of per-class F1, zero-division convention F1=0). The grid
runner retrains models per cell with a shared seed and reports percent
change against the single-head baseline in the same cell.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, MoodkitError

log = logging.getLogger(__name__)


def confusion_matrix(predictions: Sequence[int], labels: Sequence[int],
                     classes: Sequence[int]) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for pred, true in zip(predictions, labels):
        matrix[index[true], index[pred]] += 1
    return matrix


def _per_class_scores(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tp = np.diag(matrix).astype(np.float64)
    predicted = matrix.sum(axis=0).astype(np.float64)
    support = matrix.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    return precision, recall, f1


def weighted_f1(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Support-weighted mean of per-class F1 over the classes present in
    either vector; classes absent from labels carry zero support."""
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(labels)} labels")
    if len(labels) == 0:
        raise ValueError("weighted_f1 of empty vectors")
    classes = sorted(set(labels) | set(predictions))
    matrix = confusion_matrix(predictions, labels, classes)
    _, _, f1 = _per_class_scores(matrix)
    support = matrix.sum(axis=1)
    return float((support * f1).sum() / support.sum())


@dataclass
class EvalReport:
    classes: list[int]
    precision: list[float]
    recall: list[float]
    f1: list[float]
    support: list[int]
    weighted_f1: float
    matrix: list[list[int]]

    @classmethod
    def from_predictions(cls, predictions: Sequence[int], labels: Sequence[int],
                         classes: Sequence[int] | None = None) -> "EvalReport":
        if len(predictions) != len(labels) or len(labels) == 0:
            raise ValueError("predictions and labels must be equal-length and non-empty")
        if classes is None:
            classes = sorted(set(labels) | set(predictions))
        matrix = confusion_matrix(predictions, labels, classes)
        precision, recall, f1 = _per_class_scores(matrix)
        support = matrix.sum(axis=1)
        weighted = float((support * f1).sum() / support.sum())
        return cls(
            classes=list(classes),
            precision=[float(v) for v in precision],
            recall=[float(v) for v in recall],
            f1=[float(v) for v in f1],
            support=[int(v) for v in support],
            weighted_f1=weighted,
            matrix=matrix.tolist(),
        )

    def to_json_dict(self) -> dict:
        return {
            "classes": self.classes,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "weighted_f1": self.weighted_f1,
            "confusion_matrix": self.matrix,
        }

    def to_text(self) -> str:
        lines = [f"{'class':>8} {'prec':>7} {'recall':>7} {'f1':>7} {'support':>8}"]
        for i, c in enumerate(self.classes):
            lines.append(f"{c:>8} {self.precision[i]:>7.4f} {self.recall[i]:>7.4f} "
                         f"{self.f1[i]:>7.4f} {self.support[i]:>8}")
        lines.append(f"weighted F1: {self.weighted_f1:.4f}")
        lines.append("confusion matrix (rows = true):")
        for row in self.matrix:
            lines.append("  " + " ".join(f"{v:>6}" for v in row))
        return "\n".join(lines)


def pct_change(f1_cell: float, f1_base: float) -> float | None:
    """100 * (cell - base) / base; None when the baseline is zero."""
    if f1_base == 0:
        return None
    return 100.0 * (f1_cell - f1_base) / f1_base


ABLATION_AXES = ("n", "t", "backbone", "temp-alpha")
_MODEL_ORDER = ("resmood", "resmoodemo", "tsnet")


def _ordered_models(models: Sequence[str]) -> list[str]:
    unknown = set(models) - set(_MODEL_ORDER)
    if unknown:
        raise ConfigurationError(f"unknown models {sorted(unknown)}; known: {_MODEL_ORDER}")
    return [m for m in _MODEL_ORDER if m in models]


def run_ablation(axis: str, values: Sequence, *, corpus_dir, video_moods: dict[str, int],
                 sampler_config, model_spec, train_config, distill_config,
                 models: Sequence[str] = _MODEL_ORDER,
                 input_size: int | None = None) -> list[dict]:
    """Train and evaluate every grid cell with the shared base seed.

    Delta supervision uses the ground-truth route so each cell is self-
    contained under its own window geometry. The reported F1 is held-out
    (video-level split) when a validation fraction is configured, else the
    training F1. A failing cell is recorded as a row carrying an "error"
    field, never fatal to the grid. Rows: axis_value, model, f1, pct_change.
    """
    from . import data
    from .distill import train_student
    from .moodnet import train_mood_model
    from .sampler import generate_clips

    if axis not in ABLATION_AXES:
        raise ConfigurationError(f"unknown ablation axis {axis!r}; known: {ABLATION_AXES}")
    models = _ordered_models(models) if axis != "temp-alpha" else ["tsnet"]
    tracks = data.load_tracks(corpus_dir)
    lengths = {vid: data.video_length(corpus_dir, vid) for vid in video_moods}

    def cell_tensors(cell_sampler):
        clips = []
        for vid in sorted(video_moods):
            clips.extend(generate_clips(lengths[vid], cell_sampler, video_moods[vid], vid))
        clips, excluded = data.delta_gt_for_clips(clips, tracks)
        if excluded:
            log.info("ablation: excluded %d clips lacking endpoint emotions", excluded)
        if not clips:
            raise MoodkitError(f"no clips fit t={cell_sampler.temporal_length}")
        train_clips, val_clips = data.split_by_video(clips, train_config.val_fraction,
                                                     train_config.seed)
        x_tr, y_tr, d_tr = data.load_clip_tensors(train_clips, corpus_dir, input_size,
                                                  require_delta=True)
        val = None
        if val_clips:
            x_va, y_va, _ = data.load_clip_tensors(val_clips, corpus_dir, input_size)
            val = (x_va, y_va)
        return x_tr, y_tr, d_tr, val

    def reported_f1(metrics) -> float:
        return metrics["val_f1_final"] if metrics["val_f1_final"] is not None else metrics["train_f1"]

    rows: list[dict] = []

    if axis == "temp-alpha":
        try:
            x_tr, y_tr, d_tr, val = cell_tensors(sampler_config)
            _, base_metrics = train_mood_model(x_tr, y_tr, replace(model_spec, model="resmood"),
                                               train_config, val=val)
            base_f1 = reported_f1(base_metrics)
            teacher, _ = train_mood_model(x_tr, y_tr, replace(model_spec, model="resmoodemo"),
                                          train_config, deltas=d_tr, val=val)
        except Exception as exc:
            log.warning("temp-alpha grid setup failed: %s", exc)
            return [{"axis_value": f"T={t},alpha={a}", "model": "tsnet", "f1": None,
                     "pct_change": None, "T": t, "alpha": a, "error": str(exc)}
                    for t, a in values]
        for temperature, alpha in values:
            cell = {"axis_value": f"T={temperature},alpha={alpha}", "model": "tsnet",
                    "T": temperature, "alpha": alpha}
            try:
                cfg = replace(distill_config, temperature=temperature, alpha=alpha)
                _, metrics = train_student(teacher, x_tr, y_tr,
                                           replace(model_spec, model="resmood"),
                                           cfg, train_config, val=val)
                f1 = reported_f1(metrics)
                rows.append({**cell, "f1": f1, "pct_change": pct_change(f1, base_f1)})
            except Exception as exc:
                log.warning("cell %s failed: %s", cell["axis_value"], exc)
                rows.append({**cell, "f1": None, "pct_change": None, "error": str(exc)})
        return rows

    for value in values:
        cell_rows: list[dict] = []
        results: dict[str, float] = {}
        teacher = None
        try:
            cell_sampler = sampler_config
            cell_spec = model_spec
            if axis == "n":
                cell_sampler = replace(sampler_config, frames_per_clip=int(value))
            elif axis == "t":
                cell_sampler = replace(sampler_config, temporal_length=int(value))
            elif axis == "backbone":
                cell_spec = replace(model_spec, backbone=str(value), feature_dim=None)
            x_tr, y_tr, d_tr, val = cell_tensors(cell_sampler)
        except Exception as exc:
            log.warning("cell %s=%s failed to build: %s", axis, value, exc)
            rows.extend({"axis_value": value, "model": m, "f1": None,
                         "pct_change": None, "error": str(exc)} for m in models)
            continue
        for model_name in models:
            try:
                if model_name == "resmood":
                    _, metrics = train_mood_model(x_tr, y_tr, replace(cell_spec, model="resmood"),
                                                  train_config, val=val)
                elif model_name == "resmoodemo":
                    net, metrics = train_mood_model(x_tr, y_tr, replace(cell_spec, model="resmoodemo"),
                                                    train_config, deltas=d_tr, val=val)
                    teacher = net
                else:
                    if teacher is None:
                        teacher, _ = train_mood_model(x_tr, y_tr,
                                                      replace(cell_spec, model="resmoodemo"),
                                                      train_config, deltas=d_tr, val=val)
                    _, metrics = train_student(teacher, x_tr, y_tr,
                                               replace(cell_spec, model="resmood"),
                                               distill_config, train_config, val=val)
                results[model_name] = reported_f1(metrics)
                cell_rows.append({"axis_value": value, "model": model_name,
                                  "f1": results[model_name]})
            except Exception as exc:
                log.warning("cell %s=%s model %s failed: %s", axis, value, model_name, exc)
                cell_rows.append({"axis_value": value, "model": model_name, "f1": None,
                                  "pct_change": None, "error": str(exc)})
        base = results.get("resmood")
        for row in cell_rows:
            if "error" not in row:
                row["pct_change"] = None if base is None else pct_change(row["f1"], base)
        rows.extend(cell_rows)
    return rows


def write_ablation_csv(rows: list[dict], path: str | Path) -> None:
    """Grid output CSV with columns axis_value,model,f1,pct_change; failed
    cells leave f1/pct_change empty."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["axis_value", "model", "f1", "pct_change"])
        for row in rows:
            f1 = "" if row.get("f1") is None else repr(row["f1"])
            pct = "" if row.get("pct_change") is None else repr(row["pct_change"])
            writer.writerow([row["axis_value"], row["model"], f1, pct])
