"""Stage orchestration behind the CLI.

Every stage validates its declared inputs against the hash chain before it
runs, writes its primary outputs to fixed paths under the workdir, and
records a meta file binding the output bytes to the resolved config. Stages
are idempotent: identical inputs and seed reproduce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
from dataclasses import asdict, dataclass
from pathlib import Path

import torch

from . import data
from .annotations import derive_mood_label, parse_annotations, read_mood_labels, write_mood_labels
from .checkpoint import load_sidecar, restore_model, save_model
from .config import derive_seed, stage_hash
from .distill import DistillConfig, train_student, write_grid_csv
from .errors import ConfigurationError, MoodkitError, UpstreamArtifactError
from .evaluation import EvalReport, run_ablation, write_ablation_csv
from .moodnet import INDEX_TO_MOOD, ModelSpec, MoodDeltaNet, build_model, train_mood_model
from .sampler import SamplerConfig, generate_clips, read_clip_manifest, write_clip_manifest
from .siamese import SiameseNet, SiameseSpec, pseudo_label_batch, read_delta_labels, train_siamese, write_delta_labels
from .synth import SynthSpec, annotation_path, generate_corpus, generate_pair_set, trend_scripts
from .training import TrainConfig, predict_logits

log = logging.getLogger(__name__)


@dataclass
class Workspace:
    root: Path

    def __post_init__(self):
        self.root = Path(self.root)

    @property
    def corpus_dir(self) -> Path:
        return self.root / "corpus"

    @property
    def moods_path(self) -> Path:
        return self.root / "moods.jsonl"

    @property
    def clips_path(self) -> Path:
        return self.root / "clips.jsonl"

    @property
    def deltas_path(self) -> Path:
        return self.root / "deltas.jsonl"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    def checkpoint_path(self, name: str) -> Path:
        return self.root / f"{name}.ckpt"

    def metrics_path(self, name: str) -> Path:
        return self.root / f"{name}_metrics.json"

    def meta_path(self, name: str) -> Path:
        return self.root / f"{name}.meta.json"


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def tree_sha256(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(p for p in Path(root).rglob("*") if p.is_file()):
        digest.update(str(path.relative_to(root)).encode("utf-8"))
        digest.update(bytes.fromhex(file_sha256(path)))
    return digest.hexdigest()


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_meta(ws: Workspace, name: str, stage: str, stage_config_hash: str,
                content: str, inputs: dict[str, str]) -> None:
    write_json(ws.meta_path(name), {
        "stage": stage,
        "config_hash": stage_config_hash,
        "content_sha256": content,
        "inputs": inputs,
    })


def _content_hash(path: Path) -> str:
    return tree_sha256(path) if path.is_dir() else file_sha256(path)


def _require(ws: Workspace, name: str, artifact: Path, expected_config_hash: str) -> str:
    """Validate one upstream artifact; returns its recorded content hash."""
    meta_path = ws.meta_path(name)
    if not artifact.exists() or not meta_path.exists():
        raise MoodkitError(f"missing upstream artifact {artifact.name!r}; "
                           f"run its producing stage first")
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("config_hash") != expected_config_hash:
        raise UpstreamArtifactError(
            f"{artifact.name}: stale upstream hash (recorded {meta.get('config_hash', '?')[:12]}, "
            f"expected {expected_config_hash[:12]}); re-run its stage with the current config")
    actual = _content_hash(artifact)
    if actual != meta.get("content_sha256"):
        raise UpstreamArtifactError(
            f"{artifact.name}: content hash mismatch; the artifact was modified after it was written")
    return actual


def _require_checkpoint(ws: Workspace, name: str, expected_config_hash: str) -> tuple[Path, dict]:
    path = ws.checkpoint_path(name)
    if not path.exists() or not path.with_suffix(".json").exists():
        raise MoodkitError(f"missing checkpoint {path.name!r}; run its training stage first")
    sidecar = load_sidecar(path)
    if sidecar.get("config_hash") != expected_config_hash:
        raise UpstreamArtifactError(
            f"{path.name}: stale checkpoint hash; re-train with the current config")
    if file_sha256(path) != sidecar.get("content_sha256"):
        raise UpstreamArtifactError(f"{path.name}: checkpoint bytes do not match the sidecar")
    return path, sidecar


# ---------------------------------------------------------------------------
# config adapters

def synth_spec_from(config: dict) -> SynthSpec:
    section = config["corpus"]
    spec = SynthSpec(
        num_videos=section["videos"],
        frames_per_video=section["frames"],
        image_size=section["image_size"],
        noise=section["noise"],
        seed=derive_seed(config["seed"], "synth"),
    )
    if section["preset"] == "trend":
        spec.scripts = trend_scripts(spec)
    elif section["preset"] != "default":
        raise ConfigurationError(f"unknown corpus preset {section['preset']!r}")
    return spec


def sampler_config_from(config: dict) -> SamplerConfig:
    section = config["sampler"]
    return SamplerConfig(temporal_length=section["temporal_length"],
                         stride=section["stride"],
                         frames_per_clip=section["frames_per_clip"])


def siamese_spec_from(config: dict) -> SiameseSpec:
    section = config["siamese"]
    return SiameseSpec(
        embed_dim=section["embed_dim"],
        head_widths=tuple(section["head"]),
        dropout=section["dropout"],
        margin=section["margin"],
        loss_weight=section["loss_weight"],
        cosine_mode=section["cosine_mode"],
        encoder=section["encoder"],
    )


def model_spec_from(config: dict, model: str) -> ModelSpec:
    section = config["mood"]
    return ModelSpec(
        model=model,
        backbone=section["backbone"],
        feature_dim=section["feature_dim"],
        dropout=section["dropout"],
        input_size=section["input_size"],
    )


def train_config_from(section: dict, seed: int) -> TrainConfig:
    return TrainConfig(epochs=section["epochs"], batch_size=section["batch_size"],
                       lr=section["lr"], val_fraction=section["val_fraction"], seed=seed)


# ---------------------------------------------------------------------------
# stages

def stage_synth(config: dict, ws: Workspace) -> dict:
    spec = synth_spec_from(config)
    if ws.corpus_dir.exists():
        shutil.rmtree(ws.corpus_dir)
    ws.corpus_dir.mkdir(parents=True)
    sidecar = generate_corpus(spec, ws.corpus_dir)
    pairs = generate_pair_set(spec, ws.corpus_dir, num_pairs=config["corpus"]["pairs"])
    h = stage_hash("synth", config)
    content = tree_sha256(ws.corpus_dir)
    _write_meta(ws, "corpus", "synth", h, content, {})
    log.info("synth: %d videos, %d pairs -> %s", len(sidecar["videos"]), len(pairs), ws.corpus_dir)
    return {"videos": len(sidecar["videos"]), "pairs": len(pairs)}


def stage_derive_labels(config: dict, ws: Workspace) -> dict:
    corpus_content = _require(ws, "corpus", ws.corpus_dir, stage_hash("synth", config))
    rows = []
    for video_id in data.list_videos(ws.corpus_dir):
        track = parse_annotations(annotation_path(ws.corpus_dir, video_id))
        rows.append({"video_id": video_id, "mood": derive_mood_label(track),
                     "dropped_frames": track.dropped_frames})
    write_mood_labels(rows, ws.moods_path)
    h = stage_hash("derive-labels", config, {"corpus": corpus_content})
    _write_meta(ws, "moods", "derive-labels", h, file_sha256(ws.moods_path), {"corpus": corpus_content})
    counts = {m: sum(1 for r in rows if r["mood"] == m) for m in (-1, 0, 1)}
    log.info("derive-labels: %d videos, mood counts %s", len(rows), counts)
    return {"videos": len(rows), "counts": counts}


def _moods_expected(config: dict, corpus_content: str) -> str:
    return stage_hash("derive-labels", config, {"corpus": corpus_content})


def stage_make_clips(config: dict, ws: Workspace) -> dict:
    corpus_content = _require(ws, "corpus", ws.corpus_dir, stage_hash("synth", config))
    moods_content = _require(ws, "moods", ws.moods_path, _moods_expected(config, corpus_content))
    sampler_config = sampler_config_from(config)
    moods = read_mood_labels(ws.moods_path)
    clips = []
    skipped = 0
    for video_id in data.list_videos(ws.corpus_dir):
        length = data.video_length(ws.corpus_dir, video_id)
        video_clips = generate_clips(length, sampler_config, moods[video_id]["mood"], video_id)
        if not video_clips:
            skipped += 1
            log.warning("make-clips: skipping %s (%d frames < window %d)",
                        video_id, length, sampler_config.temporal_length)
        clips.extend(video_clips)
    write_clip_manifest(clips, ws.clips_path)
    h = stage_hash("make-clips", config, {"corpus": corpus_content, "moods": moods_content})
    _write_meta(ws, "clips", "make-clips", h, file_sha256(ws.clips_path),
                {"corpus": corpus_content, "moods": moods_content})
    log.info("make-clips: %d clips (%d videos skipped)", len(clips), skipped)
    return {"clips": len(clips), "skipped_videos": skipped}


def _clips_expected(config: dict, corpus_content: str, moods_content: str) -> str:
    return stage_hash("make-clips", config, {"corpus": corpus_content, "moods": moods_content})


def _require_chain_clips(config: dict, ws: Workspace) -> tuple[str, str]:
    """Validate corpus -> moods -> clips; returns (corpus_content, clips_content)."""
    corpus_content = _require(ws, "corpus", ws.corpus_dir, stage_hash("synth", config))
    moods_content = _require(ws, "moods", ws.moods_path, _moods_expected(config, corpus_content))
    clips_content = _require(ws, "clips", ws.clips_path,
                             _clips_expected(config, corpus_content, moods_content))
    return corpus_content, clips_content


def stage_train_siamese(config: dict, ws: Workspace) -> dict:
    corpus_content = _require(ws, "corpus", ws.corpus_dir, stage_hash("synth", config))
    spec = siamese_spec_from(config)
    train_config = train_config_from(config["siamese"], derive_seed(config["seed"], "train-siamese"))
    a, b, y = data.load_pair_tensors(ws.corpus_dir)
    model, metrics = train_siamese(a, b, y, spec, train_config)
    h = stage_hash("train-siamese", config, {"corpus": corpus_content})
    save_model(ws.checkpoint_path("siamese"), model, {
        "kind": "siamese",
        "stage": "train-siamese",
        "config_hash": h,
        "spec": asdict(spec),
        "input_size": int(a.shape[-1]),
        "train": asdict(train_config),
    })
    write_json(ws.metrics_path("siamese"), {
        "model": "siamese", "config_hash": h,
        "train_accuracy": metrics["train_accuracy"],
        "val_accuracy": metrics["val_accuracy"],
        "train_pairs": metrics["train_pairs"], "val_pairs": metrics["val_pairs"],
        "history": metrics["history"],
    })
    log.info("train-siamese: held-out accuracy %.4f (%d val pairs)",
             metrics["val_accuracy"], metrics["val_pairs"])
    return metrics


def _siamese_expected(config: dict, corpus_content: str) -> str:
    return stage_hash("train-siamese", config, {"corpus": corpus_content})


def stage_pseudo_label(config: dict, ws: Workspace) -> dict:
    corpus_content, clips_content = _require_chain_clips(config, ws)
    ckpt_path, sidecar = _require_checkpoint(ws, "siamese", _siamese_expected(config, corpus_content))
    spec = SiameseSpec.from_dict(sidecar["spec"])
    model = restore_model(ckpt_path, SiameseNet(spec))
    clips = read_clip_manifest(ws.clips_path)
    if not clips:
        raise MoodkitError("clip manifest is empty; nothing to pseudo-label")
    firsts, lasts = data.load_endpoint_tensors(clips, ws.corpus_dir, sidecar["input_size"])
    labels = pseudo_label_batch(model, firsts, lasts)
    rows = [{"video_id": c.video_id, "window_start": c.window_start, "delta": int(d)}
            for c, d in zip(clips, labels)]
    write_delta_labels(rows, ws.deltas_path)
    h = stage_hash("pseudo-label", config,
                   {"clips": clips_content, "siamese": sidecar["content_sha256"]})
    _write_meta(ws, "deltas", "pseudo-label", h, file_sha256(ws.deltas_path),
                {"clips": clips_content, "siamese": sidecar["content_sha256"]})
    similar = sum(r["delta"] for r in rows)
    log.info("pseudo-label: %d clips, %d similar / %d dissimilar",
             len(rows), similar, len(rows) - similar)
    return {"clips": len(rows), "similar": similar}


def _deltas_expected(config: dict, clips_content: str, siamese_blob: str) -> str:
    return stage_hash("pseudo-label", config, {"clips": clips_content, "siamese": siamese_blob})


def _load_split_tensors(config: dict, ws: Workspace, clips, input_size: int, require_delta: bool):
    train_clips, val_clips = data.split_by_video(clips, config["mood"]["val_fraction"],
                                                 derive_seed(config["seed"], "split"))
    x_tr, y_tr, d_tr = data.load_clip_tensors(train_clips, ws.corpus_dir, input_size,
                                              require_delta=require_delta)
    val = None
    if val_clips:
        x_va, y_va, _ = data.load_clip_tensors(val_clips, ws.corpus_dir, input_size)
        val = (x_va, y_va)
    return x_tr, y_tr, d_tr, val


def stage_train_mood(config: dict, ws: Workspace, model_name: str, delta_source: str) -> dict:
    if model_name not in ("resmood", "resmoodemo"):
        raise ConfigurationError(f"--model must be resmood|resmoodemo, got {model_name!r}")
    if delta_source not in ("pseudo", "gt"):
        raise ConfigurationError(f"--delta must be pseudo|gt, got {delta_source!r}")
    corpus_content, clips_content = _require_chain_clips(config, ws)
    clips = read_clip_manifest(ws.clips_path)
    upstream = {"clips": clips_content}
    extra = {"model": model_name}
    if model_name == "resmoodemo":
        extra["delta"] = delta_source
        if delta_source == "pseudo":
            ckpt_path, siamese_sidecar = _require_checkpoint(
                ws, "siamese", _siamese_expected(config, corpus_content))
            deltas_content = _require(ws, "deltas", ws.deltas_path,
                                      _deltas_expected(config, clips_content,
                                                       siamese_sidecar["content_sha256"]))
            clips = data.attach_deltas(clips, read_delta_labels(ws.deltas_path))
            upstream["deltas"] = deltas_content
        else:
            tracks = data.load_tracks(ws.corpus_dir)
            clips, excluded = data.delta_gt_for_clips(clips, tracks)
            if excluded:
                log.info("train-mood: excluded %d clips lacking endpoint emotions", excluded)
            if not clips:
                raise MoodkitError("no clips carry ground-truth delta labels")
            upstream["corpus"] = corpus_content
    spec = model_spec_from(config, model_name)
    train_config = train_config_from(config["mood"],
                                     derive_seed(config["seed"], f"train-mood:{model_name}"))
    x_tr, y_tr, d_tr, val = _load_split_tensors(config, ws, clips, spec.input_size,
                                                require_delta=(model_name == "resmoodemo"))
    model, metrics = train_mood_model(x_tr, y_tr, spec, train_config,
                                      deltas=d_tr if model_name == "resmoodemo" else None,
                                      val=val)
    h = stage_hash("train-mood", config, upstream, extra=extra)
    save_model(ws.checkpoint_path(model_name), model, {
        "kind": model_name,
        "stage": "train-mood",
        "config_hash": h,
        "spec": asdict(spec),
        "delta_source": delta_source if model_name == "resmoodemo" else None,
        "train": asdict(train_config),
    })
    write_json(ws.metrics_path(model_name), {
        "model": model_name,
        "f1": metrics["val_f1_final"] if metrics["val_f1_final"] is not None else metrics["train_f1"],
        "config_hash": h,
        "train_f1": metrics["train_f1"],
        "val_f1_best": metrics["val_f1_best"],
        "val_f1_final": metrics["val_f1_final"],
        "delta_source": delta_source if model_name == "resmoodemo" else None,
        "history": metrics["history"],
    })
    log.info("train-mood[%s]: train F1 %.4f, val F1 %s", model_name, metrics["train_f1"],
             f"{metrics['val_f1_final']:.4f}" if metrics["val_f1_final"] is not None else "n/a")
    return metrics


def _mood_ckpt_expected(config: dict, ws: Workspace, model_name: str, delta_source: str,
                        corpus_content: str, clips_content: str) -> str:
    upstream = {"clips": clips_content}
    extra = {"model": model_name}
    if model_name == "resmoodemo":
        extra["delta"] = delta_source
        if delta_source == "pseudo":
            if not ws.deltas_path.exists():
                raise MoodkitError("missing deltas.jsonl; run pseudo-label first")
            upstream["deltas"] = _content_hash(ws.deltas_path)
        else:
            upstream["corpus"] = corpus_content
    return stage_hash("train-mood", config, upstream, extra=extra)


def stage_train_ts(config: dict, ws: Workspace, delta_source: str = "pseudo") -> dict:
    corpus_content, clips_content = _require_chain_clips(config, ws)
    teacher_path = ws.checkpoint_path("resmoodemo")
    if not teacher_path.exists():
        raise MoodkitError("missing teacher checkpoint resmoodemo.ckpt; run train-mood first")
    teacher_sidecar = load_sidecar(teacher_path)
    expected = _mood_ckpt_expected(config, ws, "resmoodemo",
                                   teacher_sidecar.get("delta_source") or "pseudo",
                                   corpus_content, clips_content)
    teacher_path, teacher_sidecar = _require_checkpoint(ws, "resmoodemo", expected)
    teacher = restore_model(teacher_path, MoodDeltaNet(ModelSpec.from_dict(teacher_sidecar["spec"])))

    student_spec = model_spec_from(config, "resmood")
    if teacher.spec.mood_head[-1] != student_spec.mood_head[-1]:
        raise ConfigurationError("teacher and student disagree on the mood class count")
    distill_config = DistillConfig(temperature=config["distill"]["temperature"],
                                   alpha=config["distill"]["alpha"])
    train_config = train_config_from(config["mood"], derive_seed(config["seed"], "train-ts"))
    clips = read_clip_manifest(ws.clips_path)
    x_tr, y_tr, _, val = _load_split_tensors(config, ws, clips, student_spec.input_size,
                                             require_delta=False)
    student, metrics = train_student(teacher, x_tr, y_tr, student_spec, distill_config,
                                     train_config, val=val)
    h = stage_hash("train-ts", config,
                   {"clips": clips_content, "teacher": teacher_sidecar["content_sha256"]})
    save_model(ws.checkpoint_path("student"), student, {
        "kind": "tsnet",
        "stage": "train-ts",
        "config_hash": h,
        "spec": asdict(student_spec),
        "distill": asdict(distill_config),
        "train": asdict(train_config),
    })
    write_json(ws.metrics_path("student"), {
        "model": "tsnet",
        "f1": metrics["val_f1_final"] if metrics["val_f1_final"] is not None else metrics["train_f1"],
        "config_hash": h,
        "train_f1": metrics["train_f1"],
        "val_f1_best": metrics["val_f1_best"],
        "val_f1_final": metrics["val_f1_final"],
        "temperature": metrics["temperature"],
        "alpha": metrics["alpha"],
        "history": metrics["history"],
    })
    log.info("train-ts: student train F1 %.4f, val F1 %s", metrics["train_f1"],
             f"{metrics['val_f1_final']:.4f}" if metrics["val_f1_final"] is not None else "n/a")
    return metrics


_EVAL_CKPTS = {"resmood": "resmood", "resmoodemo": "resmoodemo", "tsnet": "student"}


def stage_evaluate(config: dict, ws: Workspace, model_name: str, split: str = "val",
                   head: str = "mood") -> dict:
    if model_name not in _EVAL_CKPTS:
        raise ConfigurationError(f"--model must be one of {sorted(_EVAL_CKPTS)}")
    if split not in ("train", "val", "all"):
        raise ConfigurationError(f"--split must be train|val|all, got {split!r}")
    if head not in ("mood", "delta"):
        raise ConfigurationError(f"--head must be mood|delta, got {head!r}")
    if head == "delta" and model_name != "resmoodemo":
        raise ConfigurationError("only resmoodemo has an emotion-change head")
    corpus_content, clips_content = _require_chain_clips(config, ws)
    ckpt_name = _EVAL_CKPTS[model_name]
    path = ws.checkpoint_path(ckpt_name)
    if not path.exists():
        raise MoodkitError(f"missing checkpoint {path.name!r}; train it first")
    sidecar = load_sidecar(path)
    spec = ModelSpec.from_dict(sidecar["spec"])
    model = restore_model(path, build_model(spec))
    clips = read_clip_manifest(ws.clips_path)
    train_clips, val_clips = data.split_by_video(clips, config["mood"]["val_fraction"],
                                                 derive_seed(config["seed"], "split"))
    subset = {"train": train_clips, "val": val_clips, "all": clips}[split]
    if not subset:
        raise MoodkitError(f"no clips in split {split!r}")
    if head == "delta":
        tracks = data.load_tracks(ws.corpus_dir)
        subset, excluded = data.delta_gt_for_clips(list(subset), tracks)
        if not subset:
            raise MoodkitError("no clips carry ground-truth delta labels")
        if excluded:
            log.info("evaluate: excluded %d clips lacking endpoint emotions", excluded)
        x, _, d = data.load_clip_tensors(subset, ws.corpus_dir, spec.input_size, require_delta=True)
        logits = _delta_logits(model, x)
        report = EvalReport.from_predictions(logits.argmax(dim=1).tolist(), d.tolist(), classes=[0, 1])
    else:
        x, y, _ = data.load_clip_tensors(subset, ws.corpus_dir, spec.input_size)
        forward = model.mood_logits if isinstance(model, MoodDeltaNet) else None
        logits = predict_logits(model, x, forward=forward)
        preds = [INDEX_TO_MOOD[int(i)] for i in logits.argmax(dim=1)]
        labels = [INDEX_TO_MOOD[int(i)] for i in y]
        report = EvalReport.from_predictions(preds, labels, classes=list(INDEX_TO_MOOD.values()))
    h = stage_hash("evaluate", config,
                   {"clips": clips_content, "checkpoint": sidecar["content_sha256"]},
                   extra={"model": model_name, "split": split, "head": head})
    ws.reports_dir.mkdir(parents=True, exist_ok=True)
    stem = f"eval_{model_name}_{split}" + ("_delta" if head == "delta" else "")
    payload = {"model": model_name, "split": split, "head": head, "config_hash": h,
               "clips": len(subset), **report.to_json_dict()}
    write_json(ws.reports_dir / f"{stem}.json", payload)
    text = (f"model {model_name}  split {split}  head {head}  clips {len(subset)}\n"
            + report.to_text() + f"\nconfig_hash {h}\n")
    (ws.reports_dir / f"{stem}.txt").write_text(text, encoding="utf-8")
    log.info("evaluate[%s/%s/%s]: weighted F1 %.4f over %d clips",
             model_name, split, head, report.weighted_f1, len(subset))
    return payload


def _delta_logits(model, x: torch.Tensor) -> torch.Tensor:
    model.eval()
    outs = []
    with torch.no_grad():
        for i in range(0, x.shape[0], 256):
            outs.append(model(x[i:i + 256])[1])
    return torch.cat(outs)


def stage_ablate(config: dict, ws: Workspace, axis: str) -> list[dict]:
    corpus_content = _require(ws, "corpus", ws.corpus_dir, stage_hash("synth", config))
    _require(ws, "moods", ws.moods_path, _moods_expected(config, corpus_content))
    section = config["ablation"]
    values = {
        "n": section["n"],
        "t": section["t"],
        "backbone": section["backbone"],
        "temp-alpha": [(t, a) for t in section["temperatures"] for a in section["alphas"]],
    }[axis]
    moods = {vid: row["mood"] for vid, row in read_mood_labels(ws.moods_path).items()}
    rows = run_ablation(
        axis, values,
        corpus_dir=ws.corpus_dir,
        video_moods=moods,
        sampler_config=sampler_config_from(config),
        model_spec=model_spec_from(config, "resmood"),
        train_config=train_config_from(config["mood"], derive_seed(config["seed"], "ablate")),
        distill_config=DistillConfig(temperature=config["distill"]["temperature"],
                                     alpha=config["distill"]["alpha"]),
        models=section["models"],
        input_size=config["mood"]["input_size"],
    )
    out = ws.root / f"ablation_{axis.replace('-', '_')}.csv"
    write_ablation_csv(rows, out)
    if axis == "temp-alpha":
        write_grid_csv([r for r in rows if r.get("f1") is not None],
                       ws.root / "grid_temp_alpha.csv")
    h = stage_hash("ablate", config, {"corpus": corpus_content}, extra={"axis": axis})
    _write_meta(ws, f"ablation_{axis.replace('-', '_')}", "ablate", h, file_sha256(out),
                {"corpus": corpus_content})
    done = sum(1 for r in rows if r.get("f1") is not None)
    log.info("ablate[%s]: %d/%d cells completed -> %s", axis, done, len(rows), out)
    return rows
