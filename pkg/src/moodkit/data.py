"""Corpus access and tensor assembly shared by the trainers.

Clip tensors follow the manifest contract: frames are stored frames-first
(n, H, W, 3) on disk/manifest order and assembled to (3, n, H, W) channel-
first tensors, pixel values in [0, 1].
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .annotations import AnnotationTrack, derive_delta_gt, parse_annotations
from .errors import MissingEmotionError, MoodkitError
from .moodnet import MOOD_TO_INDEX
from .sampler import ClipSpec, delta_endpoints
from .synth import annotation_path, frame_path


def load_image(path: str | Path, size: int | None = None) -> np.ndarray:
    """uint8 (H, W, 3); bilinear-resized when size differs."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        if size is not None and img.size != (size, size):
            img = img.resize((size, size), Image.BILINEAR)
        return np.asarray(img, dtype=np.uint8)


class FrameStore:
    """Caches decoded frames per (video, frame) at one spatial size."""

    def __init__(self, corpus_dir: str | Path, size: int | None = None):
        self.corpus_dir = Path(corpus_dir)
        self.size = size
        self._cache: dict[tuple[str, int], np.ndarray] = {}

    def get(self, video_id: str, frame_index: int) -> np.ndarray:
        key = (video_id, frame_index)
        if key not in self._cache:
            self._cache[key] = load_image(frame_path(self.corpus_dir, video_id, frame_index), self.size)
        return self._cache[key]


def list_videos(corpus_dir: str | Path) -> list[str]:
    frames_dir = Path(corpus_dir) / "frames"
    if not frames_dir.is_dir():
        raise MoodkitError(f"no frames directory under {corpus_dir}")
    return sorted(p.name for p in frames_dir.iterdir() if p.is_dir())


def video_length(corpus_dir: str | Path, video_id: str) -> int:
    video_dir = Path(corpus_dir) / "frames" / video_id
    return sum(1 for p in video_dir.iterdir() if p.suffix == ".png")


def load_tracks(corpus_dir: str | Path) -> dict[str, AnnotationTrack]:
    return {vid: parse_annotations(annotation_path(corpus_dir, vid))
            for vid in list_videos(corpus_dir)}


def clip_array(clip: ClipSpec, store: FrameStore) -> np.ndarray:
    """float32 (3, n, H, W) in [0, 1]."""
    frames = np.stack([store.get(clip.video_id, i) for i in clip.frame_indices])
    return (frames.astype(np.float32) / 255.0).transpose(3, 0, 1, 2)


def load_clip_tensors(clips: list[ClipSpec], corpus_dir: str | Path, size: int | None,
                      require_delta: bool = False) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor | None]:
    """Stack clips into (X, mood_indices, deltas). deltas is None unless every
    clip carries one; require_delta makes a missing label an error."""
    store = FrameStore(corpus_dir, size)
    x = torch.from_numpy(np.stack([clip_array(c, store) for c in clips]))
    moods = torch.tensor([MOOD_TO_INDEX[c.mood] for c in clips], dtype=torch.long)
    missing = sum(1 for c in clips if c.delta is None)
    if require_delta and missing:
        raise MoodkitError(f"{missing} of {len(clips)} clips lack a delta label")
    deltas = None
    if missing == 0 and clips:
        deltas = torch.tensor([c.delta for c in clips], dtype=torch.long)
    return x, moods, deltas


def load_endpoint_tensors(clips: list[ClipSpec], corpus_dir: str | Path,
                          size: int | None) -> tuple[torch.Tensor, torch.Tensor]:
    """First/last window frames of each clip, stacked for pair inference."""
    store = FrameStore(corpus_dir, size)
    firsts, lasts = [], []
    for clip in clips:
        first, last = delta_endpoints(clip)
        firsts.append(store.get(clip.video_id, first))
        lasts.append(store.get(clip.video_id, last))

    def to_tensor(stack):
        arr = np.stack(stack).astype(np.float32) / 255.0
        return torch.from_numpy(arr.transpose(0, 3, 1, 2))

    return to_tensor(firsts), to_tensor(lasts)


def load_pair_tensors(pairs_dir: str | Path, size: int | None = None
                      ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Pair set emitted by synth.generate_pair_set -> (A, B, targets)."""
    pairs_dir = Path(pairs_dir)
    rows = []
    with open(pairs_dir / "pairs.jsonl", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    a = np.stack([load_image(pairs_dir / r["image_a"], size) for r in rows])
    b = np.stack([load_image(pairs_dir / r["image_b"], size) for r in rows])
    y = torch.tensor([r["target"] for r in rows], dtype=torch.long)
    to = lambda arr: torch.from_numpy((arr.astype(np.float32) / 255.0).transpose(0, 3, 1, 2))
    return to(a), to(b), y


def attach_deltas(clips: list[ClipSpec], deltas: dict[tuple[str, int], int]) -> list[ClipSpec]:
    """Fill each clip's delta slot from (video_id, window_start)-keyed labels."""
    missing = [(c.video_id, c.window_start) for c in clips
               if (c.video_id, c.window_start) not in deltas]
    if missing:
        raise MoodkitError(f"{len(missing)} clips have no delta label (first: {missing[0]})")
    for clip in clips:
        clip.delta = deltas[(clip.video_id, clip.window_start)]
    return clips


def delta_gt_for_clips(clips: list[ClipSpec], tracks: dict[str, AnnotationTrack]
                       ) -> tuple[list[ClipSpec], int]:
    """Ground-truth delta from the categorical annotations at each clip's
    endpoint frames. Clips whose endpoints lack a category are excluded, not
    labeled; returns (kept clips, excluded count)."""
    emotion_at: dict[str, dict[int, str | None]] = {
        vid: {r.frame_index: r.emotion for r in track.records} for vid, track in tracks.items()
    }
    kept, excluded = [], 0
    for clip in clips:
        first, last = delta_endpoints(clip)
        lookup = emotion_at.get(clip.video_id, {})
        try:
            clip.delta = derive_delta_gt(lookup.get(first), lookup.get(last))
        except MissingEmotionError:
            excluded += 1
            continue
        kept.append(clip)
    return kept, excluded


def split_by_video(clips: list[ClipSpec], val_fraction: float, seed: int
                   ) -> tuple[list[ClipSpec], list[ClipSpec]]:
    """Held-out split at video granularity; overlapping windows from one video
    never straddle the split."""
    videos = sorted({c.video_id for c in clips})
    rng = np.random.default_rng(seed)
    rng.shuffle(videos)
    n_val = max(1, int(round(len(videos) * val_fraction))) if val_fraction > 0 else 0
    if n_val >= len(videos):
        n_val = len(videos) - 1
    val_videos = set(videos[:n_val])
    train = [c for c in clips if c.video_id not in val_videos]
    val = [c for c in clips if c.video_id in val_videos]
    return train, val
