"""Sliding-window clip generation with equal-interval frame subsampling.

Windows of ``temporal_length`` frames advance by ``stride`` raw frames; each
window keeps ``frames_per_clip`` frames at (integer) equal intervals, always
including both window endpoints. Every clip inherits its parent video's mood
label; the emotion-change slot is filled later.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError


@dataclass(frozen=True)
class SamplerConfig:
    temporal_length: int = 100
    stride: int = 3
    frames_per_clip: int = 5

    def __post_init__(self):
        if not 2 <= self.frames_per_clip <= self.temporal_length:
            raise ConfigurationError(
                f"frames_per_clip must satisfy 2 <= n <= t, got n={self.frames_per_clip} t={self.temporal_length}"
            )
        if self.stride < 1:
            raise ConfigurationError(f"stride must be >= 1, got {self.stride}")


@dataclass
class ClipSpec:
    video_id: str
    window_start: int
    temporal_length: int
    frame_indices: list[int]
    mood: int
    delta: int | None = None

    def validate(self) -> None:
        first, last = self.window_start, self.window_start + self.temporal_length - 1
        if self.frame_indices[0] != first or self.frame_indices[-1] != last:
            raise ValueError(f"clip indices must span [{first}, {last}], got {self.frame_indices}")
        if any(b <= a for a, b in zip(self.frame_indices, self.frame_indices[1:])):
            raise ValueError(f"clip indices must be strictly increasing: {self.frame_indices}")
        if any(i < first or i > last for i in self.frame_indices):
            raise ValueError(f"clip indices leave the window [{first}, {last}]: {self.frame_indices}")


def sample_frame_indices(temporal_length: int, frames_per_clip: int) -> list[int]:
    """Offsets floor(i*(t-1)/(n-1)) for i in 0..n-1: both endpoints included,
    strictly increasing, consecutive gaps differing by at most one frame."""
    t, n = temporal_length, frames_per_clip
    if not 2 <= n <= t:
        raise ConfigurationError(f"need 2 <= n <= t, got n={n} t={t}")
    return [i * (t - 1) // (n - 1) for i in range(n)]


def generate_clips(video_length: int, config: SamplerConfig, mood: int,
                   video_id: str = "") -> list[ClipSpec]:
    """All clips of one video: windows start at 0, s, 2s, ... while they fit.

    A video shorter than the window yields an empty list; callers report the
    skip rather than padding."""
    if video_length < 1:
        raise ConfigurationError(f"video_length must be >= 1, got {video_length}")
    offsets = sample_frame_indices(config.temporal_length, config.frames_per_clip)
    clips = []
    start = 0
    while start + config.temporal_length <= video_length:
        clips.append(ClipSpec(
            video_id=video_id,
            window_start=start,
            temporal_length=config.temporal_length,
            frame_indices=[start + o for o in offsets],
            mood=mood,
        ))
        start += config.stride
    return clips


def delta_endpoints(clip: ClipSpec) -> tuple[int, int]:
    """The window's first and last frame indices; identical to the first and
    last sampled indices because sampling is endpoint-inclusive."""
    return clip.window_start, clip.window_start + clip.temporal_length - 1


def write_clip_manifest(clips: list[ClipSpec], path: str | Path) -> None:
    """JSON-lines manifest, one clip per line with fields exactly as ClipSpec."""
    with open(path, "w", encoding="utf-8") as fh:
        for clip in clips:
            fh.write(json.dumps({
                "video_id": clip.video_id,
                "window_start": clip.window_start,
                "temporal_length": clip.temporal_length,
                "frame_indices": clip.frame_indices,
                "mood": clip.mood,
                "delta": clip.delta,
            }, sort_keys=True) + "\n")


def read_clip_manifest(path: str | Path) -> list[ClipSpec]:
    clips = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            clips.append(ClipSpec(
                video_id=row["video_id"],
                window_start=row["window_start"],
                temporal_length=row["temporal_length"],
                frame_indices=list(row["frame_indices"]),
                mood=row["mood"],
                delta=row["delta"],
            ))
    return clips
