"""Deterministic synthetic affective-video corpus.

Face proxies are parametric geometric renderings: an elliptical head whose
mouth curvature/opening, eye height, and brow slant encode one of nine
emotion categories. Each video follows a scripted piecewise-constant valence
trace, so its true mood label is computable analytically and is written to a
test-only ground-truth sidecar. Same spec + same seed always reproduces a
byte-identical corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigurationError

POSITIVE_EMOTIONS = ("happy", "surprise")
NEUTRAL_EMOTIONS = ("neutral", "contempt", "other")
NEGATIVE_EMOTIONS = ("sad", "anger", "fear", "disgust")
EMOTIONS_BY_BIN = {1: POSITIVE_EMOTIONS, 0: NEUTRAL_EMOTIONS, -1: NEGATIVE_EMOTIONS}

# Valence is drawn uniformly from a sub-range of each bin so that rounding to
# the CSV's 6 decimals can never cross a bin boundary.
VALENCE_RANGES = {-1: (-0.9, -0.4), 0: (-0.2, 0.2), 1: (0.4, 0.9)}


@dataclass(frozen=True)
class FaceParams:
    mouth_curve: float = 0.0   # <0 corners up, >0 corners down
    mouth_skew: float = 0.0    # one-sided corner lift
    mouth_width: float = 0.30
    mouth_open: float = 0.0    # >0 renders an open ellipse instead of a line
    eye_height: float = 0.09
    brow_raise: float = 0.0
    brow_slant: float = 0.0    # >0 outer ends lower, <0 inner ends lower


# Geometry chosen so every category pair differs in at least one bold feature
# (confusable pairs like anger/disgust and fear/surprise get extra separation).
FACE_GEOMETRY: dict[str, FaceParams] = {
    "happy": FaceParams(mouth_curve=-0.24, mouth_width=0.36, brow_raise=0.02),
    "sad": FaceParams(mouth_curve=0.24, brow_slant=0.18),
    "neutral": FaceParams(),
    "anger": FaceParams(mouth_curve=0.04, mouth_width=0.22, eye_height=0.05,
                        brow_raise=-0.05, brow_slant=-0.26),
    "fear": FaceParams(mouth_width=0.24, mouth_open=0.07, eye_height=0.115, brow_raise=0.05),
    "surprise": FaceParams(mouth_width=0.15, mouth_open=0.19, eye_height=0.15, brow_raise=0.16),
    "disgust": FaceParams(mouth_curve=0.12, mouth_skew=0.20, mouth_width=0.30,
                          eye_height=0.06, brow_slant=-0.06),
    "contempt": FaceParams(mouth_skew=-0.18, mouth_width=0.32),
    "other": FaceParams(mouth_width=0.08, mouth_open=0.05, eye_height=0.12, brow_raise=0.09),
}


@dataclass(frozen=True)
class ValenceSegment:
    mood_bin: int  # -1, 0, +1
    length: int


@dataclass
class VideoScript:
    video_id: str
    segments: list[ValenceSegment]
    emotions: list[str]  # one category per frame

    @property
    def num_frames(self) -> int:
        return sum(seg.length for seg in self.segments)

    def validate(self) -> None:
        if not self.segments or any(seg.length < 1 for seg in self.segments):
            raise ConfigurationError(f"{self.video_id}: segments must be non-empty with positive lengths")
        if len(self.emotions) != self.num_frames:
            raise ConfigurationError(
                f"{self.video_id}: emotion script length {len(self.emotions)} "
                f"!= total frames {self.num_frames}"
            )
        unknown = set(self.emotions) - set(FACE_GEOMETRY)
        if unknown:
            raise ConfigurationError(f"{self.video_id}: unknown emotions {sorted(unknown)}")


@dataclass
class SynthSpec:
    num_videos: int = 20
    frames_per_video: int = 133
    image_size: int = 48
    noise: float = 0.06
    seed: int = 0
    scripts: list[VideoScript] | None = None


def script_mood(segments: list[ValenceSegment]) -> int:
    """Analytic mood of a valence script: bin of the longest merged run,
    ties resolved neutral > negative > positive."""
    runs: list[list[int]] = []
    for seg in segments:
        if runs and runs[-1][0] == seg.mood_bin:
            runs[-1][1] += seg.length
        else:
            runs.append([seg.mood_bin, seg.length])
    longest = {-1: 0, 0: 0, 1: 0}
    for mood_bin, length in runs:
        longest[mood_bin] = max(longest[mood_bin], length)
    top = max(longest.values())
    for candidate in (0, -1, 1):
        if longest[candidate] == top:
            return candidate
    raise AssertionError("unreachable")


def _video_rng(seed: int, video_index: int) -> np.random.Generator:
    # Per-video streams derived from the master seed keep parallel and serial
    # generation byte-identical.
    return np.random.default_rng([seed, video_index])


def default_scripts(spec: SynthSpec) -> list[VideoScript]:
    """Round-robin moods; each video has one dominant segment (its mood) and
    two shorter segments in the other bins, with bin-consistent emotions."""
    moods = (1, 0, -1)
    scripts = []
    for i in range(spec.num_videos):
        rng = _video_rng(spec.seed, i)
        mood = moods[i % 3]
        others = [b for b in moods if b != mood]
        frames = spec.frames_per_video
        if frames < 12:
            raise ConfigurationError(f"frames_per_video must be >= 12, got {frames}")
        minor_a = int(rng.integers(3, frames // 4))
        minor_b = int(rng.integers(3, frames // 4))
        dominant = frames - minor_a - minor_b
        segments = [
            ValenceSegment(others[0], minor_a),
            ValenceSegment(mood, dominant),
            ValenceSegment(others[1], minor_b),
        ]
        order = rng.permutation(3)
        segments = [segments[j] for j in order]
        emotions: list[str] = []
        for seg in segments:
            pool = EMOTIONS_BY_BIN[seg.mood_bin]
            emotions.extend([pool[int(rng.integers(len(pool)))]] * seg.length)
        script = VideoScript(video_id=f"video{i:03d}", segments=segments, emotions=emotions)
        script.validate()
        scripts.append(script)
    return scripts


def trend_scripts(spec: SynthSpec) -> list[VideoScript]:
    """Corpus where emotion-change labels carry mood-relevant signal:
    positive videos hold a happy face, neutral videos hold a sad face, and
    negative videos alternate happy/sad every frame. Any single frame is
    ambiguous between two moods; only the change pattern separates them."""
    scripts = []
    frames = spec.frames_per_video
    for i in range(spec.num_videos):
        mood = (1, 0, -1)[i % 3]
        segments = [ValenceSegment(mood, frames)]
        if mood == 1:
            emotions = ["happy"] * frames
        elif mood == 0:
            emotions = ["sad"] * frames
        else:
            emotions = ["happy" if f % 2 == 0 else "sad" for f in range(frames)]
        script = VideoScript(video_id=f"video{i:03d}", segments=segments, emotions=emotions)
        script.validate()
        scripts.append(script)
    return scripts


def trend_spec(num_videos: int = 15, frames_per_video: int = 48, image_size: int = 32,
               noise: float = 0.14, seed: int = 0) -> SynthSpec:
    """Frozen preset for the mechanism-direction check."""
    spec = SynthSpec(num_videos=num_videos, frames_per_video=frames_per_video,
                     image_size=image_size, noise=noise, seed=seed)
    spec.scripts = trend_scripts(spec)
    return spec


def render_face(emotion: str, size: int, rng: np.random.Generator,
                noise: float = 0.0) -> np.ndarray:
    """One face-proxy frame as uint8 (size, size, 3). The same category always
    draws the same geometry; per-frame variation is Gaussian pixel noise."""
    p = FACE_GEOMETRY[emotion]
    lin = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    x = lin[None, :]
    y = lin[:, None]

    img = np.full((size, size, 3), 0.10)

    def paint(mask, color):
        img[mask] = color

    paint((x / 0.86) ** 2 + (y / 0.94) ** 2 <= 1.0, (0.84, 0.72, 0.58))

    for side in (-1.0, 1.0):
        ex = 0.34 * side
        paint(((x - ex) / 0.14) ** 2 + ((y + 0.22) / p.eye_height) ** 2 <= 1.0,
              (0.08, 0.07, 0.07))
        t = (np.abs(x) - 0.34) / 0.16  # -1 at inner brow end, +1 at outer
        brow_y = -0.46 - p.brow_raise + p.brow_slant * t
        paint((np.abs(y - brow_y) <= 0.05) & (np.abs(np.abs(x) - 0.34) <= 0.16),
              (0.25, 0.15, 0.08))

    if p.mouth_open > 0.0:
        paint((x / p.mouth_width) ** 2 + ((y - 0.42) / p.mouth_open) ** 2 <= 1.0,
              (0.35, 0.08, 0.08))
    else:
        mouth_y = 0.42 + p.mouth_curve * ((x / p.mouth_width) ** 2 - 0.5) \
            + p.mouth_skew * (x / p.mouth_width)
        paint((np.abs(y - mouth_y) <= 0.07) & (np.abs(x) <= p.mouth_width),
              (0.45, 0.10, 0.10))

    if noise > 0.0:
        img = img + rng.normal(0.0, noise, img.shape)
    return (np.clip(img, 0.0, 1.0) * 255.0).round().astype(np.uint8)


def _save_png(array: np.ndarray, path: Path) -> None:
    Image.fromarray(array).save(path, format="PNG")


def frame_path(corpus_dir: str | Path, video_id: str, frame_index: int) -> Path:
    return Path(corpus_dir) / "frames" / video_id / f"f{frame_index:05d}.png"


def annotation_path(corpus_dir: str | Path, video_id: str) -> Path:
    return Path(corpus_dir) / "annotations" / f"{video_id}.csv"


def generate_corpus(spec: SynthSpec, out_dir: str | Path) -> dict:
    """Render frames and annotation CSVs; write the ground-truth sidecar.

    Returns the sidecar dict. The sidecar records the analytic mood per video
    and exists only so tests can assert against it."""
    out_dir = Path(out_dir)
    scripts = spec.scripts if spec.scripts is not None else default_scripts(spec)
    (out_dir / "annotations").mkdir(parents=True, exist_ok=True)
    videos: dict[str, dict] = {}
    for i, script in enumerate(scripts):
        script.validate()
        rng = _video_rng(spec.seed, i)
        video_dir = out_dir / "frames" / script.video_id
        video_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        frame = 0
        for seg in script.segments:
            lo, hi = VALENCE_RANGES[seg.mood_bin]
            for _ in range(seg.length):
                valence = float(rng.uniform(lo, hi))
                arousal = float(rng.uniform(-0.6, 0.6))
                emotion = script.emotions[frame]
                rows.append((frame, valence, arousal, emotion))
                _save_png(render_face(emotion, spec.image_size, rng, spec.noise),
                          video_dir / f"f{frame:05d}.png")
                frame += 1
        with open(annotation_path(out_dir, script.video_id), "w", encoding="utf-8") as fh:
            fh.write("frame,valence,arousal,emotion\n")
            for frame_index, valence, arousal, emotion in rows:
                fh.write(f"{frame_index},{valence:.6f},{arousal:.6f},{emotion}\n")
        videos[script.video_id] = {
            "mood": script_mood(script.segments),
            "frames": script.num_frames,
        }
    sidecar = {
        "note": "test-only ground truth; the pipeline must never read this",
        "image_size": spec.image_size,
        "videos": videos,
    }
    with open(out_dir / "ground_truth.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return sidecar


def generate_pair_set(spec: SynthSpec, out_dir: str | Path, num_pairs: int = 600) -> list[dict]:
    """Render a class-balanced same/different-emotion pair set.

    Exactly num_pairs // 2 pairs are similar (target 1); the rest pair two
    distinct categories (target 0). Order is shuffled but seeded. Returns the
    manifest rows, also written to pairs.jsonl."""
    if num_pairs < 2:
        raise ConfigurationError(f"num_pairs must be >= 2, got {num_pairs}")
    out_dir = Path(out_dir)
    image_dir = out_dir / "pair_images"
    image_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng([spec.seed, 986_527])
    categories = sorted(FACE_GEOMETRY)
    num_similar = num_pairs // 2
    targets = [1] * num_similar + [0] * (num_pairs - num_similar)
    targets = [targets[j] for j in rng.permutation(num_pairs)]
    rows = []
    for i, target in enumerate(targets):
        if target == 1:
            cat_a = cat_b = categories[int(rng.integers(len(categories)))]
        else:
            a, b = rng.choice(len(categories), size=2, replace=False)
            cat_a, cat_b = categories[int(a)], categories[int(b)]
        name_a, name_b = f"p{i:05d}_a.png", f"p{i:05d}_b.png"
        _save_png(render_face(cat_a, spec.image_size, rng, spec.noise), image_dir / name_a)
        _save_png(render_face(cat_b, spec.image_size, rng, spec.noise), image_dir / name_b)
        rows.append({"image_a": f"pair_images/{name_a}", "image_b": f"pair_images/{name_b}",
                     "target": target})
    with open(out_dir / "pairs.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return rows
