"""Per-frame annotation parsing and video-level label derivation.

A video's mood label is the valence bin of the longest run of consecutive
frames whose valence stays in one bin. Ground-truth emotion-change labels
compare the categorical emotion of two frames.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AnnotationParseError, MissingEmotionError, RejectedTrackError

log = logging.getLogger(__name__)

EMOTION_CATEGORIES = frozenset(
    {"happy", "sad", "disgust", "anger", "fear", "surprise", "neutral", "other", "contempt"}
)

MOOD_VALUES = (-1, 0, 1)

#: CSV contract: this exact header, one row per frame, emotion may be empty.
CSV_HEADER = ["frame", "valence", "arousal", "emotion"]


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    valence: float
    arousal: float | None = None
    emotion: str | None = None


@dataclass(frozen=True)
class MoodBins:
    """Valence partition: negative [-1, neg_upper), neutral [neg_upper, pos_lower],
    positive (pos_lower, 1]. Boundary membership is exactly as written; no
    epsilon widening."""

    neg_upper: float = -0.3
    pos_lower: float = 0.3

    def bin_of(self, valence: float) -> int:
        if valence < self.neg_upper:
            return -1
        if valence > self.pos_lower:
            return 1
        return 0


DEFAULT_BINS = MoodBins()


@dataclass
class AnnotationTrack:
    video_id: str
    records: list[FrameRecord] = field(default_factory=list)
    dropped_frames: int = 0


def _in_range(value: float) -> bool:
    return -1.0 <= value <= 1.0


def parse_annotations(path: str | Path) -> AnnotationTrack:
    """Parse one annotation CSV into a track.

    Rows whose valence (or arousal, when present) falls outside [-1, 1] are
    dropped and counted, never clamped or interpolated. A malformed row
    raises AnnotationParseError naming the line; a track that is empty after
    filtering raises RejectedTrackError.
    """
    path = Path(path)
    track = AnnotationTrack(video_id=path.stem)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and [h.strip() for h in header] != CSV_HEADER:
            raise AnnotationParseError(
                f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}", 1
            )
        last_index = None
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(CSV_HEADER):
                raise AnnotationParseError(f"expected {len(CSV_HEADER)} columns, got {len(row)}", line_no)
            raw_frame, raw_val, raw_aro, raw_emo = (cell.strip() for cell in row)
            try:
                frame_index = int(raw_frame)
            except ValueError:
                raise AnnotationParseError(f"frame index {raw_frame!r} is not an integer", line_no) from None
            if frame_index < 0:
                raise AnnotationParseError(f"frame index {frame_index} is negative", line_no)
            if last_index is not None and frame_index <= last_index:
                raise AnnotationParseError(
                    f"frame index {frame_index} does not increase past {last_index}", line_no
                )
            last_index = frame_index
            try:
                valence = float(raw_val)
            except ValueError:
                raise AnnotationParseError(f"valence {raw_val!r} is not a number", line_no) from None
            arousal = None
            if raw_aro:
                try:
                    arousal = float(raw_aro)
                except ValueError:
                    raise AnnotationParseError(f"arousal {raw_aro!r} is not a number", line_no) from None
            emotion = raw_emo or None
            if emotion is not None and emotion not in EMOTION_CATEGORIES:
                raise AnnotationParseError(f"unknown emotion category {emotion!r}", line_no)
            if not _in_range(valence) or (arousal is not None and not _in_range(arousal)):
                track.dropped_frames += 1
                continue
            track.records.append(FrameRecord(frame_index, valence, arousal, emotion))
    if not track.records:
        raise RejectedTrackError(
            f"track {track.video_id!r} has no in-range records ({track.dropped_frames} dropped)"
        )
    if track.dropped_frames:
        log.info("track %s: dropped %d out-of-range rows", track.video_id, track.dropped_frames)
    return track


def derive_mood_label(track: AnnotationTrack, bins: MoodBins = DEFAULT_BINS) -> int:
    """Video-level mood from the longest run of consecutive same-bin frames.

    Runs are counted over bin indices, not raw valence values. Ties between
    equal longest runs resolve by precedence neutral > negative > positive
    (toward the less extreme claim).
    """
    if not track.records:
        raise RejectedTrackError(f"track {track.video_id!r} is empty")
    longest = {-1: 0, 0: 0, 1: 0}
    run_bin = None
    run_len = 0
    for record in track.records:
        b = bins.bin_of(record.valence)
        if b == run_bin:
            run_len += 1
        else:
            run_bin, run_len = b, 1
        if run_len > longest[b]:
            longest[b] = run_len
    top = max(longest.values())
    for candidate in (0, -1, 1):
        if longest[candidate] == top:
            return candidate
    raise AssertionError("unreachable")


def derive_delta_gt(emotion_a: str | None, emotion_b: str | None) -> int:
    """1 if both frames carry the same emotion category, 0 otherwise.

    A missing category is an exclusion signal, not a label."""
    if emotion_a is None or emotion_b is None:
        raise MissingEmotionError("emotion category missing; exclude this pair")
    return int(emotion_a == emotion_b)


def write_mood_labels(rows: list[dict], path: str | Path) -> None:
    """Write one JSON object per video: video_id, mood, dropped_frames."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(
                {"video_id": row["video_id"], "mood": row["mood"],
                 "dropped_frames": row["dropped_frames"]},
                sort_keys=True) + "\n")


def read_mood_labels(path: str | Path) -> dict[str, dict]:
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    return {row["video_id"]: row for row in rows}
