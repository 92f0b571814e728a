import json

import numpy as np
import pytest

from moodkit.annotations import DEFAULT_BINS, derive_mood_label, parse_annotations
from moodkit.errors import ConfigurationError
from moodkit.pipeline import tree_sha256
from moodkit.synth import (FACE_GEOMETRY, SynthSpec, ValenceSegment, VideoScript,
                           annotation_path, generate_corpus, generate_pair_set, render_face,
                           script_mood, trend_spec)

SMALL = SynthSpec(num_videos=6, frames_per_video=30, image_size=24, noise=0.05, seed=3)


class TestScriptMood:
    def test_single_positive_segment(self):
        assert script_mood([ValenceSegment(1, 100)]) == 1

    def test_longest_run_oracle(self):
        segments = [ValenceSegment(1, 30), ValenceSegment(0, 50), ValenceSegment(-1, 20)]
        assert script_mood(segments) == 0

    def test_adjacent_same_bin_segments_merge(self):
        segments = [ValenceSegment(1, 3), ValenceSegment(1, 3), ValenceSegment(0, 5)]
        assert script_mood(segments) == 1  # merged run of 6 beats 5

    def test_tie_precedence(self):
        assert script_mood([ValenceSegment(1, 4), ValenceSegment(0, 4)]) == 0
        assert script_mood([ValenceSegment(1, 4), ValenceSegment(-1, 4)]) == -1


class TestScriptValidation:
    def test_emotion_length_mismatch(self):
        script = VideoScript("v", [ValenceSegment(1, 5)], ["happy"] * 4)
        with pytest.raises(ConfigurationError):
            script.validate()

    def test_unknown_emotion(self):
        script = VideoScript("v", [ValenceSegment(1, 2)], ["happy", "bored"])
        with pytest.raises(ConfigurationError):
            script.validate()


class TestRenderFace:
    def test_shape_dtype_and_determinism(self):
        a = render_face("happy", 24, np.random.default_rng(5), noise=0.1)
        b = render_face("happy", 24, np.random.default_rng(5), noise=0.1)
        assert a.shape == (24, 24, 3) and a.dtype == np.uint8
        assert np.array_equal(a, b)

    def test_categories_are_geometrically_distinct(self):
        rng = np.random.default_rng(0)
        clean = {emo: render_face(emo, 32, np.random.default_rng(1), noise=0.0)
                 for emo in FACE_GEOMETRY}
        names = sorted(clean)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                diff = np.abs(clean[a].astype(int) - clean[b].astype(int)).mean()
                assert diff > 0.5, f"{a} and {b} render nearly identically"
        del rng


class TestGenerateCorpus:
    def test_sidecar_mood_single_segment(self, tmp_path):
        spec = SynthSpec(num_videos=1, frames_per_video=100, image_size=16, seed=1)
        spec.scripts = [VideoScript("v0", [ValenceSegment(1, 100)], ["happy"] * 100)]
        sidecar = generate_corpus(spec, tmp_path)
        assert sidecar["videos"]["v0"]["mood"] == 1

    def test_sidecar_mood_mixed_script(self, tmp_path):
        segments = [ValenceSegment(1, 30), ValenceSegment(0, 50), ValenceSegment(-1, 20)]
        emotions = ["happy"] * 30 + ["neutral"] * 50 + ["sad"] * 20
        spec = SynthSpec(num_videos=1, frames_per_video=100, image_size=16, seed=1)
        spec.scripts = [VideoScript("v0", segments, emotions)]
        sidecar = generate_corpus(spec, tmp_path)
        assert sidecar["videos"]["v0"]["mood"] == 0

    def test_same_seed_byte_identical(self, tmp_path):
        generate_corpus(SMALL, tmp_path / "a")
        generate_corpus(SMALL, tmp_path / "b")
        assert tree_sha256(tmp_path / "a") == tree_sha256(tmp_path / "b")

    def test_distinct_seeds_differ(self, tmp_path):
        generate_corpus(SMALL, tmp_path / "a")
        other = SynthSpec(**{**SMALL.__dict__, "seed": 4})
        generate_corpus(other, tmp_path / "b")
        assert tree_sha256(tmp_path / "a") != tree_sha256(tmp_path / "b")

    def test_pipeline_closure_labels_match_sidecar(self, tmp_path):
        sidecar = generate_corpus(SMALL, tmp_path)
        for video_id, info in sidecar["videos"].items():
            track = parse_annotations(annotation_path(tmp_path, video_id))
            assert track.dropped_frames == 0
            assert derive_mood_label(track) == info["mood"]

    def test_emitted_valence_stays_in_scripted_bin(self, tmp_path):
        spec = SynthSpec(num_videos=3, frames_per_video=24, image_size=16, seed=9)
        generate_corpus(spec, tmp_path)
        from moodkit.synth import default_scripts
        for i, script in enumerate(default_scripts(spec)):
            track = parse_annotations(annotation_path(tmp_path, script.video_id))
            position = 0
            for seg in script.segments:
                for _ in range(seg.length):
                    assert DEFAULT_BINS.bin_of(track.records[position].valence) == seg.mood_bin
                    position += 1

    def test_frames_on_disk_match_annotations(self, tmp_path):
        generate_corpus(SMALL, tmp_path)
        frames = sorted((tmp_path / "frames" / "video000").iterdir())
        assert len(frames) == SMALL.frames_per_video


class TestGeneratePairSet:
    def test_balanced_request(self, tmp_path):
        rows = generate_pair_set(SMALL, tmp_path, num_pairs=200)
        assert len(rows) == 200
        assert sum(r["target"] for r in rows) == 100

    def test_same_seed_byte_identical(self, tmp_path):
        generate_pair_set(SMALL, tmp_path / "a", num_pairs=20)
        generate_pair_set(SMALL, tmp_path / "b", num_pairs=20)
        assert tree_sha256(tmp_path / "a") == tree_sha256(tmp_path / "b")

    def test_manifest_paths_exist(self, tmp_path):
        rows = generate_pair_set(SMALL, tmp_path, num_pairs=10)
        for row in rows:
            assert (tmp_path / row["image_a"]).exists()
            assert (tmp_path / row["image_b"]).exists()
            assert row["target"] in (0, 1)


class TestTrendPreset:
    def test_negative_videos_alternate_every_frame(self):
        spec = trend_spec(num_videos=3, frames_per_video=10)
        negatives = [s for s in spec.scripts if script_mood(s.segments) == -1]
        assert negatives
        for script in negatives:
            assert script.emotions[0] != script.emotions[1]
            assert script.emotions[0] == script.emotions[2]

    def test_stable_videos_hold_one_emotion(self):
        spec = trend_spec(num_videos=3, frames_per_video=10)
        for script in spec.scripts:
            if script_mood(script.segments) in (0, 1):
                assert len(set(script.emotions)) == 1
