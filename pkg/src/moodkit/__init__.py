"""moodkit: weakly-supervised video mood inference.

Derives video-level mood labels from per-frame valence traces, generates
pseudo emotion-change labels with a twin-encoder similarity model, and trains
single-head, dual-head, and teacher-student clip classifiers at desk scale on
a deterministic synthetic corpus.
"""

__version__ = "0.1.0"

from .annotations import (AnnotationTrack, FrameRecord, MoodBins, derive_delta_gt,
                          derive_mood_label, parse_annotations)
from .distill import DistillConfig, distillation_loss, soft_targets, ts_total_loss
from .evaluation import EvalReport, weighted_f1
from .moodnet import ModelSpec, MoodDeltaNet, MoodNet, joint_loss
from .sampler import ClipSpec, SamplerConfig, delta_endpoints, generate_clips, sample_frame_indices
from .siamese import SiameseNet, SiameseSpec, contrastive_loss, pseudo_label, total_siamese_loss
from .synth import SynthSpec, generate_corpus, generate_pair_set
from .training import TrainConfig

__all__ = [
    "AnnotationTrack", "FrameRecord", "MoodBins", "derive_delta_gt", "derive_mood_label",
    "parse_annotations", "DistillConfig", "distillation_loss", "soft_targets", "ts_total_loss",
    "EvalReport", "weighted_f1", "ModelSpec", "MoodDeltaNet", "MoodNet", "joint_loss",
    "ClipSpec", "SamplerConfig", "delta_endpoints", "generate_clips", "sample_frame_indices",
    "SiameseNet", "SiameseSpec", "contrastive_loss", "pseudo_label", "total_siamese_loss",
    "SynthSpec", "generate_corpus", "generate_pair_set", "TrainConfig",
]
