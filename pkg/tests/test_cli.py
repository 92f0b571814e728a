import json
import subprocess
import sys

import pytest

from moodkit.cli import main

TINY_YAML = """\
workdir: {workdir}
seed: 11
corpus:
  videos: 6
  frames: 40
  image_size: 24
  noise: 0.05
  pairs: 60
sampler:
  temporal_length: 20
  stride: 5
  frames_per_clip: 3
siamese:
  epochs: 2
  batch_size: 16
  lr: 0.001
  val_fraction: 0.25
mood:
  input_size: 24
  epochs: 2
  batch_size: 8
  lr: 0.001
  val_fraction: 0.34
ablation:
  models: [resmood]
  n: [3]
"""


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """Run the full tiny chain once; tests below poke at the artifacts."""
    root = tmp_path_factory.mktemp("cli_chain")
    workdir = root / "run"
    config = root / "tiny.yaml"
    config.write_text(TINY_YAML.format(workdir=workdir), encoding="utf-8")
    cfg = ["--config", str(config)]
    for args in (
        ["synth"],
        ["derive-labels"],
        ["make-clips"],
        ["train-siamese"],
        ["pseudo-label"],
        ["train-mood", "--model", "resmood"],
        ["train-mood", "--model", "resmoodemo", "--delta", "pseudo"],
        ["train-ts"],
        ["evaluate", "--model", "tsnet", "--split", "val"],
        ["evaluate", "--model", "resmood", "--split", "val"],
    ):
        assert main(cfg + args) == 0, f"command {args} failed"
    return config, workdir


class TestChain:
    def test_artifacts_exist(self, chain):
        _, workdir = chain
        for name in ("moods.jsonl", "clips.jsonl", "deltas.jsonl", "siamese.ckpt",
                     "siamese.json", "resmood.ckpt", "resmoodemo.ckpt", "student.ckpt",
                     "resmood_metrics.json", "student_metrics.json"):
            assert (workdir / name).exists(), name
        assert (workdir / "reports" / "eval_resmood_val.json").exists()
        assert (workdir / "reports" / "eval_resmood_val.txt").exists()

    def test_metrics_embed_config_hash_and_f1(self, chain):
        _, workdir = chain
        metrics = json.loads((workdir / "resmoodemo_metrics.json").read_text())
        assert metrics["model"] == "resmoodemo"
        assert isinstance(metrics["f1"], float)
        assert len(metrics["config_hash"]) == 64

    def test_moods_jsonl_schema(self, chain):
        _, workdir = chain
        rows = [json.loads(l) for l in (workdir / "moods.jsonl").read_text().splitlines()]
        assert len(rows) == 6
        for row in rows:
            assert set(row) == {"video_id", "mood", "dropped_frames"}
            assert row["mood"] in (-1, 0, 1)

    def test_deltas_schema_and_join_keys(self, chain):
        _, workdir = chain
        deltas = [json.loads(l) for l in (workdir / "deltas.jsonl").read_text().splitlines()]
        clips = [json.loads(l) for l in (workdir / "clips.jsonl").read_text().splitlines()]
        assert {(d["video_id"], d["window_start"]) for d in deltas} \
            == {(c["video_id"], c["window_start"]) for c in clips}
        assert all(d["delta"] in (0, 1) for d in deltas)

    def test_rerun_produces_byte_identical_outputs(self, chain):
        config, workdir = chain
        clips_before = (workdir / "clips.jsonl").read_bytes()
        report_before = (workdir / "reports" / "eval_resmood_val.json").read_bytes()
        metrics_before = (workdir / "resmood_metrics.json").read_bytes()
        ckpt_before = (workdir / "resmood.ckpt").read_bytes()
        assert main(["--config", str(config), "make-clips"]) == 0
        assert main(["--config", str(config), "train-mood", "--model", "resmood"]) == 0
        assert main(["--config", str(config), "evaluate", "--model", "resmood",
                     "--split", "val"]) == 0
        assert (workdir / "clips.jsonl").read_bytes() == clips_before
        assert (workdir / "resmood.ckpt").read_bytes() == ckpt_before
        assert (workdir / "resmood_metrics.json").read_bytes() == metrics_before
        assert (workdir / "reports" / "eval_resmood_val.json").read_bytes() == report_before

    def test_gt_delta_route(self, chain):
        config, workdir = chain
        assert main(["--config", str(config), "train-mood", "--model", "resmoodemo",
                     "--delta", "gt"]) == 0
        sidecar = json.loads((workdir / "resmoodemo.json").read_text())
        assert sidecar["delta_source"] == "gt"
        # restore the pseudo-trained teacher for any later tests
        assert main(["--config", str(config), "train-mood", "--model", "resmoodemo",
                     "--delta", "pseudo"]) == 0

    def test_ablate_writes_grid_csv(self, chain):
        config, workdir = chain
        assert main(["--config", str(config), "ablate", "--axis", "n"]) == 0
        lines = (workdir / "ablation_n.csv").read_text().splitlines()
        assert lines[0] == "axis_value,model,f1,pct_change"
        assert lines[1].startswith("3,resmood,")

    def test_delta_head_evaluation(self, chain):
        config, workdir = chain
        assert main(["--config", str(config), "evaluate", "--model", "resmoodemo",
                     "--split", "train", "--head", "delta"]) == 0
        report = json.loads((workdir / "reports" / "eval_resmoodemo_train_delta.json").read_text())
        assert report["classes"] == [0, 1]


class TestExitCodes:
    def test_missing_upstream_is_validation_failure(self, tmp_path):
        config = tmp_path / "c.yaml"
        config.write_text(TINY_YAML.format(workdir=tmp_path / "fresh"), encoding="utf-8")
        assert main(["--config", str(config), "make-clips"]) == 2

    def test_invalid_config_value(self, tmp_path, chain):
        config, _ = chain
        assert main(["--config", str(config), "--set", "distill.alpha=2.0", "train-ts"]) == 2

    def test_unknown_config_key(self, chain):
        config, _ = chain
        assert main(["--config", str(config), "--set", "mood.nonsense=1",
                     "derive-labels"]) == 2

    def test_stale_upstream_hash_is_exit_3(self, chain):
        config, _ = chain
        code = main(["--config", str(config), "--set", "sampler.stride=7",
                     "train-mood", "--model", "resmood"])
        assert code == 3

    def test_tampered_artifact_is_exit_3(self, chain):
        config, workdir = chain
        clips = workdir / "clips.jsonl"
        original = clips.read_bytes()
        try:
            with open(clips, "ab") as fh:
                fh.write(b"\n")
            code = main(["--config", str(config), "train-mood", "--model", "resmood"])
            assert code == 3
        finally:
            clips.write_bytes(original)

    def test_bad_cli_arguments_exit_2(self, chain):
        config, _ = chain
        with pytest.raises(SystemExit) as err:
            main(["--config", str(config), "train-mood", "--model", "resnet"])
        assert err.value.code == 2

    def test_stage_isolation_deleting_downstream_leaves_upstream_valid(self, chain):
        config, workdir = chain
        (workdir / "deltas.jsonl").unlink()
        (workdir / "deltas.meta.json").unlink()
        # upstream clips still verify; regenerating the deltas succeeds
        assert main(["--config", str(config), "pseudo-label"]) == 0


class TestSubprocessEntry:
    def test_module_entry_point(self, tmp_path):
        config = tmp_path / "c.yaml"
        config.write_text(TINY_YAML.format(workdir=tmp_path / "run"), encoding="utf-8")
        proc = subprocess.run(
            [sys.executable, "-m", "moodkit", "--config", str(config), "synth"],
            capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "run" / "corpus" / "ground_truth.json").exists()
        assert proc.stdout == ""  # reports go to files, logs to stderr

    def test_help_exits_zero(self):
        proc = subprocess.run([sys.executable, "-m", "moodkit", "--help"],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        for command in ("synth", "derive-labels", "make-clips", "train-siamese",
                        "pseudo-label", "train-mood", "train-ts", "evaluate", "ablate"):
            assert command in proc.stdout
