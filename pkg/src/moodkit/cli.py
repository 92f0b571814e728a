"""Command-line entry point chaining the pipeline stages.

Exit codes: 0 success, 2 validation failure (bad config, malformed or
missing inputs), 3 upstream-hash mismatch (stale or tampered artifacts).
Logs go to standard error; reports go only to their declared paths under
the workdir.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import resolve_config
from .errors import MoodkitError, UpstreamArtifactError
from .pipeline import (Workspace, stage_ablate, stage_derive_labels, stage_evaluate,
                       stage_make_clips, stage_pseudo_label, stage_synth, stage_train_mood,
                       stage_train_siamese, stage_train_ts)

log = logging.getLogger("moodkit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moodkit",
        description="Weakly-supervised video mood inference pipeline")
    parser.add_argument("--config", help="YAML config file layered over the defaults")
    parser.add_argument("--set", action="append", default=[], metavar="KEY.PATH=VALUE",
                        dest="overrides", help="override one config value (repeatable)")
    parser.add_argument("--profile", choices=["desk"],
                        help="named override bundle applied before the config file")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synth", help="render the synthetic corpus and pair set")
    sub.add_parser("derive-labels", help="derive per-video mood labels from annotations")
    sub.add_parser("make-clips", help="slide windows over each video and write the clip manifest")
    sub.add_parser("train-siamese", help="train the emotion-similarity pair model")
    sub.add_parser("pseudo-label", help="stamp emotion-change labels onto clip endpoints")

    train_mood = sub.add_parser("train-mood", help="train a clip mood classifier")
    train_mood.add_argument("--model", choices=["resmood", "resmoodemo"], required=True)
    train_mood.add_argument("--delta", choices=["pseudo", "gt"], default="pseudo",
                            help="emotion-change label source for resmoodemo")

    sub.add_parser("train-ts", help="distill the dual-head teacher into a fresh student")

    evaluate = sub.add_parser("evaluate", help="score a trained model on the clip manifest")
    evaluate.add_argument("--model", choices=["resmood", "resmoodemo", "tsnet"], required=True)
    evaluate.add_argument("--split", choices=["train", "val", "all"], default="val")
    evaluate.add_argument("--head", choices=["mood", "delta"], default="mood")

    ablate = sub.add_parser("ablate", help="run one ablation axis of the grid")
    ablate.add_argument("--axis", choices=["n", "t", "backbone", "temp-alpha"], required=True)
    return parser


def run(args: argparse.Namespace) -> None:
    config = resolve_config(args.config, args.overrides, args.profile)
    ws = Workspace(config["workdir"])
    ws.root.mkdir(parents=True, exist_ok=True)
    command = args.command
    if command == "synth":
        stage_synth(config, ws)
    elif command == "derive-labels":
        stage_derive_labels(config, ws)
    elif command == "make-clips":
        stage_make_clips(config, ws)
    elif command == "train-siamese":
        stage_train_siamese(config, ws)
    elif command == "pseudo-label":
        stage_pseudo_label(config, ws)
    elif command == "train-mood":
        stage_train_mood(config, ws, args.model, args.delta)
    elif command == "train-ts":
        stage_train_ts(config, ws)
    elif command == "evaluate":
        stage_evaluate(config, ws, args.model, args.split, args.head)
    elif command == "ablate":
        stage_ablate(config, ws, args.axis)
    else:  # pragma: no cover - argparse enforces the choices
        raise MoodkitError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.DEBUG if args.verbose else logging.INFO, force=True)
    try:
        run(args)
    except UpstreamArtifactError as exc:
        log.error("%s", exc)
        return 3
    except (MoodkitError, FileNotFoundError, NotADirectoryError, ValueError) as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
