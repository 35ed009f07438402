"""Command-line interface.

Every command exits 0 on success; failures print one JSON object to stderr
({"error": <class>, "message": <text>}) and exit nonzero (2 for domain
errors, 3 for unexpected ones).
"""

import argparse
import json
import os
import sys
import traceback
from dataclasses import asdict

from .canvas import as_canvas
from .classifier import SketchClassifier, train_classifier
from .config import TrainerConfig, load_config, save_config
from .env import EpisodeTrace, TraceStep
from .errors import ConfigurationError, SketchRLError
from .evaluate import report as build_report
from .evaluate import run_draw
from .gridmap import GridmapConfig, export_trajectory, read_trajectory, simulate_execution
from .pgm import read_pgm, write_pgm
from .quickdraw import (
    Dataset,
    TEST_ONLY_CATEGORIES,
    TRAIN_CATEGORIES,
    ingest,
)
from .rewards import pixel_difference
from .trainer import ReferenceItem, pretrain, references_from_dataset, train


def _add_common(parser):
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", required=True, help="output file or directory")


def _resolve_cfg(args):
    cfg = load_config(args.config) if args.config else TrainerConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg.validate()


def _out_path(out, default_name):
    """`out` may name the file directly or a directory to place it in."""
    if out.endswith((".ckpt", ".json", ".jsonl", ".pgm", ".md", ".csv")):
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return out
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, default_name)


def _grid_cfg(args):
    return GridmapConfig(
        l1=args.l1, l2=args.l2, origin=(args.origin_x, args.origin_y), z_canvas=args.z_canvas
    )


def _add_grid_args(parser):
    parser.add_argument("--l1", type=float, default=0.005, help="cell edge in metres")
    parser.add_argument("--l2", type=float, default=0.020, help="pen-lift z offset in metres")
    parser.add_argument("--origin-x", type=float, default=0.0)
    parser.add_argument("--origin-y", type=float, default=0.0)
    parser.add_argument("--z-canvas", type=float, default=0.0)


def _reference_from_args(args, dataset_required=False):
    """A (ReferenceItem, record-or-None) pair from --reference or --data."""
    if getattr(args, "reference", None):
        canvas = read_pgm(args.reference)
        return ReferenceItem(category=args.category or "", canvas=canvas), None
    if not getattr(args, "data", None):
        raise ConfigurationError("need either --reference or --data with --category")
    if not args.category:
        raise ConfigurationError("--category is required with --data")
    dataset = Dataset(args.data)
    records = dataset.records(args.category, args.split)
    if not records:
        raise ConfigurationError(f"no {args.split} records for category {args.category!r}")
    index = getattr(args, "index", 0) or 0
    if not 0 <= index < len(records):
        raise ConfigurationError(f"--index {index} outside [0, {len(records)})")
    record = records[index]
    return ReferenceItem(category=args.category, canvas=dataset.canvas(record)), record


# -- command implementations -------------------------------------------------


def cmd_ingest(args):
    cfg = _resolve_cfg(args)
    categories = args.categories or list(TRAIN_CATEGORIES + TEST_ONLY_CATEGORIES)
    manifest = ingest(
        args.input,
        categories,
        args.train_size,
        cfg.seed,
        args.out,
        recognized_only=not args.include_unrecognized,
        canvas_size=cfg.canvas_size,
    )
    print(json.dumps({"manifest": manifest, "categories": categories}))
    return 0


def cmd_pretrain(args):
    cfg = _resolve_cfg(args)
    out = _out_path(args.out, "pretrain.ckpt")
    log = args.log or os.path.join(os.path.dirname(out) or ".", "pretrain_log.jsonl")
    result = pretrain(cfg, out, log_path=log)
    last = result.history[-1] if result.history else None
    print(json.dumps({"checkpoint": result.checkpoint_path, "log": log, "last": last}))
    return 0


def cmd_train_classifier(args):
    cfg = _resolve_cfg(args)
    out = _out_path(args.out, "classifier.ckpt")
    log = args.log or os.path.join(os.path.dirname(out) or ".", "classifier_log.jsonl")
    dataset = Dataset(args.data)
    categories = args.categories or [c for c in TRAIN_CATEGORIES if c in dataset.categories]
    path, history = train_classifier(
        dataset,
        out,
        seed=cfg.seed,
        epochs=args.epochs,
        lr=args.lr,
        batch=cfg.batch,
        categories=categories,
        log_path=log,
    )
    print(json.dumps({"checkpoint": path, "log": log, "last": history[-1] if history else None}))
    return 0


def cmd_train(args):
    cfg = _resolve_cfg(args)
    out = _out_path(args.out, "qnet.ckpt")
    log = args.log or os.path.join(os.path.dirname(out) or ".", "train_log.jsonl")
    classifier = SketchClassifier.load(args.classifier) if args.classifier else None
    if args.data:
        dataset = Dataset(args.data)
        references = references_from_dataset(dataset, classifier=classifier, categories=args.categories)
    else:
        item, _ = _reference_from_args(args)
        if classifier is not None:
            item.theta_index = classifier.category_index(item.category)
        references = [item]
    result = train(cfg, references, args.pretrained, out, classifier=classifier, log_path=log,
                   snapshot_dir=args.snapshot_dir)
    print(json.dumps({"checkpoint": result.checkpoint_path, "log": log, "episodes": len(result.episodes),
                      "steps": result.steps}))
    return 0


def cmd_draw(args):
    cfg = _resolve_cfg(args)
    classifier = SketchClassifier.load(args.classifier) if args.classifier else None
    item, record = _reference_from_args(args)
    reference = record if record is not None else item.canvas
    os.makedirs(args.out, exist_ok=True)
    rec, canvas, rep = run_draw(
        args.checkpoint,
        reference,
        reward_cfg=cfg.reward,
        category=item.category or None,
        classifier=classifier,
        out_dir=args.out,
        grid_cfg=_grid_cfg(args),
    )
    print(json.dumps({"out": args.out, "report": asdict(rep)}))
    return 0


def cmd_export_traj(args):
    with open(args.episode, "r", encoding="utf-8") as fh:
        episode = json.load(fh)
    trace = EpisodeTrace(
        m=int(episode["m"]),
        start_x=int(episode["start_x"]),
        start_y=int(episode["start_y"]),
        steps=[
            TraceStep(action=s["action"], dx=int(s["dx"]), dy=int(s["dy"]), pen_down=bool(s["pen_down"]))
            for s in episode["steps"]
        ],
    )
    out = _out_path(args.out, "trajectory.jsonl")
    export_trajectory(trace, _grid_cfg(args), out)
    print(json.dumps({"trajectory": out, "waypoints": len(trace.steps) + 1}))
    return 0


def cmd_simulate_exec(args):
    header, waypoints = read_trajectory(args.traj)
    canvas = simulate_execution(header, waypoints)
    out = _out_path(args.out, "executed.pgm")
    write_pgm(canvas, out)
    result = {"canvas": out, "ink": int(canvas.sum())}
    if args.expect:
        expected = read_pgm(args.expect)
        result["differing_pixels"] = pixel_difference(canvas, as_canvas(expected))
        if result["differing_pixels"] != 0:
            print(json.dumps(result))
            _fail(ConfigurationError(f"executed canvas differs from {args.expect} "
                                     f"in {result['differing_pixels']} pixels"))
            return 2
    print(json.dumps(result))
    return 0


def cmd_eval(args):
    cfg = _resolve_cfg(args)
    dataset = Dataset(args.data)
    classifier = SketchClassifier.load(args.classifier) if args.classifier else None
    categories = args.categories or dataset.categories
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for category in categories:
        records = dataset.records(category, args.split)[: args.limit]
        for record in records:
            _, _, rep = run_draw(
                args.checkpoint, record, reward_cfg=cfg.reward, category=category, classifier=classifier
            )
            reports.append(rep)
    episodes_path = os.path.join(args.out, "episodes.jsonl")
    with open(episodes_path, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(json.dumps(asdict(rep), sort_keys=True) + "\n")
    print(json.dumps({"episodes": episodes_path, "count": len(reports)}))
    return 0


def cmd_report(args):
    with open(args.episodes, "r", encoding="utf-8") as fh:
        episodes = [json.loads(line) for line in fh if line.strip()]
    dataset = Dataset(args.data) if args.data else None
    markdown, csv_text = build_report(episodes, dataset=dataset, split=args.split)
    os.makedirs(args.out, exist_ok=True)
    md_path = os.path.join(args.out, "report.md")
    csv_path = os.path.join(args.out, "report.csv")
    with open(md_path, "w", encoding="utf-8") as fh:
        fh.write(markdown)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    print(markdown)
    return 0


def cmd_emit_config(args):
    cfg = _resolve_cfg(args)
    out = _out_path(args.out, "config.json")
    save_config(cfg, out)
    print(json.dumps({"config": out}))
    return 0


# -- wiring -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="sketchrl", description="Sketch-drawing agent toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="split raw ndjson category files into a dataset directory")
    _add_common(p)
    p.add_argument("--input", required=True, help="directory of <category>.ndjson[.gz] files")
    p.add_argument("--train-size", type=int, required=True, help="training records per category")
    p.add_argument("--categories", nargs="*", help="category names (default: full roster)")
    p.add_argument("--include-unrecognized", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pretrain", help="supervised pre-training on random-stroke episodes")
    _add_common(p)
    p.add_argument("--log", help="JSONL loss/accuracy log path")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train-classifier", help="train the category classifier")
    _add_common(p)
    p.add_argument("--data", required=True, help="dataset manifest.json")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--categories", nargs="*")
    p.add_argument("--log")
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("train", help="Double Q-learning over the drawing environment")
    _add_common(p)
    p.add_argument("--pretrained", required=True, help="pre-trained Q-net checkpoint")
    p.add_argument("--classifier", help="classifier checkpoint for the confidence reward")
    p.add_argument("--data", help="dataset manifest.json")
    p.add_argument("--categories", nargs="*")
    p.add_argument("--reference", help="single reference canvas (PGM) instead of a dataset")
    p.add_argument("--category", help="category label for --reference")
    p.add_argument("--split", default="train")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--snapshot-dir")
    p.add_argument("--log")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("draw", help="greedy episode with a trained agent")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--classifier")
    p.add_argument("--reference", help="reference canvas (PGM)")
    p.add_argument("--data", help="dataset manifest.json")
    p.add_argument("--category")
    p.add_argument("--split", default="test")
    p.add_argument("--index", type=int, default=0)
    _add_grid_args(p)
    p.set_defaults(func=cmd_draw)

    p = sub.add_parser("export-traj", help="episode JSON to cartesian waypoint file")
    _add_common(p)
    p.add_argument("--episode", required=True, help="episode.json from draw")
    _add_grid_args(p)
    p.set_defaults(func=cmd_export_traj)

    p = sub.add_parser("simulate-exec", help="replay a waypoint file onto a canvas")
    _add_common(p)
    p.add_argument("--traj", required=True, help="trajectory.jsonl")
    p.add_argument("--expect", help="PGM the executed canvas must match exactly")
    p.set_defaults(func=cmd_simulate_exec)

    p = sub.add_parser("eval", help="greedy episodes over a dataset split")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--categories", nargs="*")
    p.add_argument("--limit", type=int, default=10, help="max sketches per category")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="result table from eval episodes")
    _add_common(p)
    p.add_argument("--episodes", required=True, help="episodes.jsonl from eval")
    p.add_argument("--data", help="dataset manifest.json for category averages")
    p.add_argument("--split", default="train")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("emit-config", help="write the default (or merged) config as flat JSON")
    _add_common(p)
    p.set_defaults(func=cmd_emit_config)

    return parser


def _fail(exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SketchRLError as exc:
        _fail(exc)
        return 2
    except Exception as exc:  # unexpected: still machine-readable on stderr
        sys.stderr.write(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc), "traceback": traceback.format_exc()}
            )
            + "\n"
        )
        return 3


if __name__ == "__main__":
    sys.exit(main())
