"""Command-line surface: validate, loss, infer, gen-data, train-demo.

Every command prints a JSON report to stdout, exits 0 on success, and on
failure writes a single machine-parseable ``error: <kind>: <message>`` line
to stderr with a nonzero exit code.  ``HIERLOGIC_LOG`` (debug/info/warning/
error) controls diagnostic logging; all randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time

import numpy as np

from . import _kernels, fixtures, formats
from .fuzzy import FuzzyConfig
from .hierarchy import Hierarchy, HierarchyError, load_hierarchy
from .inference import (
    E_VARIANTS,
    ENGINES,
    InferenceConfig,
    decode_path,
    run_inference,
)
from .metrics import evaluate, violation_rate
from .rules import LOSS_NAMES, LabelMap, ScoreMap, derive_rules, total_loss
from .trainer import (
    STANDARD_SUITE_HIERARCHY,
    DatasetSpec,
    LinearLogicModel,
    TrainConfig,
    TrainingDiverged,
    generate_corrupted_scores,
    generate_dataset,
    standard_suite_config,
    standard_suite_spec,
    train,
)

log = logging.getLogger("hierlogic.cli")

_CLI_ERRORS = (
    HierarchyError,
    formats.FormatError,
    TrainingDiverged,
    ValueError,
    OSError,
)


@dataclasses.dataclass
class RunConfig:
    """Bundled settings for a run, loadable from a JSON file.

    Command-line flags override whatever the file provides.  The config
    round-trips: ``RunConfig.from_dict(cfg.to_dict())`` reproduces ``cfg``.
    """

    hierarchy: str | None = None
    scores: str | None = None
    labels: str | None = None
    out: str | None = None
    fmt: str = "binary"
    seed: int = 0
    threads: int = 1
    verbosity: str = "warning"
    fuzzy: FuzzyConfig = dataclasses.field(default_factory=FuzzyConfig)
    inference: InferenceConfig = dataclasses.field(default_factory=InferenceConfig)
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    dataset: DatasetSpec = dataclasses.field(default_factory=DatasetSpec)

    def to_dict(self) -> dict:
        doc = {
            "hierarchy": self.hierarchy,
            "scores": self.scores,
            "labels": self.labels,
            "out": self.out,
            "fmt": self.fmt,
            "seed": self.seed,
            "threads": self.threads,
            "verbosity": self.verbosity,
            "fuzzy": dataclasses.asdict(self.fuzzy),
            "inference": dataclasses.asdict(self.inference),
            "train": dataclasses.asdict(self.train),
            "dataset": {
                k: v
                for k, v in dataclasses.asdict(self.dataset).items()
                if k != "prototypes"
            },
        }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "fuzzy" in kwargs:
            kwargs["fuzzy"] = FuzzyConfig(**kwargs["fuzzy"])
        if "inference" in kwargs:
            kwargs["inference"] = InferenceConfig(**kwargs["inference"])
        if "train" in kwargs:
            kwargs["train"] = TrainConfig(**kwargs["train"])
        if "dataset" in kwargs:
            kwargs["dataset"] = DatasetSpec(**kwargs["dataset"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _setup_logging() -> None:
    level_name = os.environ.get("HIERLOGIC_LOG", "warning").strip().lower()
    level = getattr(logging, level_name.upper(), None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="%(name)s: %(message)s")


def _round_floats(obj, ndigits: int = 10):
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v, ndigits) for v in obj]
    return obj


def _emit(doc: dict, out_path: str | None = None) -> None:
    text = json.dumps(_round_floats(doc), indent=2)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _load_hierarchy_arg(spec: str) -> Hierarchy:
    """Accept either a file path or the name of a bundled fixture."""
    if spec in fixtures.FIXTURE_NAMES and not os.path.exists(spec):
        return fixtures.load_fixture(spec)
    return load_hierarchy(spec)


def _read_scores(path: str, fmt: str, h: Hierarchy) -> tuple[ScoreMap, int, int]:
    data, height, width = formats.load_scores(path, fmt)
    if data.shape[0] != h.size:
        raise formats.FormatError(
            f"score file has {data.shape[0]} nodes, hierarchy has {h.size}"
        )
    return ScoreMap(np.asarray(data, dtype=np.float64), h), height, width


def _read_labels(path: str, fmt: str, h: Hierarchy) -> tuple[LabelMap, int, int]:
    ids, height, width = formats.load_labels(path, fmt)
    return LabelMap(np.asarray(ids, dtype=np.int64), h), height, width


def cmd_validate(args) -> int:
    h = _load_hierarchy_arg(args.hierarchy)
    doc = {
        "name": h.name,
        "num_nodes": h.size,
        "num_levels": h.num_levels,
        "level_sizes_root_to_leaf": [int(x) for x in h.level_sizes[::-1]],
        "num_leaf_paths": h.num_leaves,
        "backend": _kernels.active_backend_name(),
    }
    _emit(doc, args.out)
    return 0


def cmd_loss(args) -> int:
    h = _load_hierarchy_arg(args.hierarchy)
    s, _, _ = _read_scores(args.scores, args.format, h)
    labels, _, _ = _read_labels(args.labels, args.format, h)
    include = _parse_losses(args.losses)
    rules = derive_rules(h, args.peer_scope)
    cfg = FuzzyConfig(q=args.q, eps=args.eps)
    report = total_loss(
        s,
        labels,
        rules,
        cfg,
        alpha=args.alpha,
        include=include,
        bce_reduction=args.bce_reduction,
        threads=args.threads,
    )
    doc = {
        "hierarchy": h.name,
        "pixel_count": s.num_pixels,
        "q": args.q,
        "include": list(include),
        "peer_scope": args.peer_scope,
        **report.to_dict(),
    }
    _emit(doc, args.out)
    return 0


def cmd_infer(args) -> int:
    h = _load_hierarchy_arg(args.hierarchy)
    s, height, width = _read_scores(args.scores, args.format, h)
    cfg = InferenceConfig(
        iterations=args.iters, engine=args.engine, e_variant=args.e_variant
    )
    t0 = time.perf_counter()
    post = run_inference(s, h, cfg)
    pred = decode_path(post, h)
    seconds = time.perf_counter() - t0
    doc = {
        "hierarchy": h.name,
        "iterations": args.iters,
        "engine": args.engine,
        "e_variant": args.e_variant,
        "pixel_count": s.num_pixels,
        "violation_rate_pre_decode": violation_rate(post, h),
        "path_score_mean": float(pred.score.mean()),
        "seconds": seconds,
        "miou_per_level": None,
        "leaf_accuracy": None,
    }
    if args.labels:
        gt, _, _ = _read_labels(args.labels, args.format, h)
        ev = evaluate(pred, gt, h, scores=post)
        doc["miou_per_level"] = [round(x, 2) for x in ev.miou_per_level]
        doc["leaf_accuracy"] = float(
            (pred.leaf_ids == gt.leaf_ids).mean()
        )
    if args.out:
        formats.save_labels(args.out, pred.leaf_ids, height, width, args.format)
    _emit(doc, args.report)
    return 0


def cmd_gen_data(args) -> int:
    h = _load_hierarchy_arg(args.hierarchy)
    spec = DatasetSpec(
        seed=args.seed,
        height=args.height,
        width=args.width,
        feature_dim=1,
        noise_sigma=0.0,
        num_blobs=args.blobs,
    )
    data = generate_dataset(h, spec)
    scores = generate_corrupted_scores(
        data.labels, h, flip_rate=args.flip_rate, seed=args.seed + 1
    )
    formats.save_scores(
        args.out_scores, scores.values, args.height, args.width, args.format
    )
    formats.save_labels(
        args.out_labels, data.labels.leaf_ids, args.height, args.width, args.format
    )
    doc = {
        "hierarchy": h.name,
        "height": args.height,
        "width": args.width,
        "flip_rate": args.flip_rate,
        "seed": args.seed,
        "scores": args.out_scores,
        "labels": args.out_labels,
        "violation_rate": violation_rate(scores, h),
    }
    _emit(doc, args.out)
    return 0


def cmd_train_demo(args) -> int:
    if args.config:
        run = RunConfig.load(args.config)
        dataset = run.dataset
        train_cfg = run.train
    else:
        # No config file: fall back to the pinned standard suite.
        run = RunConfig()
        dataset = standard_suite_spec()
        train_cfg = standard_suite_config()

    hierarchy_spec = args.hierarchy or run.hierarchy or STANDARD_SUITE_HIERARCHY
    h = _load_hierarchy_arg(hierarchy_spec)
    overrides = {
        "seed": args.seed,
        "height": args.height,
        "width": args.width,
        "feature_dim": args.feature_dim,
        "noise_sigma": args.sigma,
        "num_blobs": args.blobs,
    }
    dataset = dataclasses.replace(
        dataset, **{k: v for k, v in overrides.items() if v is not None}
    )
    t_overrides = {
        "alpha": args.alpha,
        "q": args.q,
        "lr": args.lr,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "seed": args.seed,
        "threads": args.threads,
    }
    train_cfg = dataclasses.replace(
        train_cfg, **{k: v for k, v in t_overrides.items() if v is not None}
    )
    if args.losses is not None:
        include = _parse_losses(args.losses)
        train_cfg = dataclasses.replace(
            train_cfg,
            use_c="c" in include,
            use_d="d" in include,
            use_e="e" in include,
        )

    data = generate_dataset(h, dataset)
    model = LinearLogicModel(h, dataset.feature_dim, seed=train_cfg.seed)
    t0 = time.perf_counter()
    model, history = train(model, data, train_cfg)
    seconds = time.perf_counter() - t0

    if args.history_out:
        with open(args.history_out, "w", encoding="utf-8") as fh:
            for rec in history:
                fh.write(json.dumps(_round_floats(rec)) + "\n")

    doc = {
        "hierarchy": h.name,
        "epochs": train_cfg.epochs,
        "alpha": train_cfg.alpha,
        "q": train_cfg.q,
        "losses": "".join(train_cfg.include) or "none",
        "seed": train_cfg.seed,
        "seconds": seconds,
        "first_epoch": history[0],
        "final_epoch": history[-1],
    }
    _emit(doc, args.out)
    return 0


def _parse_losses(text: str) -> tuple[str, ...]:
    """Parse a loss toggle spec like 'c,d,e', 'cd', or 'none'."""
    cleaned = text.strip().lower()
    if cleaned in ("none", ""):
        return ()
    parts = cleaned.split(",") if "," in cleaned else list(cleaned)
    include = tuple(dict.fromkeys(p.strip() for p in parts if p.strip()))
    unknown = set(include) - set(LOSS_NAMES)
    if unknown:
        raise ValueError(f"unknown losses {sorted(unknown)}; expected among c,d,e")
    return include


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="also write the JSON report to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hierlogic",
        description="Hierarchy-consistent losses, inference, and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a hierarchy file")
    p.add_argument("--hierarchy", required=True, help="JSON file or fixture name")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("loss", help="evaluate the combined loss on score/label files")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--eps", type=float, default=1e-7)
    p.add_argument("--losses", default="c,d,e", help="relational losses to include")
    p.add_argument("--peer-scope", choices=("level", "siblings"), default="level")
    p.add_argument("--bce-reduction", choices=("mean", "sum"), default="mean")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=formats.FORMATS, default="binary")
    _add_common(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("infer", help="run message passing and decode paths")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", help="optional ground truth for evaluation")
    p.add_argument("--iters", type=int, default=2)
    p.add_argument("--engine", choices=ENGINES, default="matrix")
    p.add_argument("--e-variant", choices=E_VARIANTS, default="eq17")
    p.add_argument("--format", choices=formats.FORMATS, default="binary")
    p.add_argument("--out", help="write decoded leaf labels here")
    p.add_argument("--report", help="also write the JSON report to this file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("gen-data", help="generate a corrupted synthetic score map")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--out-scores", required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--blobs", type=int, default=40)
    p.add_argument("--flip-rate", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=formats.FORMATS, default="binary")
    _add_common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-demo", help="train the synthetic demo model")
    p.add_argument("--hierarchy", help="JSON file or fixture name")
    p.add_argument("--config", help="RunConfig JSON file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--losses", help="relational losses to include, e.g. c,d,e or none")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--feature-dim", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--blobs", type=int)
    p.add_argument("--history-out", help="write per-epoch JSON lines here")
    _add_common(p)
    p.set_defaults(func=cmd_train_demo)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CLI_ERRORS as exc:
        kind = type(exc).__name__
        message = " ".join(str(exc).split())
        print(f"error: {kind}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
