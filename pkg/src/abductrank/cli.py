"""Command-line entry point wiring the whole pipeline.

Subcommands::

    abductrank predict-sim --embeddings S.emb --labels L.lst --out R.json
    abductrank train-head  --train-embeddings T.emb --train-labels TL.lst
                           --dev-embeddings D.emb --dev-labels DL.lst
                           --lr 3e-5 --batch-size 64 --out HEAD.json
    abductrank grid        --manifest M.json --out DIR/
    abductrank correlate   --runs RUNS.csv --out REPORT.json

Exit codes: 0 success, 1 I/O failure, 2 data validation failure,
3 statistical precondition failure. Every output file is byte-identical
across re-runs with the same inputs and seed; measured wall-clock fields
are the one exception, and ``--no-timing`` writes them as 0.0 for fully
reproducible artifacts. ABDUCT_RANK_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import jsonutil
from .classifier import TrainConfig, evaluate_clf, save_head, train_head
from .data import load_labels, read_embedding_store
from .errors import DataError, DomainError, StatsError
from .similarity import evaluate_sim
from .stats import correlate_runs, read_runs_csv, write_runs_csv, ModelRun

EXIT_OK = 0
EXIT_IO = 1
EXIT_DATA = 2
EXIT_STATS = 3

SEED_ENV_VAR = "ABDUCT_RANK_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise DataError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _load_store_and_labels(store_path, labels_path):
    store = read_embedding_store(store_path)
    labels = load_labels(labels_path)
    n_store = len(store.instance_indices())
    if len(labels) != n_store:
        raise DataError(
            f"label count {len(labels)} does not match store instance count {n_store}"
        )
    return store, labels


def cmd_predict_sim(args) -> int:
    store, labels = _load_store_and_labels(args.embeddings, args.labels)
    result = evaluate_sim(store, labels)
    if args.no_timing:
        result.wall_seconds = 0.0
    jsonutil.dump(result.to_record(store.model_id, "similarity"), args.out)
    print(
        f"{store.model_id}: similarity accuracy {result.accuracy:.4f} "
        f"over {result.n} instances"
    )
    return EXIT_OK


def cmd_train_head(args) -> int:
    train_store, train_labels = _load_store_and_labels(args.train_embeddings, args.train_labels)
    dev_store, dev_labels = _load_store_and_labels(args.dev_embeddings, args.dev_labels)
    if dev_store.dim != train_store.dim:
        raise DataError(
            f"dev store dim {dev_store.dim} does not match train store dim {train_store.dim}"
        )
    cfg = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        weight_decay=args.weight_decay,
        seed=args.seed if args.seed is not None else _default_seed(),
    )
    head, history = train_head(train_store, train_labels, cfg)
    result = evaluate_clf(head, dev_store, dev_labels)
    wall = history.wall_seconds + result.wall_seconds
    result.wall_seconds = 0.0 if args.no_timing else wall

    save_head(args.out, head, train_store.model_id, cfg, history)
    result_path = args.result_out or _derive_result_path(args.out)
    jsonutil.dump(result.to_record(train_store.model_id, "classification"), result_path)
    print(
        f"{train_store.model_id}: classification accuracy {result.accuracy:.4f} "
        f"over {result.n} dev instances (lr={cfg.learning_rate:g}, "
        f"batch={cfg.batch_size})"
    )
    return EXIT_OK


def _derive_result_path(head_out) -> Path:
    p = Path(head_out)
    return p.with_name(p.stem + ".result" + (p.suffix or ".json"))


def _slug(model_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", model_id)


def _read_manifest(path):
    try:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed manifest {path}: {exc.msg}") from exc
    if not isinstance(manifest, dict) or "models" not in manifest:
        raise DataError(f"manifest {path} must be an object with a 'models' list")
    models = manifest["models"]
    if not isinstance(models, list) or not models:
        raise DataError(f"manifest {path}: 'models' must be a non-empty list")
    defaults = manifest.get("defaults", {})
    base = Path(path).parent
    entries = []
    for k, entry in enumerate(models):
        for key in ("model_id", "train_embeddings", "train_labels",
                    "dev_embeddings", "dev_labels", "grid"):
            if key not in entry:
                raise DataError(f"manifest model #{k}: missing key {key!r}")
        grid = entry["grid"]
        if not isinstance(grid, list) or not grid:
            raise DataError(f"manifest model {entry['model_id']!r}: grid must be non-empty")
        resolved = dict(entry)
        for key in ("train_embeddings", "train_labels", "dev_embeddings", "dev_labels"):
            resolved[key] = str((base / entry[key]).resolve())
        entries.append(resolved)
    return entries, defaults


def _grid_config(point, defaults, fallback_seed: int) -> TrainConfig:
    merged = dict(defaults)
    merged.update(point)
    for key in ("learning_rate", "batch_size"):
        if key not in merged:
            raise DataError(f"grid point {point!r} missing {key!r}")
    return TrainConfig(
        learning_rate=float(merged["learning_rate"]),
        batch_size=int(merged["batch_size"]),
        epochs=int(merged.get("epochs", 3)),
        weight_decay=float(merged.get("weight_decay", 0.01)),
        seed=int(merged.get("seed", fallback_seed)),
    )


def cmd_grid(args) -> int:
    entries, defaults = _read_manifest(args.manifest)
    fallback_seed = args.seed if args.seed is not None else _default_seed()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    runs = []
    empty_models = []
    for entry in entries:
        model_id = entry["model_id"]
        train_store, train_labels = _load_store_and_labels(
            entry["train_embeddings"], entry["train_labels"]
        )
        dev_store, dev_labels = _load_store_and_labels(
            entry["dev_embeddings"], entry["dev_labels"]
        )
        sim_result = evaluate_sim(dev_store, dev_labels)

        points = []
        for point in entry["grid"]:
            # A point that fails (bad config, training error) is recorded
            # and skipped; only zero successes for a model is fatal.
            try:
                cfg = _grid_config(point, defaults, fallback_seed)
            except (DomainError, DataError) as exc:
                points.append({"config": dict(point), "status": "error", "error": str(exc)})
                continue
            record = {"config": cfg.to_record()}
            try:
                head, history = train_head(train_store, train_labels, cfg)
                clf_result = evaluate_clf(head, dev_store, dev_labels)
            except (DomainError, DataError) as exc:
                record["status"] = "error"
                record["error"] = str(exc)
            else:
                record["status"] = "ok"
                record["dev_accuracy"] = clf_result.accuracy
                record["epoch_losses"] = [float(v) for v in history.epoch_losses]
                record["train_eval_seconds"] = (
                    0.0 if args.no_timing
                    else history.wall_seconds + clf_result.wall_seconds
                )
            points.append(record)

        ok_points = [p for p in points if p["status"] == "ok"]
        detail = {
            "model_id": model_id,
            "n_dev": sim_result.n,
            "sim_accuracy_percent": sim_result.accuracy * 100.0,
            "points": points,
        }
        if not ok_points:
            empty_models.append(model_id)
            detail["selected"] = None
        else:
            best = min(
                ok_points,
                key=lambda p: (
                    -p["dev_accuracy"],
                    p["config"]["learning_rate"],
                    p["config"]["batch_size"],
                ),
            )
            detail["selected"] = best["config"]
            runs.append(
                ModelRun(
                    model_id=model_id,
                    sim_accuracy=sim_result.accuracy * 100.0,
                    clf_accuracy=best["dev_accuracy"] * 100.0,
                    sim_seconds=0.0 if args.no_timing else sim_result.wall_seconds,
                    clf_seconds=best["train_eval_seconds"],
                )
            )
        jsonutil.dump(detail, out_dir / f"{_slug(model_id)}.grid.json")
        print(f"{model_id}: {len(ok_points)}/{len(points)} grid points succeeded")

    write_runs_csv(out_dir / "runs.csv", runs)
    if empty_models:
        raise DataError(
            "no successful grid points for: " + ", ".join(empty_models)
        )
    return EXIT_OK


def cmd_correlate(args) -> int:
    runs = read_runs_csv(args.runs)
    report = correlate_runs(runs)
    jsonutil.dump(report.to_record(), args.out)

    ranked = sorted(runs, key=lambda run: -run.sim_accuracy)
    width = max(len(run.model_id) for run in ranked)
    print(f"{'rank':>4}  {'model':<{width}}  {'sim acc':>8}  {'clf acc':>8}")
    for pos, run in enumerate(ranked, start=1):
        print(
            f"{pos:>4}  {run.model_id:<{width}}  "
            f"{run.sim_accuracy:>8.2f}  {run.clf_accuracy:>8.2f}"
        )
    print(
        f"n={report.n}  pearson r={report.pearson_r:.4f} (p={report.pearson_p:.4f})  "
        f"spearman rho={report.spearman_rho:.4f} (p={report.spearman_p:.4f})  "
        f"mean speedup={report.mean_speedup:.1f}x"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abductrank",
        description=(
            "Model-selection harness for abductive NLI: a fast cosine-"
            "similarity track, a trained classification-head track, and "
            "the correlation between them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict-sim", help="evaluate the similarity track on one store")
    p.add_argument("--embeddings", required=True, help="POOLED embedding store")
    p.add_argument("--labels", required=True, help="gold label file (1/2 per line)")
    p.add_argument("--out", required=True, help="output result JSON")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_seconds as 0.0 for byte-reproducible output")
    p.set_defaults(func=cmd_predict_sim)

    p = sub.add_parser("train-head", help="train a classification head and evaluate it")
    p.add_argument("--train-embeddings", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--dev-embeddings", required=True)
    p.add_argument("--dev-labels", required=True)
    p.add_argument("--lr", type=float, required=True, help="learning rate")
    p.add_argument("--batch-size", type=int, required=True)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=None,
                   help=f"PRNG seed (default: ${SEED_ENV_VAR} or 0)")
    p.add_argument("--out", required=True, help="output head JSON")
    p.add_argument("--result-out", default=None,
                   help="output result JSON (default: derived from --out)")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_seconds as 0.0 for byte-reproducible output")
    p.set_defaults(func=cmd_train_head)

    p = sub.add_parser("grid", help="train every grid point per model, keep the best")
    p.add_argument("--manifest", required=True, help="grid manifest JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help=f"fallback seed for grid points (default: ${SEED_ENV_VAR} or 0)")
    p.add_argument("--no-timing", action="store_true",
                   help="write timing fields as 0.0 for byte-reproducible output")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("correlate", help="correlate the two tracks across models")
    p.add_argument("--runs", required=True, help="runs CSV")
    p.add_argument("--out", required=True, help="output report JSON")
    p.set_defaults(func=cmd_correlate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
