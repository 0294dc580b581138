"""Command-line entry point.

Subcommands::

    anli-extract extract      --job job.json --out store.emb
    anli-extract verify-store --store store.emb --instances data.jsonl

Exit codes: 0 success, 1 I/O failure, 2 invalid job/data/store (a
verify-store run that finds violations also exits 2).
"""

from __future__ import annotations

import argparse
import sys

from .dataset import ROLE_NAMES
from .errors import ExtractorError
from .extract import run_extraction, verify_store
from .job import load_job
from .storefmt import read_store

EXIT_OK = 0
EXIT_IO = 1
EXIT_DATA = 2


def cmd_extract(args) -> int:
    job = load_job(args.job)
    summary = run_extraction(job, args.out)
    print(
        f"{summary['model_id']}: wrote {summary['records']} {summary['kind']} "
        f"records (dim {summary['dim']}) for {summary['instances']} instances "
        f"to {args.out}"
    )
    if summary["truncated"]:
        print(f"note: {summary['truncated']} texts were truncated to the length limit")
    return EXIT_OK


def cmd_verify_store(args) -> int:
    store = read_store(args.store)
    print(
        f"{args.store}: model_id={store.model_id!r} kind={store.kind} "
        f"dim={store.dim} records={len(store.records)} "
        f"instances={len({i for i, _ in store.records})}"
    )
    for key in sorted(store.extra):
        print(f"  header {key} = {store.extra[key]!r}")
    violations = verify_store(
        args.store, args.instances, roles=args.roles, expect_dim=args.expect_dim
    )
    if violations:
        for violation in violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_DATA
    print("OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anli-extract",
        description="Export frozen-encoder embeddings to binary stores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run one extraction job")
    p.add_argument("--job", required=True, help="job JSON file")
    p.add_argument("--out", required=True, help="output store path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify-store", help="check a store against its dataset")
    p.add_argument("--store", required=True)
    p.add_argument("--instances", required=True, help="instance JSONL the store covers")
    p.add_argument("--roles", nargs="*", choices=ROLE_NAMES, default=None,
                   help="roles every instance must carry (default: roles present)")
    p.add_argument("--expect-dim", type=int, default=None,
                   help="fail unless the header dim matches")
    p.set_defaults(func=cmd_verify_store)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
