"""Command-line entry point for plan execution."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .endpoints import EndpointProfile
from .executor import execute_plan, load_plan, write_records


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vlm-adapter",
        description="Execute a prompt plan against a model endpoint (or the "
        "bundled mock) and write predictions JSONL.",
    )
    parser.add_argument("--plan", required=True, help="plan JSON from the pipeline's planner")
    parser.add_argument("--images", required=True, help="newline-delimited image_id file")
    parser.add_argument(
        "--endpoint",
        required=True,
        help="mock:<canned.json> or an http(s) URL accepting {prompt, image} POSTs",
    )
    parser.add_argument("--method", required=True, help="method id stamped on every record")
    parser.add_argument("--out", required=True, help="predictions JSONL output path")
    parser.add_argument("--credentials-env", default=None, help="env var holding the API key")
    parser.add_argument("--rate-limit", type=float, default=None, help="max requests/second")
    parser.add_argument("--max-retries", type=int, default=2)
    parser.add_argument("--parallelism", type=int, default=4)
    args = parser.parse_args(argv)

    plan = load_plan(args.plan)
    image_ids = [
        line.strip()
        for line in Path(args.images).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    profile = EndpointProfile(
        endpoint=args.endpoint,
        credentials_env=args.credentials_env,
        rate_limit_per_second=args.rate_limit,
        max_retries=args.max_retries,
        parallelism=args.parallelism,
    )
    records = execute_plan(plan, image_ids, profile, args.method)
    write_records(records, args.out)
    answered = sum(1 for r in records if r["labels"])
    print(
        f"{len(records)} records ({answered} with answers, "
        f"{len(records) - answered} empty) -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
