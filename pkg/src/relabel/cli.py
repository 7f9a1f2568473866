"""Command-line entry point.

Subcommands: plan-prompts, ingest, run, agree, analyze, simulate, review,
bench. Every pipeline parameter is a named key in one JSON config file;
see the README for the schema and file formats.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import kernels
from .errors import RenovationError

__all__ = ["main"]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RenovationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relabel",
        description="Detect noisy and missing labels in classification test sets "
        "by aggregating multi-method predictions into soft labels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan-prompts", help="plan label batches and render prompt templates")
    p.add_argument("--vocab", required=True, help="vocabulary JSON file")
    p.add_argument("--kind", choices=["binary", "direct", "batched"], default="batched")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="plan JSON output path")
    p.add_argument("--preview", action="store_true", help="print the first rendered prompt")
    p.set_defaults(func=cmd_plan_prompts)

    p = sub.add_parser("ingest", help="parse, sanitize, and merge prediction files")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", default=None, help="write the merged matrix JSONL here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="execute the full renovation pipeline")
    p.add_argument("--config", required=True, help="run config JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("agree", help="agreement rate against human annotation records")
    p.add_argument("--mturk", required=True, help="annotation JSONL file")
    p.add_argument("--vocab", required=True, help="vocabulary JSON file")
    p.add_argument("--soft-labels", default=None, help="soft-label JSONL from a run")
    p.add_argument("--predictions", default=None, help="single-method predictions JSONL")
    p.add_argument("--method", default=None, help="method id inside --predictions")
    p.add_argument("--out", default=None, help="write the result JSON here")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("analyze", help="label distributions and pairwise confusion grids")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--distribution", action="append", default=[], metavar="METHOD")
    p.add_argument(
        "--confusion",
        action="append",
        default=[],
        nargs=2,
        metavar=("METHOD_A", "METHOD_B"),
    )
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="synthetic-recovery experiment with planted truth")
    p.add_argument("--spec", default=None, help="synthetic spec JSON (default: built-in spec)")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (built-in spec only)")
    p.add_argument("--out", default=None, help="write the recovery report JSON here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("review", help="serve the review queue API and UI")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--frontend", default=None, help="directory with built UI assets")
    p.set_defaults(func=cmd_review)

    p = sub.add_parser("bench", help="compare the compiled kernel lane with the pure-Python one")
    p.add_argument("--images", type=int, default=20000)
    p.add_argument("--labels", type=int, default=100)
    p.add_argument("--methods", type=int, default=7)
    p.add_argument("--mean-set-size", type=float, default=3.0)
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    return parser


def cmd_plan_prompts(args) -> int:
    from .labelspace import LabelVocabulary
    from .promptplan import DEFAULT_BATCH_SIZES, build_plan, render_prompt

    vocab = LabelVocabulary.from_json(args.vocab)
    batch_size = args.batch_size
    if batch_size is None and args.kind == "batched":
        batch_size = DEFAULT_BATCH_SIZES.get(vocab.dataset_id)
        if batch_size is not None:
            print(f"using the published batch size for {vocab.dataset_id}: {batch_size}")
    plan = build_plan(vocab, args.kind, batch_size=batch_size, seed=args.seed)
    plan.to_json(args.out)
    print(
        f"{plan.template_kind} plan for {plan.dataset_id}: "
        f"{len(plan.batches)} batches, {plan.prompts_per_image} prompts/image -> {args.out}"
    )
    if args.preview:
        print(render_prompt(plan, 0, "<image_id>"))
    return 0


def cmd_ingest(args) -> int:
    from .runner import ingest, load_config

    config = load_config(args.config)
    vocab, matrix, summary = ingest(config)
    total_errors = sum(len(s["line_errors"]) for s in summary)
    print(
        f"ingested {len(matrix.images)} images x {len(matrix.methods)} methods "
        f"({total_errors} malformed lines)"
    )
    for s in summary:
        print(
            f"  {s['method']:>12}: {s['records']} records, "
            f"{s['rejected_out_of_vocab']} out-of-vocab, "
            f"{s['duplicates_removed']} duplicates, "
            f"{s['null_responses']} null responses"
        )
    if args.out:
        matrix.write_jsonl(args.out)
        print(f"matrix -> {args.out}")
    return 0


def cmd_run(args) -> int:
    from .runner import load_config, run

    config = load_config(args.config)
    state = run(config)
    report = state.report
    print(f"run complete -> {config.output_dir}")
    print(
        f"  images: {report.image_count}  noisy: {report.noisy_label_count}  "
        f"missing: {report.missing_label_count}  unresolved: "
        f"{report.diagnosis_counts['unresolved']}"
    )
    print(f"  full score: {report.full_score:.3f}  cutoff: {report.cutoff:.4f}  top-k: {report.top_k}")
    return 0


def cmd_agree(args) -> int:
    from .evaluation import agreement_rate, consensus_case, load_mturk_records
    from .labelspace import LabelVocabulary

    vocab = LabelVocabulary.from_json(args.vocab)
    records = load_mturk_records(args.mturk, vocab)
    predictions: dict[str, frozenset[str]] = {}
    if args.soft_labels:
        for line in Path(args.soft_labels).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            predictions[obj["image_id"]] = frozenset(
                entry["label"] for entry in obj["labels"]
            )
    elif args.predictions and args.method:
        from .ingestion import parse_predictions

        with open(args.predictions, encoding="utf-8") as fh:
            result = parse_predictions(fh, vocab)
        for rec in result.records:
            if rec.method_id == args.method:
                predictions[rec.image_id] = frozenset(rec.labels)
    else:
        print("error: provide --soft-labels or (--predictions and --method)", file=sys.stderr)
        return 2
    rate = agreement_rate(predictions, records)
    cases: dict[str, int] = {}
    for r in records:
        cases[consensus_case(r)] = cases.get(consensus_case(r), 0) + 1
    payload = {"agreement_rate": rate, "records": len(records), "consensus_cases": cases}
    print(json.dumps(payload, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_analyze(args) -> int:
    from .evaluation import label_distribution, pairwise_confusion, write_distribution_csv
    from .runner import ingest, load_config

    config = load_config(args.config)
    _vocab, matrix, _summary = ingest(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for method in args.distribution:
        counts = label_distribution(matrix, method)
        target = out_dir / f"distribution_{method}.csv"
        write_distribution_csv(counts, method, target)
        print(f"distribution {method} -> {target}")
    for method_a, method_b in args.confusion:
        grid = pairwise_confusion(matrix, method_a, method_b)
        target = out_dir / f"confusion_{method_a}_vs_{method_b}.csv"
        grid.write_csv(target)
        print(f"confusion {method_a}/{method_b} ({grid.total()} images) -> {target}")
    return 0


def cmd_simulate(args) -> int:
    from .synthetic import SyntheticSpec, recovery_experiment, run_recovery

    if args.spec:
        reports = [run_recovery(SyntheticSpec.from_json(args.spec))]
    else:
        reports = recovery_experiment(n_seeds=args.seeds)
    wins = sum(1 for r in reports if r.ensemble_beats_best)
    rhos = [r.spearman for r in reports if r.spearman is not None]
    summary = {
        "seeds": len(reports),
        "mean_spearman": sum(rhos) / len(rhos) if rhos else None,
        "ensemble_beats_best": f"{wins}/{len(reports)}",
        "reports": [r.to_dict() for r in reports],
    }
    print(
        f"seeds: {summary['seeds']}  mean spearman: "
        f"{summary['mean_spearman'] if summary['mean_spearman'] is None else round(summary['mean_spearman'], 3)}  "
        f"ensemble wins: {summary['ensemble_beats_best']}"
    )
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_review(args) -> int:
    from .review import serve_review
    from .runner import load_config

    config = load_config(args.config)
    frontend = Path(args.frontend) if args.frontend else _default_frontend()
    server = serve_review(config, args.port, frontend_dir=frontend, host=args.host)
    print(f"review service on http://{args.host}:{args.port}/ (Ctrl-C to stop)")
    if frontend is None:
        print("  (no UI bundle found; JSON API only)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _default_frontend():
    bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    return bundled if bundled.is_dir() else None


def cmd_bench(args) -> int:
    from .bench import format_benchmark, run_benchmark

    print(f"active kernel lane: {kernels.backend()}")
    results = run_benchmark(
        n_images=args.images,
        n_labels=args.labels,
        n_methods=args.methods,
        mean_set_size=args.mean_set_size,
        repeats=args.repeats,
    )
    print(format_benchmark(results))
    return 0


if __name__ == "__main__":
    sys.exit(main())
