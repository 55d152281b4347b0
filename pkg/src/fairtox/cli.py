"""Command line interface.

Subcommands: prepare, synth, train, evaluate, sweep, compare-external,
report, demo-data. Exit codes: 0 success, 2 configuration error, 3 data
error, 4 training divergence, 5 partial sweep failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .corpus import load_identity_texts
from .errors import ConfigError, DataError, DivergenceError, FairtoxError
from .experiment import (
    ExperimentConfig,
    StageError,
    compare_external_scores,
    evaluate_model,
    load_external_scores,
    load_run_feature_bundle,
    load_run_model,
    prepare_data,
    run_experiment,
    run_sweep,
    stage_seed,
)
from .textproc import load_templates, load_terms, synthesize_comments, TermLexicon

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4
EXIT_PARTIAL_SWEEP = 5


def _add_common(parser: argparse.ArgumentParser, config_required: bool = True) -> None:
    parser.add_argument("--config", required=config_required, help="experiment config file (YAML)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the config output directory")
    parser.add_argument("--sample-fraction", type=float, default=None, help="override the sample fraction")
    parser.add_argument(
        "--print-effective-config",
        action="store_true",
        help="print the merged defaults+overrides config and exit",
    )


def _load_config(args) -> ExperimentConfig:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "sample_fraction", None) is not None:
        overrides["sample_fraction"] = args.sample_fraction
    config = ExperimentConfig.from_file(args.config, overrides)
    if args.print_effective_config:
        print(config.to_yaml(), end="")
        raise SystemExit(EXIT_OK)
    return config


def _cmd_prepare(args) -> int:
    config = _load_config(args)
    config.validate()
    prepared = prepare_data(config)
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "config_hash": config.config_hash(),
        "n_records": prepared.n_records,
        "corpus_stats": prepared.stats,
        "split_sizes": {
            "train": len(prepared.split.train),
            "validation": len(prepared.split.validation),
            "test": len(prepared.split.test),
        },
        "input_fingerprints": prepared.input_fingerprints,
        "split_fingerprints": prepared.split_fingerprints,
    }
    path = out_dir / "prepared.json"
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"prepared {prepared.n_records} records -> {path}")
    for name, size in payload["split_sizes"].items():
        print(f"  {name}: {size}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    config = _load_config(args)
    templates = load_templates(config.templates)
    lexicon = TermLexicon(load_terms(config.identity_terms), load_terms(config.slur_terms))
    examples = synthesize_comments(templates, lexicon, args.per_category, stage_seed(config.seed, "synth"))
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "synthetic.tsv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["example_id", "category", "label", "text"])
        for ex in examples:
            writer.writerow([ex.example_id, ex.category.value, ex.label, ex.text])
    print(f"wrote {len(examples)} synthetic examples -> {path}")
    return EXIT_OK


def _cmd_train(args) -> int:
    config = _load_config(args)
    manifest, report = run_experiment(config)
    print(f"run complete -> {config.out_dir}")
    print(f"  auc={report.auc:.4f} f1={report.f1:.4f}")
    fpr_ratio = "undefined" if report.fpr_ratio is None else f"{report.fpr_ratio:.3f}"
    print(f"  fpr identity={report.identity.fpr:.4f} non-identity={report.non_identity.fpr:.4f} ratio={fpr_ratio}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    config = _load_config(args)
    config.validate()
    run_dir = Path(args.run) if args.run else config.out_dir
    model = load_run_model(run_dir)
    bundle = load_run_feature_bundle(config, run_dir)
    prepared = prepare_data(config)
    report = evaluate_model(config, bundle, model, prepared.split.test, {"seed": config.seed})
    path = run_dir / "evaluation.json"
    path.write_text(report.to_json(), encoding="utf-8")
    print(f"evaluation -> {path}")
    print(f"  auc={report.auc:.4f} f1={report.f1:.4f}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    rows, any_failed = run_sweep(config)
    print(f"sweep -> {config.out_dir / 'sweep.csv'} ({len(rows)} points)")
    for row in rows:
        status = row["status"]
        if status == "ok":
            print(f"  target={row['varied_target']}: auc={row['auc']:.4f} f1={row['f1']:.4f}")
        else:
            print(f"  target={row['varied_target']}: FAILED ({row['error']})")
    return EXIT_PARTIAL_SWEEP if any_failed else EXIT_OK


def _cmd_compare_external(args) -> int:
    config = _load_config(args)
    if config.tweets_csv is None or config.external_scores_csv is None:
        raise ConfigError("compare-external needs data.tweets_csv and data.external_scores_csv")
    if not config.tweets_csv.exists():
        raise ConfigError(f"tweets CSV not found: {config.tweets_csv}")
    if not config.external_scores_csv.exists():
        raise ConfigError(f"external scores CSV not found: {config.external_scores_csv}")
    run_dir = Path(args.run) if args.run else config.out_dir
    model = load_run_model(run_dir)
    bundle = load_run_feature_bundle(config, run_dir)
    with open(config.tweets_csv, "rb") as fh:
        tweets = load_identity_texts(fh, load_terms(config.identity_terms))
    scores = load_external_scores(config.external_scores_csv)
    result = compare_external_scores(
        model,
        bundle,
        tweets,
        scores,
        threshold=config.threshold,
        external_threshold=float(config.raw["external_threshold"]),
    )
    path = run_dir / "comparison.json"
    path.write_text(json.dumps(result, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"comparison -> {path}")
    print(f"  ours toxic: {result['ours_toxic_fraction']:.3f}  external toxic: {result['external_toxic_fraction']:.3f}")
    print(f"  external-only false positives: {result['external_only_false_positives']}")
    print(f"  ours-only false positives: {result['ours_only_false_positives']}")
    return EXIT_OK


def _cmd_report(args) -> int:
    run_dir = Path(args.run)
    report_path = run_dir / "report.json"
    if not report_path.exists():
        raise DataError(f"no report.json under {run_dir}")
    payload = json.loads(report_path.read_text(encoding="utf-8"))
    manifest_path = run_dir / "manifest.json"
    context = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        context = {
            "model": payload.get("model", ""),
            "feature": payload.get("feature", ""),
            "rebalance": manifest.get("rebalance", {}).get("mode", ""),
            "seed": manifest.get("config", {}).get("seed", ""),
        }
    row = dict(context)
    for key in (
        "auc",
        "f1",
        "precision",
        "recall",
        "fpr_identity",
        "fpr_non_identity",
        "fnr_identity",
        "fnr_non_identity",
        "fpr_ratio",
        "fnr_ratio",
        "excluded_unannotated",
    ):
        value = payload.get(key)
        row[key] = "" if value is None else value
    for key, value in payload.get("confusion", {}).items():
        row[key] = value
    out_path = run_dir / "report.csv"
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row))
        writer.writeheader()
        writer.writerow(row)
    print(f"re-rendered -> {out_path}")
    for key in ("auc", "f1", "fpr_identity", "fpr_non_identity", "fpr_ratio", "fnr_ratio"):
        print(f"  {key}: {row[key]}")
    return EXIT_OK


def _cmd_demo_data(args) -> int:
    from .demo import (
        DemoCorpusSpec,
        write_demo_corpus,
        write_demo_embeddings,
        write_demo_external_scores,
        write_demo_tweets,
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = DemoCorpusSpec(n_comments=args.n_comments, seed=args.seed if args.seed is not None else 13)
    n = write_demo_corpus(out_dir / "comments.csv", spec)
    n_words = write_demo_embeddings(out_dir / "embeddings.txt")
    n_tweets = write_demo_tweets(out_dir / "tweets.csv")
    with open(out_dir / "tweets.csv", "rb") as fh:
        from .experiment import packaged_data

        kept = load_identity_texts(fh, load_terms(packaged_data("identity_terms.txt")))
    write_demo_external_scores(out_dir / "external_scores.csv", len(kept))
    print(f"demo data -> {out_dir}")
    print(f"  comments.csv: {n} rows")
    print(f"  embeddings.txt: {n_words} words")
    print(f"  tweets.csv: {n_tweets} rows ({len(kept)} identity-matched)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairtox", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="parse, label, and split the corpus; emit fingerprints")
    _add_common(p)
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("synth", help="expand comment templates into synthetic examples")
    _add_common(p)
    p.add_argument("--per-category", type=int, default=100, help="examples per synthesizable category")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="run a full train+evaluate experiment")
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="re-evaluate a saved model on the config's test split")
    _add_common(p)
    p.add_argument("--run", default=None, help="run directory holding model.bin (default: out_dir)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="incremental rebalancing sweep over one category")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare-external", help="contrast false positives with an external scorer")
    _add_common(p)
    p.add_argument("--run", default=None, help="run directory holding model.bin (default: out_dir)")
    p.set_defaults(func=_cmd_compare_external)

    p = sub.add_parser("report", help="re-render CSV/summary from a finished run directory")
    p.add_argument("--run", required=True, help="run directory holding report.json")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("demo-data", help="write the bundled planted-bias demo corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-comments", type=int, default=8000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_demo_data)

    return parser


def _exit_code_for(exc: FairtoxError) -> int:
    cause = exc.cause if isinstance(exc, StageError) else exc
    if isinstance(cause, ConfigError):
        return EXIT_CONFIG
    if isinstance(cause, DivergenceError):
        return EXIT_DIVERGENCE
    if isinstance(cause, (DataError, OSError)):
        return EXIT_DATA
    return EXIT_DATA


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (DataError, FairtoxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc) if isinstance(exc, FairtoxError) else EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
