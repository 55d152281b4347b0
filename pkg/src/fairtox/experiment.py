"""Config-driven experiment runner tying the pipeline stages together.

A run executes parse -> label -> split -> (optional rebalance of the
training set only) -> featurize -> fit -> evaluate and writes its outputs
under the configured directory:

    report.json        fairness report (deterministic bytes for a fixed
                       config, seed, and data)
    report.csv         the same report as one flat CSV row
    history.csv        per-epoch training loss and validation F1
    model.bin          trained model artifact
    tfidf.json         fitted vectorizer (tfidf feature runs)
    train_manifest.csv sampled training-set audit (rebalanced runs)
    manifest.json      config hash, input fingerprints, stage timings

Timings live only in the manifest; every other emitted byte is a pure
function of (config, seed, data). On a stage failure all partial outputs
are removed and the failing stage is named.
"""

from __future__ import annotations

import csv
import hashlib
import importlib.resources
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .corpus import (
    CommentSchema,
    corpus_stats,
    label_corpus,
    load_identity_texts,
    parse_comments,
    sample_fraction,
    split_dataset,
)
from .errors import ConfigError, DataError, FairtoxError
from .features import (
    EmbeddingTable,
    TfIdfModel,
    count_vectors,
    embed_sequence_batch,
    embed_sum_batch,
    fit_tfidf,
    load_embeddings,
    transform_tfidf_batch,
)
from .metrics import FairnessReport, subgroup_report
from .models import (
    BiLstmConfig,
    GradientModelConfig,
    TrainedModel,
    classify,
    fit_bilstm,
    fit_gradient_model,
    fit_naive_bayes,
    load_model,
    predict_proba,
    save_model,
)
from .rebalance import CategoryPools, RebalanceSpec, SweepSchedule, build_pools, make_sweep, sample_balanced
from .records import Category, DatasetSplit, LabeledExample, Origin, TweetRecord
from .textproc import TermLexicon, load_templates, load_terms, synthesize_comments

FEATURE_KINDS = ("tfidf", "embed-sum", "embed-seq")
MODEL_KINDS = ("naive_bayes", "logistic", "mlp", "bilstm")

_DEFAULTS: dict = {
    "data": {
        "comments_csv": None,
        "embeddings": None,
        "templates": None,
        "identity_terms": None,
        "slur_terms": None,
        "tweets_csv": None,
        "external_scores_csv": None,
    },
    "sample_fraction": 1.0,
    "split": {"train": 0.8, "validation": 0.0, "test": 0.2},
    "labeling": {"toxicity_threshold": 0.5, "identity_epsilon": 0.0},
    "feature": {"kind": "tfidf", "min_df": 1, "embedding_dim": 25, "max_len": 200},
    "model": {"kind": "logistic"},
    "rebalance": None,
    "sweep": None,
    "threshold": 0.5,
    "external_threshold": 0.5,
    "seed": 0,
    "out_dir": None,
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def packaged_data(name: str) -> Path:
    return Path(importlib.resources.files("fairtox").joinpath("data", name))


def stage_seed(seed: int, stage: str) -> int:
    """Stable per-stage sub-seed derived from the run seed."""
    digest = hashlib.blake2s(f"{seed}:{stage}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class ExperimentConfig:
    """Validated view over the effective (defaults + file + CLI) config."""

    raw: dict
    base_dir: Path = field(default_factory=Path)

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config root must be a mapping")
        raw = _merge(_DEFAULTS, loaded)
        if overrides:
            raw = _merge(raw, overrides)
        return cls(raw=raw, base_dir=path.parent)

    @classmethod
    def from_dict(cls, config: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        return cls(raw=_merge(_DEFAULTS, config), base_dir=Path(base_dir))

    def _path(self, section: str, key: str, packaged_fallback: str | None = None) -> Path | None:
        value = self.raw[section][key] if section else self.raw[key]
        if value is None:
            return packaged_data(packaged_fallback) if packaged_fallback else None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def comments_csv(self) -> Path | None:
        return self._path("data", "comments_csv")

    @property
    def embeddings(self) -> Path | None:
        return self._path("data", "embeddings")

    @property
    def templates(self) -> Path:
        return self._path("data", "templates", "templates.tsv")

    @property
    def identity_terms(self) -> Path:
        return self._path("data", "identity_terms", "identity_terms.txt")

    @property
    def slur_terms(self) -> Path:
        return self._path("data", "slur_terms", "slur_stand_ins.txt")

    @property
    def tweets_csv(self) -> Path | None:
        return self._path("data", "tweets_csv")

    @property
    def external_scores_csv(self) -> Path | None:
        return self._path("data", "external_scores_csv")

    @property
    def out_dir(self) -> Path:
        value = self.raw["out_dir"]
        if value is None:
            raise ConfigError("out_dir is not set (use --out or the config file)")
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def threshold(self) -> float:
        return float(self.raw["threshold"])

    @property
    def split_fractions(self) -> tuple[float, float, float]:
        s = self.raw["split"]
        return (float(s["train"]), float(s["validation"]), float(s["test"]))

    @property
    def feature_kind(self) -> str:
        return self.raw["feature"]["kind"]

    @property
    def model_kind(self) -> str:
        return self.raw["model"]["kind"]

    def validate(self, need_comments: bool = True) -> None:
        raw = self.raw
        if self.feature_kind not in FEATURE_KINDS:
            raise ConfigError(f"feature.kind must be one of {FEATURE_KINDS}, got {self.feature_kind!r}")
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model.kind must be one of {MODEL_KINDS}, got {self.model_kind!r}")
        compatible = {
            "naive_bayes": ("tfidf",),
            "logistic": ("tfidf", "embed-sum"),
            "mlp": ("tfidf", "embed-sum"),
            "bilstm": ("embed-seq",),
        }
        if self.feature_kind not in compatible[self.model_kind]:
            raise ConfigError(f"model {self.model_kind!r} cannot use feature kind {self.feature_kind!r}")
        fractions = self.split_fractions
        if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must be non-negative and sum to 1, got {fractions}")
        if self.model_kind == "bilstm" and fractions[1] == 0:
            raise ConfigError("bilstm training needs a non-empty validation split")
        if not 0.0 < float(raw["sample_fraction"]) <= 1.0:
            raise ConfigError(f"sample_fraction must be in (0, 1], got {raw['sample_fraction']}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if need_comments:
            if self.comments_csv is None:
                raise ConfigError("data.comments_csv is required")
            if not self.comments_csv.exists():
                raise ConfigError(f"comments CSV not found: {self.comments_csv}")
        if self.feature_kind.startswith("embed"):
            if self.embeddings is None:
                raise ConfigError("embedding features need data.embeddings")
            if not self.embeddings.exists():
                raise ConfigError(f"embeddings file not found: {self.embeddings}")
        for p in (self.templates, self.identity_terms, self.slur_terms):
            if not p.exists():
                raise ConfigError(f"referenced file not found: {p}")
        rebalance = raw["rebalance"]
        if rebalance is not None and rebalance != "original":
            if not isinstance(rebalance, dict):
                raise ConfigError("rebalance must be null, 'original', or a mapping")
            self.rebalance_targets()
        sweep = raw["sweep"]
        if sweep is not None:
            try:
                self.sweep_schedule()
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"invalid sweep section: {exc}") from exc

    def wants_rebalance(self) -> bool:
        return self.raw["rebalance"] is not None and self.raw["rebalance"] != "original"

    def rebalance_targets(self) -> dict[Category, int]:
        section = self.raw["rebalance"]
        if "target" in section:
            target = int(section["target"])
            if target < 0:
                raise ConfigError("rebalance.target must be >= 0")
            return {c: target for c in Category}
        if "targets" not in section:
            raise ConfigError("rebalance needs 'target' or a 'targets' mapping")
        by_name = {c.value: c for c in Category}
        targets = {c: 0 for c in Category}
        for name, value in section["targets"].items():
            if name not in by_name:
                raise ConfigError(f"unknown rebalance category {name!r}")
            if int(value) < 0:
                raise ConfigError("rebalance targets must be >= 0")
            targets[by_name[name]] = int(value)
        return targets

    def synthetic_per_category(self) -> int:
        section = self.raw["rebalance"]
        if not isinstance(section, dict):
            return 0
        return int(section.get("synthetic_per_category", 0))

    def sweep_schedule(self) -> SweepSchedule:
        section = self.raw["sweep"]
        if section is None:
            raise ConfigError("config has no sweep section")
        by_name = {c.value: c for c in Category}
        name = section["category"]
        if name not in by_name:
            raise ConfigError(f"unknown sweep category {name!r}")
        if not self.wants_rebalance():
            raise ConfigError("sweep needs a rebalance section supplying the fixed targets")
        fixed = self.rebalance_targets()
        return make_sweep(by_name[name], int(section["start"]), int(section["stop"]), int(section["step"]), fixed)

    def config_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.raw, sort_keys=True).encode()).hexdigest()

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True)


def file_fingerprint(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def examples_fingerprint(examples: list[LabeledExample]) -> str:
    h = hashlib.sha256()
    for ex in examples:
        h.update(f"{ex.example_id}\t{ex.label}\t{ex.identity.value}\n".encode())
    return h.hexdigest()


@dataclass
class PreparedData:
    split: DatasetSplit
    n_records: int
    stats: dict
    input_fingerprints: dict[str, str]
    split_fingerprints: dict[str, str]


def prepare_data(config: ExperimentConfig) -> PreparedData:
    labeling = config.raw["labeling"]
    with open(config.comments_csv, "rb") as fh:
        records = parse_comments(fh, CommentSchema())
    frac = float(config.raw["sample_fraction"])
    if frac < 1.0:
        records = sample_fraction(records, frac, stage_seed(config.seed, "sample"))
    examples = label_corpus(records, float(labeling["toxicity_threshold"]), float(labeling["identity_epsilon"]))
    split = split_dataset(examples, config.split_fractions, stage_seed(config.seed, "split"))
    stats = corpus_stats(examples)
    return PreparedData(
        split=split,
        n_records=len(records),
        stats={
            "total": stats.total,
            "toxic": stats.toxic,
            "unannotated": stats.unannotated,
            "by_category": stats.by_category,
            "toxic_rate_identity": stats.toxic_rate(identity=True),
            "toxic_rate_non_identity": stats.toxic_rate(identity=False),
        },
        input_fingerprints={str(config.comments_csv): file_fingerprint(config.comments_csv)},
        split_fingerprints={
            "train": examples_fingerprint(split.train),
            "validation": examples_fingerprint(split.validation),
            "test": examples_fingerprint(split.test),
        },
    )


@dataclass
class FeatureBundle:
    kind: str
    tfidf: TfIdfModel | None = None
    table: EmbeddingTable | None = None
    max_len: int = 200

    def transform(self, examples: list[LabeledExample], model_kind: str):
        docs = [ex.tokens for ex in examples]
        return self.transform_docs(docs, model_kind)

    def transform_docs(self, docs: list[list[str]], model_kind: str):
        if self.kind == "tfidf":
            if model_kind == "naive_bayes":
                return count_vectors(self.tfidf, docs)
            return transform_tfidf_batch(self.tfidf, docs)
        if self.kind == "embed-sum":
            return embed_sum_batch(self.table, docs)
        return embed_sequence_batch(self.table, docs, self.max_len)


def fit_features(config: ExperimentConfig, train_examples: list[LabeledExample]) -> FeatureBundle:
    section = config.raw["feature"]
    if config.feature_kind == "tfidf":
        model = fit_tfidf([ex.tokens for ex in train_examples], int(section.get("min_df", 1)))
        return FeatureBundle(kind="tfidf", tfidf=model)
    table = load_embeddings(config.embeddings, int(section.get("embedding_dim", 25)))
    return FeatureBundle(kind=config.feature_kind, table=table, max_len=int(section.get("max_len", 200)))


def _labels(examples: list[LabeledExample]) -> np.ndarray:
    return np.array([ex.label for ex in examples], dtype=np.int64)


def build_model_config(config: ExperimentConfig, input_dim: int):
    section = dict(config.raw["model"])
    kind = section.pop("kind")
    seed = stage_seed(config.seed, "model")
    if kind == "naive_bayes":
        return {"kind": "naive_bayes", "alpha": float(section.get("alpha", 1.0))}
    if kind in ("logistic", "mlp"):
        known = ("learning_rate", "batch_size", "epochs", "optimizer", "hidden")
        kwargs = {k: section[k] for k in known if k in section}
        if kind == "logistic":
            kwargs.pop("hidden", None)
            return GradientModelConfig(architecture="logistic", input_dim=input_dim, seed=seed, threshold=config.threshold, **kwargs)
        kwargs["hidden"] = tuple(kwargs.get("hidden", (100,)))
        return GradientModelConfig(architecture="mlp", input_dim=input_dim, seed=seed, threshold=config.threshold, **kwargs)
    if kind == "bilstm":
        known = (
            "hidden_units",
            "spatial_dropout_rate",
            "batch_size",
            "learning_rate",
            "epochs",
            "head_hidden",
            "optimizer",
            "dtype",
        )
        kwargs = {k: section[k] for k in known if k in section}
        feature = config.raw["feature"]
        return BiLstmConfig(
            embed_dim=int(feature.get("embedding_dim", 25)),
            max_len=int(feature.get("max_len", 200)),
            seed=seed,
            **kwargs,
        )
    raise ConfigError(f"unknown model kind {kind!r}")


def train_model(
    config: ExperimentConfig,
    bundle: FeatureBundle,
    train: list[LabeledExample],
    validation: list[LabeledExample],
) -> TrainedModel:
    kind = config.model_kind
    feats = bundle.transform(train, kind)
    y = _labels(train)
    if kind == "naive_bayes":
        model_config = build_model_config(config, feats.shape[1])
        return fit_naive_bayes(feats, y, alpha=model_config["alpha"])
    if kind == "bilstm":
        model_config = build_model_config(config, 0)
        x, lengths = feats
        val_x, val_lengths = bundle.transform(validation, kind)
        return fit_bilstm(model_config, (x, lengths, y), (val_x, val_lengths, _labels(validation)))
    model_config = build_model_config(config, feats.shape[1])
    val = None
    if validation:
        val = (bundle.transform(validation, kind), _labels(validation))
    return fit_gradient_model(model_config, feats, y, val)


def evaluate_model(
    config: ExperimentConfig,
    bundle: FeatureBundle,
    model: TrainedModel,
    test: list[LabeledExample],
    extra: dict | None = None,
) -> FairnessReport:
    feats = bundle.transform(test, model.kind)
    probs = predict_proba(model, feats)
    preds = classify(probs, config.threshold)
    labels = _labels(test)
    flags = [ex.identity for ex in test]
    report = subgroup_report(labels, preds, probs, flags, config.threshold)
    report.extra = {"model": model.kind, "feature": config.feature_kind, "n_test": len(test)}
    if extra:
        report.extra.update(extra)
    return report


class StageError(FairtoxError):
    """Wraps a pipeline failure with the stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


class _Run:
    """Tracks artifacts and timings; removes partial outputs on failure."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.artifacts: dict[str, str] = {}
        self.timings: dict[str, float] = {}
        self._created: list[Path] = []

    def path(self, name: str, key: str | None = None) -> Path:
        p = self.out_dir / name
        self._created.append(p)
        self.artifacts[key or name] = str(p)
        return p

    def cleanup(self) -> None:
        for p in self._created:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass


def _write_json_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _write_history_csv(path: Path, model: TrainedModel) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "val_f1"])
        for entry in model.history:
            writer.writerow([entry["epoch"], repr(entry["loss"]), repr(entry["val_f1"]) if "val_f1" in entry else ""])


def _write_report_csv(path: Path, report: FairnessReport, context: dict) -> None:
    row = dict(context)
    row.update(report.to_csv_row())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row))
        writer.writeheader()
        writer.writerow(row)


def _write_train_manifest(path: Path, examples: list[LabeledExample]) -> None:
    from collections import Counter

    counts = Counter((ex.example_id, ex.category.value if ex.category else "", ex.origin.value) for ex in examples)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["example_id", "category", "origin", "multiplicity"])
        for (ex_id, category, origin), n in sorted(counts.items()):
            writer.writerow([ex_id, category, origin, n])


def _load_lexicon(config: ExperimentConfig) -> TermLexicon:
    return TermLexicon(
        identity_terms=load_terms(config.identity_terms),
        slur_terms=load_terms(config.slur_terms),
    )


def _rebalanced_train(config: ExperimentConfig, train: list[LabeledExample], targets: dict[Category, int], seed: int):
    synth_n = config.synthetic_per_category()
    synthetic: list[LabeledExample] = []
    if synth_n > 0:
        templates = load_templates(config.templates)
        synthetic = synthesize_comments(templates, _load_lexicon(config), synth_n, stage_seed(config.seed, "synth"))
    pools = build_pools(train, synthetic)
    sampled = sample_balanced(pools, RebalanceSpec(targets=dict(targets), seed=seed))
    return sampled, pools, len(synthetic)


def run_experiment(config: ExperimentConfig) -> tuple[dict, FairnessReport]:
    """Execute one full training/evaluation run; returns (manifest, report)."""
    config.validate()
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    run = _Run(out_dir)
    stage = "validate"

    def timed(name, fn, *args, **kwargs):
        nonlocal stage
        stage = name
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        run.timings[name] = time.perf_counter() - t0
        return result

    try:
        prepared = timed("prepare", prepare_data, config)
        train = prepared.split.train
        rebalance_info: dict = {"mode": "original"}
        if config.wants_rebalance():
            targets = config.rebalance_targets()
            train, pools, n_synth = timed(
                "rebalance", _rebalanced_train, config, train, targets, stage_seed(config.seed, "rebalance")
            )
            rebalance_info = {
                "mode": "balanced",
                "targets": {c.value: t for c, t in targets.items()},
                "pool_counts": pools.counts(),
                "synthetic_generated": n_synth,
                "excluded_unannotated": len(pools.remainder),
                "train_size": len(train),
            }
            _write_train_manifest(run.path("train_manifest.csv"), train)
        bundle = timed("features", fit_features, config, train)
        model = timed("train", train_model, config, bundle, train, prepared.split.validation)
        report = timed(
            "evaluate",
            evaluate_model,
            config,
            bundle,
            model,
            prepared.split.test,
            {"rebalance": rebalance_info["mode"], "seed": config.seed},
        )

        stage = "write"
        run.path("report.json").write_text(report.to_json(), encoding="utf-8")
        _write_report_csv(
            run.path("report.csv"),
            report,
            {"model": model.kind, "feature": config.feature_kind, "rebalance": rebalance_info["mode"], "seed": config.seed},
        )
        _write_history_csv(run.path("history.csv"), model)
        save_model(model, run.path("model.bin"))
        if bundle.kind == "tfidf":
            run.path("tfidf.json").write_text(bundle.tfidf.to_json(), encoding="utf-8")
        manifest = {
            "format": "fairtox-run-v1",
            "tool_version": __version__,
            "config_hash": config.config_hash(),
            "config": config.raw,
            "input_fingerprints": prepared.input_fingerprints,
            "split_fingerprints": prepared.split_fingerprints,
            "corpus_stats": prepared.stats,
            "rebalance": rebalance_info,
            "artifacts": dict(run.artifacts),
            "timings_s": run.timings,
        }
        manifest_path = out_dir / "manifest.json"
        _write_json_atomic(manifest_path, manifest)
        return manifest, report
    except FairtoxError as exc:
        run.cleanup()
        if isinstance(exc, StageError):
            raise
        raise StageError(stage, exc) from exc
    except (OSError, ValueError) as exc:
        run.cleanup()
        raise StageError(stage, exc) from exc


SWEEP_CONTEXT_FIELDS = ("point_index", "varied_category", "varied_target", "status", "error")


def run_sweep(config: ExperimentConfig) -> tuple[list[dict], bool]:
    """One run per schedule point against a shared test set.

    Per-point failures are recorded in the output rows and the sweep keeps
    going; the boolean result reports whether any point failed.
    """
    config.validate()
    schedule = config.sweep_schedule()
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    prepared = prepare_data(config)

    synth_n = config.synthetic_per_category()
    synthetic: list[LabeledExample] = []
    if synth_n > 0:
        templates = load_templates(config.templates)
        synthetic = synthesize_comments(templates, _load_lexicon(config), synth_n, stage_seed(config.seed, "synth"))
    pools = build_pools(prepared.split.train, synthetic)

    base_rebalance_seed = stage_seed(config.seed, "rebalance")
    base_model_seed = stage_seed(config.seed, "model")
    rows: list[dict] = []
    any_failed = False
    for index, spec in enumerate(schedule.specs(seed=base_rebalance_seed)):
        row = {
            "point_index": index,
            "varied_category": schedule.category.value,
            "varied_target": spec.targets[schedule.category],
            "status": "ok",
            "error": "",
        }
        try:
            train = sample_balanced(pools, spec)
            bundle = fit_features(config, train)
            model = _train_with_seed(config, bundle, train, prepared.split.validation, base_model_seed + index)
            report = evaluate_model(config, bundle, model, prepared.split.test)
            row.update(report.to_csv_row())
        except FairtoxError as exc:
            row["status"] = "error"
            row["error"] = str(exc)
            any_failed = True
        rows.append(row)

    fieldnames = list(SWEEP_CONTEXT_FIELDS) + ["model", "feature"] + list(FairnessReport.CSV_FIELDS)
    sweep_csv = out_dir / "sweep.csv"
    with open(sweep_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({"model": config.model_kind, "feature": config.feature_kind, **row})
    _write_json_atomic(
        out_dir / "sweep_manifest.json",
        {
            "format": "fairtox-sweep-v1",
            "tool_version": __version__,
            "config_hash": config.config_hash(),
            "config": config.raw,
            "schedule": {
                "category": schedule.category.value,
                "targets": schedule.targets,
                "fixed_targets": {c.value: t for c, t in schedule.fixed_targets.items()},
            },
            "test_fingerprint": prepared.split_fingerprints["test"],
            "input_fingerprints": prepared.input_fingerprints,
            "any_failed": any_failed,
        },
    )
    return rows, any_failed


def _train_with_seed(config: ExperimentConfig, bundle, train, validation, seed: int) -> TrainedModel:
    kind = config.model_kind
    feats = bundle.transform(train, kind)
    y = _labels(train)
    if kind == "naive_bayes":
        return fit_naive_bayes(feats, y, alpha=float(config.raw["model"].get("alpha", 1.0)))
    if kind == "bilstm":
        model_config = build_model_config(config, 0)
        model_config.seed = seed
        val_feats = bundle.transform(validation, kind)
        return fit_bilstm(model_config, (*feats, y), (*val_feats, _labels(validation)))
    model_config = build_model_config(config, feats.shape[1])
    model_config.seed = seed
    val = (bundle.transform(validation, kind), _labels(validation)) if validation else None
    return fit_gradient_model(model_config, feats, y, val)


def compare_external_scores(
    model: TrainedModel,
    bundle: FeatureBundle,
    tweets: list[TweetRecord],
    external_scores: dict[str, float],
    threshold: float = 0.5,
    external_threshold: float = 0.5,
    listing_limit: int = 10,
) -> dict:
    """Contrast our false-positive behavior with an external scorer.

    Tweets are assumed non-toxic, so every toxic call is a false positive.
    External scores are keyed by the tweet's 0-based index (as a string)
    within the filtered tweet list.
    """
    from .textproc import tokenize

    ids = [str(i) for i in range(len(tweets))]
    missing = [i for i in ids if i not in external_scores]
    if missing:
        raise DataError(f"missing external scores for ids: {', '.join(missing[:20])}")
    docs = [tokenize(t.text) for t in tweets]
    feats = bundle.transform_docs(docs, model.kind)
    ours_probs = predict_proba(model, feats)
    ours = classify(ours_probs, threshold)
    theirs = classify(np.array([external_scores[i] for i in ids]), external_threshold)
    ours_only = [i for i in range(len(tweets)) if ours[i] == 1 and theirs[i] == 0]
    theirs_only = [i for i in range(len(tweets)) if theirs[i] == 1 and ours[i] == 0]

    def listing(indices):
        return [{"id": str(i), "text": tweets[i].text} for i in indices[:listing_limit]]

    return {
        "n_texts": len(tweets),
        "threshold": threshold,
        "external_threshold": external_threshold,
        "ours_toxic_fraction": float(ours.mean()) if len(tweets) else 0.0,
        "external_toxic_fraction": float(theirs.mean()) if len(tweets) else 0.0,
        "ours_only_false_positives": len(ours_only),
        "external_only_false_positives": len(theirs_only),
        "ours_only_examples": listing(ours_only),
        "external_only_examples": listing(theirs_only),
    }


def load_external_scores(path: Path) -> dict[str, float]:
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames or "score" not in reader.fieldnames:
            raise DataError(f"external score file {path} needs 'id' and 'score' columns")
        for row_number, row in enumerate(reader, start=1):
            try:
                scores[row["id"].strip()] = float(row["score"])
            except (ValueError, AttributeError):
                raise DataError(f"{path}: bad score on row {row_number}") from None
    return scores


def load_run_feature_bundle(config: ExperimentConfig, run_dir: Path) -> FeatureBundle:
    """Rebuild the featurizer used by a finished run from its artifacts."""
    if config.feature_kind == "tfidf":
        tfidf_path = run_dir / "tfidf.json"
        if not tfidf_path.exists():
            raise DataError(f"missing tfidf artifact {tfidf_path}")
        return FeatureBundle(kind="tfidf", tfidf=TfIdfModel.from_json(tfidf_path.read_text(encoding="utf-8")))
    section = config.raw["feature"]
    table = load_embeddings(config.embeddings, int(section.get("embedding_dim", 25)))
    return FeatureBundle(kind=config.feature_kind, table=table, max_len=int(section.get("max_len", 200)))


def load_run_model(run_dir: Path) -> TrainedModel:
    model_path = run_dir / "model.bin"
    if not model_path.exists():
        raise DataError(f"missing model artifact {model_path}")
    return load_model(model_path)
