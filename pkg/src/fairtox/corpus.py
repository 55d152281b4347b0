"""Comment/tweet corpus ingestion, labeling, and deterministic splitting.

Expected comment CSV layout: a header row with at least the text and target
columns, plus zero or more identity-fraction columns. A row whose identity
columns are all empty counts as unannotated. Tweet CSVs carry the columns
``Party``, ``Handle``, ``Tweet``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, TextIO

import numpy as np

from .errors import DataError, RowError, SchemaError
from .numerics.core import rng as seeded_rng
from .records import (
    Category,
    CommentRecord,
    DatasetSplit,
    Identity,
    LabeledExample,
    Origin,
    TweetRecord,
    category_for,
)
from .textproc import tokenize

DEFAULT_IDENTITY_COLUMNS = (
    "male",
    "female",
    "transgender",
    "other_gender",
    "heterosexual",
    "homosexual_gay_or_lesbian",
    "bisexual",
    "other_sexual_orientation",
    "christian",
    "jewish",
    "muslim",
    "hindu",
    "buddhist",
    "atheist",
    "other_religion",
    "black",
    "white",
    "asian",
    "latino",
    "other_race_or_ethnicity",
    "physical_disability",
    "intellectual_or_learning_disability",
    "psychiatric_or_mental_illness",
    "other_disability",
)


@dataclass
class CommentSchema:
    """Column names for a comment CSV."""

    text_column: str = "comment_text"
    target_column: str = "target"
    id_column: str = "id"
    identity_columns: tuple[str, ...] = DEFAULT_IDENTITY_COLUMNS


def _text_stream(stream) -> TextIO:
    if isinstance(stream, (str, bytes)):
        raise TypeError("pass an open file object, not a path or raw data")
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def parse_comments(stream: BinaryIO | TextIO, schema: CommentSchema | None = None) -> list[CommentRecord]:
    """Parse a comment CSV into records, validating values row by row.

    Rows with every identity column empty get ``identity_fractions=None``.
    Malformed numeric fields raise a RowError carrying the 1-based data row
    number rather than being silently coerced.
    """
    schema = schema or CommentSchema()
    reader = csv.DictReader(_text_stream(stream))
    header = reader.fieldnames
    if header is None:
        return []
    for required in (schema.text_column, schema.target_column):
        if required not in header:
            raise SchemaError(required)
    identity_cols = [c for c in schema.identity_columns if c in header]
    has_id = schema.id_column in header

    records = []
    for row_number, row in enumerate(reader, start=1):
        text = (row.get(schema.text_column) or "").strip()
        if not text:
            raise RowError(row_number, "empty comment text")
        raw_target = (row.get(schema.target_column) or "").strip()
        try:
            toxicity = float(raw_target)
        except ValueError:
            raise RowError(row_number, f"unparsable target value {raw_target!r}") from None
        if not 0.0 <= toxicity <= 1.0:
            raise RowError(row_number, f"target {toxicity} outside [0, 1]")

        fractions: dict[str, float] | None = {}
        any_present = False
        for col in identity_cols:
            raw = (row.get(col) or "").strip()
            if raw == "":
                continue
            any_present = True
            try:
                value = float(raw)
            except ValueError:
                raise RowError(row_number, f"unparsable identity fraction {col}={raw!r}") from None
            if not 0.0 <= value <= 1.0:
                raise RowError(row_number, f"identity fraction {col}={value} outside [0, 1]")
            fractions[col] = value
        if not any_present:
            fractions = None

        rec_id = row.get(schema.id_column, "").strip() if has_id else str(row_number)
        records.append(CommentRecord(id=rec_id or str(row_number), text=text, toxicity=toxicity, identity_fractions=fractions))
    return records


def label_example(record: CommentRecord, threshold: float = 0.5, identity_epsilon: float = 0.0) -> LabeledExample:
    """Binarize toxicity and derive the identity flag and category.

    ``label`` is 1 iff toxicity >= threshold. A record counts as identity
    when any identity fraction exceeds ``identity_epsilon``; records without
    identity annotations stay unannotated and get no category.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    if identity_epsilon < 0.0:
        raise ValueError("identity_epsilon must be >= 0")
    label = 1 if record.toxicity >= threshold else 0
    if record.identity_fractions is None:
        identity = Identity.UNANNOTATED
    elif any(v > identity_epsilon for v in record.identity_fractions.values()):
        identity = Identity.IDENTITY
    else:
        identity = Identity.NON_IDENTITY
    return LabeledExample(
        tokens=tokenize(record.text),
        label=label,
        identity=identity,
        category=category_for(label, identity),
        origin=Origin.REAL,
        example_id=record.id,
    )


def label_corpus(records: Iterable[CommentRecord], threshold: float = 0.5, identity_epsilon: float = 0.0) -> list[LabeledExample]:
    return [label_example(r, threshold, identity_epsilon) for r in records]


def split_dataset(examples: list[LabeledExample], fractions: tuple[float, float, float], seed: int) -> DatasetSplit:
    """Seeded shuffle followed by a contiguous train/validation/test cut.

    Partition sizes are floor(n * fraction) per part, with the remainder
    rows going to train. Identical (examples, fractions, seed) always yields
    the identical split.
    """
    if len(examples) == 0:
        raise DataError("cannot split an empty example list")
    if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must be non-negative and sum to 1, got {fractions}")
    n = len(examples)
    rng = seeded_rng(seed)
    order = rng.permutation(n)
    n_train = int(n * fractions[0])
    n_val = int(n * fractions[1])
    n_test = int(n * fractions[2])
    n_train += n - (n_train + n_val + n_test)
    shuffled = [examples[i] for i in order]
    return DatasetSplit(
        train=shuffled[:n_train],
        validation=shuffled[n_train : n_train + n_val],
        test=shuffled[n_train + n_val :],
        seed=seed,
        fractions=tuple(fractions),
    )


def sample_fraction(records: list, fraction: float, seed: int) -> list:
    """Keep a seeded random subset of the rows, preserving input order."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"sample fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return list(records)
    rng = seeded_rng(seed)
    keep = int(len(records) * fraction)
    chosen = rng.choice(len(records), size=keep, replace=False)
    chosen.sort()
    return [records[i] for i in chosen]


def load_identity_texts(stream: BinaryIO | TextIO, identity_terms: list[str]) -> list[TweetRecord]:
    """Load tweets whose tokenization mentions at least one identity term.

    Matching is case-insensitive and by whole token; terms are expected
    lowercase, one token each.
    """
    if not identity_terms:
        raise ValueError("identity term list is empty")
    terms = {t.lower() for t in identity_terms}
    reader = csv.DictReader(_text_stream(stream))
    if reader.fieldnames is None:
        return []
    for required in ("Party", "Handle", "Tweet"):
        if required not in reader.fieldnames:
            raise SchemaError(required)
    kept = []
    for row_number, row in enumerate(reader, start=1):
        text = (row.get("Tweet") or "").strip()
        if not text:
            raise RowError(row_number, "empty tweet text")
        if terms.intersection(tokenize(text)):
            kept.append(TweetRecord(party=(row.get("Party") or "").strip(), handle=(row.get("Handle") or "").strip(), text=text))
    return kept


@dataclass
class CorpusStats:
    """Category and identity counts over a labeled corpus."""

    total: int = 0
    toxic: int = 0
    unannotated: int = 0
    by_category: dict[str, int] = field(default_factory=dict)

    @property
    def annotated(self) -> int:
        return self.total - self.unannotated

    def toxic_rate(self, identity: bool) -> float:
        toxic_key = (Category.TOXIC_IDENTITY if identity else Category.TOXIC_NON_IDENTITY).value
        nontoxic_key = (Category.NONTOXIC_IDENTITY if identity else Category.NONTOXIC_NON_IDENTITY).value
        denom = self.by_category.get(toxic_key, 0) + self.by_category.get(nontoxic_key, 0)
        return self.by_category.get(toxic_key, 0) / denom if denom else 0.0


def corpus_stats(examples: Iterable[LabeledExample]) -> CorpusStats:
    stats = CorpusStats(by_category={c.value: 0 for c in Category})
    for ex in examples:
        stats.total += 1
        stats.toxic += ex.label
        if ex.category is None:
            stats.unannotated += 1
        else:
            stats.by_category[ex.category.value] += 1
    return stats
