"""Featurization: smoothed TF-IDF and word-embedding lookups.

TF-IDF uses the smoothed inverse document frequency

    idf(t) = ln((1 + N) / (1 + df(t))) + 1

followed by L2 normalization of each document vector. The vocabulary is
ordered lexicographically so fitted models are byte-reproducible.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, TextIO

import numpy as np
import scipy.sparse as sp

from .errors import DataError, FitError


@dataclass
class TfIdfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    corpus_doc_count: int

    @property
    def size(self) -> int:
        return len(self.vocabulary)

    def to_json(self) -> str:
        terms = sorted(self.vocabulary, key=self.vocabulary.get)
        payload = {
            "format": "fairtox-tfidf-v1",
            "corpus_doc_count": self.corpus_doc_count,
            "terms": terms,
            "idf": [float(x) for x in self.idf],
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TfIdfModel":
        payload = json.loads(text)
        if payload.get("format") != "fairtox-tfidf-v1":
            raise DataError(f"unsupported tfidf artifact format {payload.get('format')!r}")
        vocab = {t: i for i, t in enumerate(payload["terms"])}
        return cls(vocab, np.asarray(payload["idf"], dtype=np.float64), int(payload["corpus_doc_count"]))


def fit_tfidf(tokenized_docs: list[list[str]], min_df: int = 1) -> TfIdfModel:
    """Fit vocabulary and smoothed IDF weights on a tokenized corpus."""
    if not tokenized_docs:
        raise FitError("cannot fit tf-idf on an empty corpus")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df = Counter()
    for doc in tokenized_docs:
        df.update(set(doc))
    terms = sorted(t for t, c in df.items() if c >= min_df)
    n = len(tokenized_docs)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in terms], dtype=np.float64)
    return TfIdfModel({t: i for i, t in enumerate(terms)}, idf, n)


def transform_tfidf(model: TfIdfModel, tokens: list[str]) -> sp.csr_matrix:
    """Weight raw counts by IDF and L2-normalize; unknown tokens are ignored.

    Returns a 1 x V sparse row; an all-unknown document maps to the zero
    vector.
    """
    return transform_tfidf_batch(model, [tokens])


def transform_tfidf_batch(model: TfIdfModel, docs: Iterable[list[str]]) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    vocab = model.vocabulary
    idf = model.idf
    n_docs = 0
    for doc in docs:
        n_docs += 1
        counts = Counter(doc)
        row = sorted((vocab[t], c) for t, c in counts.items() if t in vocab)
        if row:
            cols = [i for i, _ in row]
            vals = np.array([c * idf[i] for i, c in row], dtype=np.float64)
            norm = math.sqrt(float(np.dot(vals, vals)))
            if norm > 0:
                vals /= norm
            indices.extend(cols)
            data.extend(vals)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(n_docs, model.size),
    )


def count_vectors(model: TfIdfModel, docs: Iterable[list[str]]) -> sp.csr_matrix:
    """Raw bag-of-words counts over the fitted vocabulary (for Naive Bayes)."""
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    vocab = model.vocabulary
    n_docs = 0
    for doc in docs:
        n_docs += 1
        counts = Counter(doc)
        row = sorted((vocab[t], c) for t, c in counts.items() if t in vocab)
        indices.extend(i for i, _ in row)
        data.extend(c for _, c in row)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(n_docs, model.size),
    )


@dataclass
class EmbeddingTable:
    """Word -> vector lookup with a zero-vector policy for unknown tokens."""

    dim: int
    vectors: dict[str, np.ndarray]
    default: np.ndarray | None = None  # None means all-zeros for OOV tokens
    duplicate_count: int = 0

    def lookup(self, token: str) -> np.ndarray:
        vec = self.vectors.get(token)
        if vec is not None:
            return vec
        if self.default is not None:
            return self.default
        return np.zeros(self.dim, dtype=np.float64)


def load_embeddings(stream: BinaryIO | TextIO | str | Path, expected_dim: int) -> EmbeddingTable:
    """Parse a ``word v1 ... v_dim`` text table.

    Duplicate words keep their first occurrence; the number of duplicates is
    stored on the returned table as ``duplicate_count``.
    """
    if isinstance(stream, (str, Path)):
        lines = Path(stream).read_text(encoding="utf-8").splitlines()
    else:
        raw = stream.read()
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        lines = raw.splitlines()
    vectors: dict[str, np.ndarray] = {}
    duplicates = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != expected_dim + 1:
            raise DataError(f"line {lineno}: expected {expected_dim} components, found {len(parts) - 1}")
        word = parts[0]
        if word in vectors:
            duplicates += 1
            continue
        try:
            vectors[word] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric vector component") from None
    return EmbeddingTable(dim=expected_dim, vectors=vectors, duplicate_count=duplicates)


@dataclass
class SequenceFeature:
    """Fixed-length embedded sequence; rows past true_length are zero."""

    matrix: np.ndarray  # max_len x dim
    true_length: int


def embed_sum(table: EmbeddingTable, tokens: list[str]) -> np.ndarray:
    """Componentwise sum of the token vectors (order-invariant)."""
    out = np.zeros(table.dim, dtype=np.float64)
    for tok in tokens:
        out += table.lookup(tok)
    return out


def embed_sequence(table: EmbeddingTable, tokens: list[str], max_len: int) -> SequenceFeature:
    """First max_len token vectors, zero-padded to a max_len x dim matrix."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    matrix = np.zeros((max_len, table.dim), dtype=np.float64)
    true_length = min(len(tokens), max_len)
    for i in range(true_length):
        matrix[i] = table.lookup(tokens[i])
    return SequenceFeature(matrix=matrix, true_length=true_length)


def embed_sum_batch(table: EmbeddingTable, docs: Iterable[list[str]]) -> np.ndarray:
    rows = [embed_sum(table, doc) for doc in docs]
    return np.stack(rows) if rows else np.zeros((0, table.dim), dtype=np.float64)


def embed_sequence_batch(table: EmbeddingTable, docs: list[list[str]], max_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack per-document sequence features into (n, max_len, dim) plus lengths."""
    n = len(docs)
    out = np.zeros((n, max_len, table.dim), dtype=np.float64)
    lengths = np.zeros(n, dtype=np.int64)
    for j, doc in enumerate(docs):
        feat = embed_sequence(table, doc, max_len)
        out[j] = feat.matrix
        lengths[j] = feat.true_length
    return out, lengths
