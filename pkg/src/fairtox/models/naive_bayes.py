"""Multinomial Naive Bayes baseline over bag-of-words counts."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import FitError, ShapeError
from ..numerics import softmax_rows
from .base import TrainedModel


def fit_naive_bayes(counts: sp.spmatrix, labels: np.ndarray, alpha: float = 1.0) -> TrainedModel:
    """Fit class priors and Laplace-smoothed token likelihoods.

    log P(t | c) = ln((count(t, c) + alpha) / (total(c) + alpha * V))
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    counts = sp.csr_matrix(counts)
    y = np.asarray(labels, dtype=np.int64)
    if counts.shape[0] != y.size:
        raise ShapeError(f"{counts.shape[0]} count rows but {y.size} labels")
    n_per_class = np.array([(y == 0).sum(), (y == 1).sum()], dtype=np.float64)
    if (n_per_class == 0).any():
        raise FitError("both classes must be present to fit naive bayes")
    vocab_size = counts.shape[1]
    token_totals = np.zeros((2, vocab_size), dtype=np.float64)
    for c in (0, 1):
        token_totals[c] = np.asarray(counts[y == c].sum(axis=0)).ravel()
    log_likelihoods = np.log(token_totals + alpha) - np.log(token_totals.sum(axis=1, keepdims=True) + alpha * vocab_size)
    log_priors = np.log(n_per_class / n_per_class.sum())
    return TrainedModel(
        kind="naive_bayes",
        params={"log_priors": log_priors, "log_likelihoods": log_likelihoods},
        config={"alpha": alpha, "vocab_size": vocab_size},
        history=[],
        selected_epoch=None,
    )


def nb_log_posteriors(model: TrainedModel, counts: sp.spmatrix) -> np.ndarray:
    """Unnormalized log posteriors, one (class0, class1) row per document."""
    counts = sp.csr_matrix(counts)
    ll = model.params["log_likelihoods"]
    if counts.shape[1] != ll.shape[1]:
        raise ShapeError(f"count columns {counts.shape[1]} != vocabulary size {ll.shape[1]}")
    return counts @ ll.T + model.params["log_priors"]


def predict_naive_bayes(model: TrainedModel, counts: sp.spmatrix) -> tuple[np.ndarray, np.ndarray]:
    """Argmax class per document plus both log posteriors.

    Ties break to class 0; a document with no known tokens is scored by the
    priors alone.
    """
    scores = nb_log_posteriors(model, counts)
    classes = (scores[:, 1] > scores[:, 0]).astype(np.int64)
    return classes, scores


def nb_predict_proba(model: TrainedModel, counts: sp.spmatrix) -> np.ndarray:
    scores = nb_log_posteriors(model, counts)
    return softmax_rows(scores)[:, 1]
