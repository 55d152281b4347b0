"""Classification and subgroup fairness metrics.

AUC uses the rank-statistic formulation with midrank tie handling, which
equals the probability that a random positive outranks a random negative
with ties counting one half. Subgroup rates (FPR, FNR) are reported for
identity versus non-identity comments along with their ratios; equal rates
across the two groups mean the equalized-odds criterion is satisfied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, UndefinedMetricError
from .records import Identity


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def fpr(self) -> tuple[float, bool]:
        """False positive rate and whether it is defined (any negatives)."""
        denom = self.fp + self.tn
        return (self.fp / denom, True) if denom else (0.0, False)

    def fnr(self) -> tuple[float, bool]:
        """False negative rate and whether it is defined (any positives)."""
        denom = self.fn + self.tp
        return (self.fn / denom, True) if denom else (0.0, False)

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(labels: np.ndarray, predictions: np.ndarray) -> ConfusionCounts:
    y = np.asarray(labels, dtype=np.int64)
    yhat = np.asarray(predictions, dtype=np.int64)
    if y.shape != yhat.shape:
        raise ShapeError(f"labels shape {y.shape} != predictions shape {yhat.shape}")
    return ConfusionCounts(
        tp=int(((y == 1) & (yhat == 1)).sum()),
        fp=int(((y == 0) & (yhat == 1)).sum()),
        tn=int(((y == 0) & (yhat == 0)).sum()),
        fn=int(((y == 1) & (yhat == 0)).sum()),
    )


def precision_recall_f1(c: ConfusionCounts) -> tuple[float, float, float]:
    """Precision, recall, and their harmonic mean; 0 on zero denominators."""
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1


def _midranks(values: np.ndarray) -> np.ndarray:
    """Average rank (1-based) per element, ties sharing their midrank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Area under the ROC curve via the midrank statistic.

    AUC = (R_pos - P(P+1)/2) / (P * N) with R_pos the midrank sum of the
    positive scores.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape:
        raise ShapeError(f"scores shape {s.shape} != labels shape {y.shape}")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = _midranks(s)
    rank_sum_pos = float(ranks[y == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass
class SubgroupMetrics:
    confusion: ConfusionCounts
    fpr: float
    fpr_defined: bool
    fnr: float
    fnr_defined: bool


@dataclass
class FairnessReport:
    """Overall classification quality plus identity-subgroup error rates."""

    auc: float
    precision: float
    recall: float
    f1: float
    overall: ConfusionCounts
    identity: SubgroupMetrics
    non_identity: SubgroupMetrics
    fpr_ratio: float | None
    fnr_ratio: float | None
    excluded_unannotated: int
    threshold: float = 0.5
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "auc": self.auc,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": self.overall.as_dict(),
            "fpr_identity": self.identity.fpr,
            "fpr_identity_defined": self.identity.fpr_defined,
            "fnr_identity": self.identity.fnr,
            "fnr_identity_defined": self.identity.fnr_defined,
            "fpr_non_identity": self.non_identity.fpr,
            "fpr_non_identity_defined": self.non_identity.fpr_defined,
            "fnr_non_identity": self.non_identity.fnr,
            "fnr_non_identity_defined": self.non_identity.fnr_defined,
            "confusion_identity": self.identity.confusion.as_dict(),
            "confusion_non_identity": self.non_identity.confusion.as_dict(),
            "fpr_ratio": self.fpr_ratio,
            "fnr_ratio": self.fnr_ratio,
            "excluded_unannotated": self.excluded_unannotated,
            "threshold": self.threshold,
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    CSV_FIELDS = (
        "auc",
        "f1",
        "precision",
        "recall",
        "tp",
        "fp",
        "tn",
        "fn",
        "fpr_identity",
        "fpr_non_identity",
        "fnr_identity",
        "fnr_non_identity",
        "fpr_ratio",
        "fnr_ratio",
        "excluded_unannotated",
    )

    def to_csv_row(self) -> dict:
        d = self.to_dict()
        row = {k: d[k] for k in ("auc", "f1", "precision", "recall")}
        row.update(self.overall.as_dict())
        for k in ("fpr_identity", "fpr_non_identity", "fnr_identity", "fnr_non_identity"):
            row[k] = d[k]
        row["fpr_ratio"] = "" if self.fpr_ratio is None else self.fpr_ratio
        row["fnr_ratio"] = "" if self.fnr_ratio is None else self.fnr_ratio
        row["excluded_unannotated"] = self.excluded_unannotated
        return row


def _subgroup(labels, predictions, mask) -> SubgroupMetrics:
    counts = confusion(labels[mask], predictions[mask])
    fpr, fpr_ok = counts.fpr()
    fnr, fnr_ok = counts.fnr()
    return SubgroupMetrics(counts, fpr, fpr_ok, fnr, fnr_ok)


def subgroup_report(
    labels: np.ndarray,
    predictions: np.ndarray,
    scores: np.ndarray,
    identity_flags,
    threshold: float = 0.5,
) -> FairnessReport:
    """Overall metrics plus FPR/FNR split by the identity flag.

    Unannotated rows count toward the overall metrics but are excluded from
    both subgroups; their count is reported. Rate ratios are None whenever
    the non-identity denominator rate is undefined or zero.
    """
    y = np.asarray(labels, dtype=np.int64)
    yhat = np.asarray(predictions, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    flags = np.asarray([f.value if isinstance(f, Identity) else f for f in identity_flags])
    if not (y.shape == yhat.shape == s.shape == flags.shape):
        raise ShapeError("labels, predictions, scores, and identity flags must have equal length")
    overall = confusion(y, yhat)
    precision, recall, f1 = precision_recall_f1(overall)
    auc = roc_auc(s, y)
    id_mask = flags == Identity.IDENTITY.value
    non_mask = flags == Identity.NON_IDENTITY.value
    excluded = int((~(id_mask | non_mask)).sum())
    identity = _subgroup(y, yhat, id_mask)
    non_identity = _subgroup(y, yhat, non_mask)

    def ratio(a: SubgroupMetrics, b: SubgroupMetrics, rate: str) -> float | None:
        a_val, a_ok = (a.fpr, a.fpr_defined) if rate == "fpr" else (a.fnr, a.fnr_defined)
        b_val, b_ok = (b.fpr, b.fpr_defined) if rate == "fpr" else (b.fnr, b.fnr_defined)
        if not (a_ok and b_ok) or b_val == 0.0:
            return None
        return a_val / b_val

    return FairnessReport(
        auc=auc,
        precision=precision,
        recall=recall,
        f1=f1,
        overall=overall,
        identity=identity,
        non_identity=non_identity,
        fpr_ratio=ratio(identity, non_identity, "fpr"),
        fnr_ratio=ratio(identity, non_identity, "fnr"),
        excluded_unannotated=excluded,
        threshold=threshold,
    )


def two_proportion_test(k1: int, n1: int, k2: int, n2: int) -> tuple[float, float]:
    """Pooled two-proportion z statistic and its two-sided normal p-value.

    The tail is computed as erfc(|z| / sqrt(2)), accurate to better than
    1e-12 absolute; it underflows to exactly 0 for |z| beyond roughly 75.
    Degenerate pooled proportions (0 or 1) imply equal observed proportions
    and return (0.0, 1.0).
    """
    if n1 <= 0 or n2 <= 0:
        raise ValueError("sample sizes must be positive")
    if not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise ValueError("success counts must lie within their sample sizes")
    p1 = k1 / n1
    p2 = k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    if pooled == 0.0 or pooled == 1.0:
        return 0.0, 1.0
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (p1 - p2) / se
    p_two_sided = math.erfc(abs(z) / math.sqrt(2.0))
    return z, p_two_sided
