"""ROC curves, the partial-AUC estimator, and ranking-loss diagnostics.

All quantities here are rank-based: they are invariant under strictly
increasing transforms of the scores.  The partial AUC over the false
positive range (0, t) is estimated by counting diseased/non-diseased score
pairs that are correctly ordered, restricted to non-diseased subjects whose
score exceeds the empirical (1-t) quantile of non-diseased scores.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingleClass

TIE_STRICT = "strict"
TIE_HALF_CREDIT = "half-credit"
_TIE_POLICIES = (TIE_STRICT, TIE_HALF_CREDIT)

# Absorbs float error in (1 - t) * K before taking the ceiling, e.g.
# (1 - 0.1) * 50 = 45.000000000000007 must index the 45th order statistic.
_QUANTILE_FUZZ = 1e-9


@dataclass(frozen=True)
class PaucSpec:
    """Partial-AUC evaluation window: FPR range (0, t) plus tie handling.

    Under ``strict`` tie handling, tied diseased/non-diseased pairs count
    zero; under ``half-credit`` they count one half (the Mann-Whitney
    convention, and the default for reporting).
    """

    t: float = 0.2
    tie_policy: str = TIE_HALF_CREDIT

    def __post_init__(self):
        if not (0.0 < self.t <= 1.0):
            raise ValueError(f"t must lie in (0, 1], got {self.t}")
        if self.tie_policy not in _TIE_POLICIES:
            raise ValueError(f"tie_policy must be one of {_TIE_POLICIES}")


@dataclass(frozen=True)
class RocCurve:
    """Empirical ROC curve: (fpr, tpr) points from (0,0) to (1,1)."""

    points: np.ndarray
    auc: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class PaucResult:
    """Partial AUC value together with the realized quantile threshold.

    ``contributing_negatives`` counts non-diseased subjects scoring
    strictly above the threshold; ``tie_excluded`` counts those excluded
    only because they tie the threshold exactly (beyond the order statistic
    itself), which flags the ambiguous bulk-tie case.
    """

    value: float
    t: float
    threshold: float
    contributing_negatives: int
    tie_excluded: int = 0


def split_scores(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """Split scores into (diseased, non-diseased) groups, validating labels."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be matching 1-d arrays")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    if pos.size + neg.size != scores.size:
        raise ValueError("labels must be +1 or -1")
    if pos.size == 0 or neg.size == 0:
        raise SingleClass("scores must cover both classes")
    return pos, neg


def negative_quantile(neg: np.ndarray, t: float) -> tuple[float, int]:
    """Lower empirical (1-t) quantile of non-diseased scores.

    Returns (threshold, m) where the threshold is the m-th smallest
    non-diseased score with m = ceil((1-t)*K); when m == 0 (t == 1) the
    threshold is -inf so every negative contributes.
    """
    K = neg.size
    m = math.ceil((1.0 - t) * K - _QUANTILE_FUZZ)
    m = max(m, 0)
    if m == 0:
        return -math.inf, 0
    return float(np.partition(neg, m - 1)[m - 1]), m


def roc_curve(scores, labels) -> RocCurve:
    """Empirical ROC curve via a descending-threshold sweep.

    Tied scores collapse into a single sweep step (a diagonal segment);
    the trapezoidal area then equals the tie-corrected Mann-Whitney
    statistic.
    """
    pos, neg = split_scores(scores, labels)
    J, K = pos.size, neg.size
    values = np.unique(np.concatenate([pos, neg]))[::-1]
    pos_sorted = np.sort(pos)
    neg_sorted = np.sort(neg)
    # counts of scores >= each sweep value, per class
    tp = J - np.searchsorted(pos_sorted, values, side="left")
    fp = K - np.searchsorted(neg_sorted, values, side="left")
    fpr = np.concatenate([[0.0], fp / K])
    tpr = np.concatenate([[0.0], tp / J])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) * 0.5))
    return RocCurve(np.column_stack([fpr, tpr]), auc)


def pauc_estimate(scores, labels, spec: PaucSpec) -> PaucResult:
    """Nonparametric partial-AUC estimate over the FPR range (0, t).

    Counts pairs (diseased j, non-diseased k) with score_j > score_k among
    negatives scoring strictly above the (1-t) quantile threshold, divided
    by J*K.  Under half-credit ties, tied pairs contribute 1/2.  The value
    always lies in [0, t].
    """
    pos, neg = split_scores(scores, labels)
    J, K = pos.size, neg.size
    threshold, m = negative_quantile(neg, spec.t)
    contributing = neg if m == 0 else neg[neg > threshold]
    expected = K - m
    tie_excluded = expected - contributing.size
    if contributing.size == 0:
        return PaucResult(0.0, spec.t, threshold, 0, int(tie_excluded))
    pos_sorted = np.sort(pos)
    above = J - np.searchsorted(pos_sorted, contributing, side="right")
    wins = float(np.sum(above))
    if spec.tie_policy == TIE_HALF_CREDIT:
        left = np.searchsorted(pos_sorted, contributing, side="left")
        right = np.searchsorted(pos_sorted, contributing, side="right")
        wins += 0.5 * float(np.sum(right - left))
    return PaucResult(
        wins / (J * K), spec.t, threshold, int(contributing.size), int(tie_excluded)
    )


def zero_one_push_loss(scores, labels, spec: PaucSpec) -> int:
    """Pushdown 0-1 ranking loss over the same FPR window as the pAUC.

    Each non-diseased subject scoring above the quantile threshold adds the
    number of diseased subjects with a strictly lower score.  For tie-free
    scores, minimizing this count is equivalent to maximizing the strict
    partial-AUC estimate at the same t.
    """
    pos, neg = split_scores(scores, labels)
    threshold, m = negative_quantile(neg, spec.t)
    contributing = neg if m == 0 else neg[neg > threshold]
    if contributing.size == 0:
        return 0
    pos_sorted = np.sort(pos)
    below = np.searchsorted(pos_sorted, contributing, side="left")
    return int(np.sum(below))


def pnorm_push_loss(scores, labels, p: float) -> float:
    """Per-negative inversion counts raised to the power p and summed.

    Larger p prices non-diseased subjects near the top of the ranked list
    more heavily.  Diagnostic only; there is no fitter for this loss.
    """
    if not (p >= 1.0 and math.isfinite(p)):
        raise ValueError(f"p must be a finite power >= 1, got {p}")
    pos, neg = split_scores(scores, labels)
    pos_sorted = np.sort(pos)
    counts = np.searchsorted(pos_sorted, neg, side="left").astype(np.float64)
    return float(np.sum(counts**p))


def logistic_losses(scores, labels, w: float = 1.0) -> tuple[float, float]:
    """Weighted logistic loss and weighted 0-1 loss at cutpoint zero.

    Returns (l_logistic, l_zero_one) where

        l_logistic = sum_j log(1+exp(-f_j)) + w * sum_k log(1+exp(f_k))
        l_zero_one = #{j: f_j <= 0} + w * #{k: f_k > 0}

    with j ranging over diseased and k over non-diseased subjects (classify
    as diseased when the score is strictly positive).  The bound
    l_logistic / log(2) >= l_zero_one holds for every input; a class may be
    empty here, in which case its sum is zero.
    """
    if w < 1.0:
        raise ValueError(f"w must be >= 1, got {w}")
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    if pos.size + neg.size != scores.size:
        raise ValueError("labels must be +1 or -1")
    l_logistic = math.fsum(np.logaddexp(0.0, -pos).tolist()) + w * math.fsum(
        np.logaddexp(0.0, neg).tolist()
    )
    l_zero_one = float(np.sum(pos <= 0.0)) + w * float(np.sum(neg > 0.0))
    return l_logistic, l_zero_one
