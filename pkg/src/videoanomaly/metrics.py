"""Evaluation metrics: ranking, localization, and text similarity.

ROC-AUC uses the rank statistic with 0.5 credit for ties — stride-expanded
score vectors are massively tied, and trapezoid integration without tie
handling would be biased. AP groups tied scores into one threshold step.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from math import exp, log
from typing import Mapping, Sequence

import numpy as np

from .boxes import BoundingBox, iou
from .errors import DegenerateLabels, EmptyText, NoAnnotatedFrames

ROUGE_BETA = 1.2

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _as_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d and equally long")
    return s, y


def tied_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the group average."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative (ties: 0.5)."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("roc_auc needs both positive and negative labels")
    ranks = tied_ranks(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """AP over descending-score thresholds; tied scores enter together."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise DegenerateLabels("average_precision needs at least one positive")
    order = np.argsort(-s, kind="mergesort")
    s_desc = s[order]
    y_desc = y[order].astype(np.float64)
    tp = np.cumsum(y_desc)
    total = np.arange(1, len(s_desc) + 1, dtype=np.float64)
    # last index of each tied group = a complete threshold step
    boundary = np.nonzero(np.diff(s_desc))[0]
    last = np.concatenate((boundary, [len(s_desc) - 1]))
    precision = tp[last] / total[last]
    recall = tp[last] / n_pos
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * precision))


def tiou(
    predictions: Mapping,
    ground_truth: Mapping,
    threshold: float = 0.5,
) -> float:
    """Mean confidence-gated IoU over annotated anomalous frames.

    Keys identify frames (any hashable; use (video_id, frame) across videos).
    Per frame, the highest-confidence predicted box competes against its
    best-matching ground-truth box; predictions below the confidence
    threshold, and frames with no prediction, contribute zero.
    """
    annotated = [key for key, boxes in ground_truth.items() if boxes]
    if not annotated:
        raise NoAnnotatedFrames("ground truth has no annotated frames")
    total = 0.0
    for key in annotated:
        pred_boxes: Sequence[BoundingBox] = predictions.get(key, [])
        if not pred_boxes:
            continue
        best = max(pred_boxes, key=lambda b: b.confidence)
        if best.confidence < threshold:
            continue
        total += max(iou(best, gt) for gt in ground_truth[key])
    return total / len(annotated)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def _ngram_counts(tokens: list[str], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu(candidate: str, reference: str, max_order: int = 4, smooth: bool = False) -> float:
    """BLEU with uniform 1..4-gram weights, clipped counts, brevity penalty.

    Without smoothing any zero n-gram precision makes the score 0; the
    add-one variant (smooth=True) is available for short texts.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        raise EmptyText("bleu requires non-empty candidate and reference")
    log_sum = 0.0
    for order in range(1, max_order + 1):
        cand_counts = _ngram_counts(cand, order)
        ref_counts = _ngram_counts(ref, order)
        overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = sum(cand_counts.values())
        if smooth:
            precision = (overlap + 1.0) / (total + 1.0)
        else:
            if overlap == 0 or total == 0:
                return 0.0
            precision = overlap / total
        log_sum += log(precision) / max_order
    c, r = len(cand), len(ref)
    brevity = exp(1.0 - r / c) if c < r else 1.0
    return brevity * exp(log_sum)


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for token in a:
        curr = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[len(b)]


def rouge_l(candidate: str, reference: str, beta: float = ROUGE_BETA) -> float:
    """LCS F-measure with a fixed recall weight (beta)."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        raise EmptyText("rouge_l requires non-empty candidate and reference")
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    beta_sq = beta * beta
    return ((1.0 + beta_sq) * recall * precision) / (recall + beta_sq * precision)


@dataclass
class MetricReport:
    """Computed metrics; None means 'not computable from the inputs given'."""

    auc: float | None = None
    ap: float | None = None
    tiou: float | None = None
    bleu: float | None = None
    rouge_l: float | None = None
    per_video: dict[str, dict[str, float | None]] = field(default_factory=dict)

    _OVERALL = ("auc", "ap", "tiou", "bleu", "rouge_l")

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "ap": self.ap,
            "tiou": self.tiou,
            "bleu": self.bleu,
            "rouge_l": self.rouge_l,
            "per_video": self.per_video,
        }

    def to_csv(self) -> str:
        lines = ["metric,value,present"]
        for name in self._OVERALL:
            value = getattr(self, name)
            if value is None:
                lines.append(f"{name},,absent")
            else:
                lines.append(f"{name},{value!r},present")
        return "\n".join(lines) + "\n"
