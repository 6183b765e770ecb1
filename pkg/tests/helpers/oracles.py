"""Independent brute-force oracles the implementation is checked against.

Each oracle deliberately recomputes its answer from first principles (plain
loops, explicit set intersections, exact fractions) rather than sharing code
with the library.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def window_scan(values: list[float], stride: int, total_frames: int, window_frames: int):
    """Exhaustive scan over every start frame; returns (start, mean).

    Coverage uses the same running-sum prefix arithmetic as plain Python
    accumulation, so the winning mean is bit-identical to sequential
    summation of the covered block.
    """
    length = min(window_frames, total_frames)
    prefix = [0.0]
    for v in values:
        prefix.append(prefix[-1] + v)
    best_start, best_mean = None, None
    for start in range(1, total_frames - length + 2):
        end = start + length - 1
        first = (start - 1) // stride
        last = (end - 1) // stride
        mean = (prefix[last + 1] - prefix[first]) / (last + 1 - first)
        if best_mean is None or mean > best_mean:
            best_start, best_mean = start, mean
    return best_start, best_mean


def window_scan_blocks(values: list[float], stride: int, total_frames: int, window_frames: int):
    """Tiny-case oracle: coverage found by explicit block/window intersection."""
    length = min(window_frames, total_frames)
    blocks = []
    for k in range(len(values)):
        lo = k * stride + 1
        hi = min((k + 1) * stride, total_frames)
        blocks.append((lo, hi))
    best = None
    for start in range(1, total_frames - length + 2):
        end = start + length - 1
        covered = [values[k] for k, (lo, hi) in enumerate(blocks) if not (hi < start or lo > end)]
        mean = sum(covered) / len(covered)
        if best is None or mean > best[1] + 1e-15:
            best = (start, mean)
    return best


def smooth_direct(values: list[float], sigma: float, truncate: float) -> list[float]:
    """O(n * radius) reflect-boundary convolution with explicit index mirroring."""
    n = len(values)
    radius = int(truncate * sigma + 0.5)
    offsets = list(range(-radius, radius + 1))
    weights = [float(np.exp(-(k * k) / (2.0 * sigma * sigma))) for k in offsets]
    total = sum(weights)
    weights = [w / total for w in weights]

    def reflect(i: int) -> int:
        m = i % (2 * n)
        return m if m < n else 2 * n - 1 - m

    out = []
    for i in range(n):
        acc = 0.0
        for k, w in zip(offsets, weights):
            acc += w * values[reflect(i + k)]
        out.append(min(max(acc, 0.0), 1.0))
    return out


def pairwise_auc(scores, labels) -> float:
    """O(n^2) rank statistic: wins count 1, ties 0.5."""
    scores = list(map(float, scores))
    labels = list(map(bool, labels))
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def pairwise_auc_numpy(scores, labels) -> float:
    """Same O(n^2) pairwise statistic, via a full comparison matrix."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    pos = s[y][:, None]
    neg = s[~y][None, :]
    wins = (pos > neg).sum() + 0.5 * (pos == neg).sum()
    return float(wins / (pos.shape[0] * neg.shape[1]))


def threshold_ap_numpy(scores, labels) -> float:
    """AP by recounting the entire sample at every distinct threshold."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    n_pos = int(y.sum())
    ap = 0.0
    prev_recall = 0.0
    for t in sorted(set(s.tolist()), reverse=True):
        mask = s >= t
        tp = int((mask & y).sum())
        precision = tp / int(mask.sum())
        recall = tp / n_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def threshold_ap(scores, labels) -> float:
    """AP by re-scanning the whole sample at every distinct threshold."""
    scores = list(map(float, scores))
    labels = list(map(bool, labels))
    n_pos = sum(labels)
    thresholds = sorted(set(scores), reverse=True)
    ap = 0.0
    prev_recall = 0.0
    for t in thresholds:
        tp = sum(1 for s, y in zip(scores, labels) if s >= t and y)
        predicted = sum(1 for s in scores if s >= t)
        precision = tp / predicted
        recall = tp / n_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def exact_floor_linspace(start: int, end: int, count: int) -> list[int]:
    """floor(linspace) in exact rational arithmetic."""
    if count == 1:
        return [start]
    step = Fraction(end - start, count - 1)
    return [int(Fraction(start) + i * step) for i in range(count)]


def lcs_table(a: list[str], b: list[str]) -> int:
    """Full dynamic-programming LCS table (quadratic memory)."""
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def overlay_reference(frame: np.ndarray, box, stroke: int, color) -> np.ndarray:
    """Per-pixel predicate rasterizer for one rectangle outline."""
    out = frame.copy()
    height, width = frame.shape[:2]
    x1 = int(round(max(box.x1, 0.0)))
    y1 = int(round(max(box.y1, 0.0)))
    x2 = int(round(min(box.x2, float(width - 1))))
    y2 = int(round(min(box.y2, float(height - 1))))
    for y in range(height):
        for x in range(width):
            inside = x1 <= x <= x2 and y1 <= y <= y2
            if not inside:
                continue
            in_core = (
                x1 + stroke <= x <= x2 - stroke
                and y1 + stroke <= y <= y2 - stroke
                and (y2 - y1 + 1) > 2 * stroke
                and (x2 - x1 + 1) > 2 * stroke
            )
            if not in_core:
                out[y, x] = color
    return out
