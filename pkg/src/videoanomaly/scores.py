"""Numeric core for anomaly score series.

Pure functions over frame-aligned score series: suspicious-window search,
surrogate video score, refinement gate, variance margin, Gaussian smoothing
and frame expansion. Everything here is deterministic and side-effect free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import MalformedScore

# Scores a model may legally answer with: 0, 0.1, ..., 0.9, 1.0.
SCORE_TOKENS: tuple[str, ...] = (
    "0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "1.0",
)
SCORE_VALUES: tuple[float, ...] = tuple(float(t) for t in SCORE_TOKENS)

# Adaptive margins are clamped so the gate band stays inside (0, 1).
ADAPTIVE_MARGIN_MAX = 0.45

_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")
_PLAIN_DECIMAL_RE = re.compile(r"^\d+(\.\d+)?$")


def positions_for(total_frames: int, stride: int) -> int:
    """Number of scored positions for a video of `total_frames` at `stride`."""
    return (total_frames + stride - 1) // stride


@dataclass(frozen=True)
class ScoreSeries:
    """Frame-aligned anomaly scores, one value per stride block.

    Value k covers frames [k*stride + 1, (k+1)*stride] (1-based, clipped to
    total_frames). Length is always ceil(total_frames / stride).
    """

    values: tuple[float, ...]
    stride: int
    total_frames: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.total_frames < 1:
            raise ValueError("total_frames must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not self.values:
            raise ValueError("score series may not be empty")
        expected = positions_for(self.total_frames, self.stride)
        if len(self.values) != expected:
            raise ValueError(
                f"series has {len(self.values)} values, expected {expected} "
                f"for T={self.total_frames}, stride={self.stride}"
            )
        for v in self.values:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"score {v} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.values)

    def center_frames(self) -> list[int]:
        """1-based frame index at the start of each stride block."""
        return [1 + k * self.stride for k in range(len(self.values))]


@dataclass(frozen=True)
class SuspicionWindow:
    """Contiguous frame interval with the mean of the scores it covers."""

    start: int
    end: int
    mean_score: float
    length: int

    def __post_init__(self) -> None:
        if self.start < 1 or self.end < self.start:
            raise ValueError("window bounds must satisfy 1 <= start <= end")
        if self.end - self.start + 1 != self.length:
            raise ValueError("window length inconsistent with bounds")
        if not 0.0 <= self.mean_score <= 1.0:
            raise ValueError("window mean outside [0, 1]")


def _in_gate_band(surrogate: float, margin: float, boundary: float) -> bool:
    # interval form rather than abs(): keeps both band edges inclusive under
    # floating point (e.g. surrogate 0.55, boundary 0.5, margin 0.05)
    return (boundary - margin) <= surrogate <= (boundary + margin)


@dataclass(frozen=True)
class GateDecision:
    """Outcome of the selective-refinement gate around the decision boundary."""

    surrogate: float
    margin: float
    boundary: float
    refine: bool
    margin_mode: str = "fixed"

    def __post_init__(self) -> None:
        if self.margin < 0.0 or self.margin >= 0.5:
            raise ValueError("margin must lie in [0, 0.5)")
        if self.refine != _in_gate_band(self.surrogate, self.margin, self.boundary):
            raise ValueError("refine flag inconsistent with surrogate/margin")


@dataclass(frozen=True)
class SmoothingConfig:
    """Gaussian smoothing parameters; radius = floor(truncate * sigma + 0.5)."""

    sigma: float = 10.0
    truncate: float = 4.0
    boundary: str = "reflect"

    def __post_init__(self) -> None:
        if self.sigma <= 0 or self.truncate <= 0:
            raise ValueError("sigma and truncate must be positive")
        if self.boundary != "reflect":
            raise ValueError("only reflect boundary handling is supported")
        if self.radius < 1:
            raise ValueError("sigma * truncate too small: kernel radius < 1")

    @property
    def radius(self) -> int:
        return int(self.truncate * self.sigma + 0.5)

    def kernel(self) -> np.ndarray:
        """Normalized discrete Gaussian, indices -radius..radius."""
        r = self.radius
        k = np.arange(-r, r + 1, dtype=np.float64)
        w = np.exp(-(k * k) / (2.0 * self.sigma * self.sigma))
        return w / w.sum()


def parse_score_token(text: str) -> float:
    """Extract the first bracketed score that belongs to the allowed set.

    Membership is exact (no snapping): the bracket content, after trimming
    whitespace, must be a plain decimal equal in value to one of
    0, 0.1, ..., 1.0. Raises MalformedScore otherwise.
    """
    for match in _BRACKET_RE.finditer(text):
        token = match.group(1).strip()
        if not _PLAIN_DECIMAL_RE.match(token):
            continue
        value = float(token)
        if value in SCORE_VALUES:
            return value
    raise MalformedScore(f"no bracketed score from the allowed set in: {text!r}")


def admissible_window_length(total_frames: int, floor: int = 300, divisor: int = 10) -> int:
    """Suspicious-window length in frames: max(floor, T // divisor), capped at T."""
    return min(total_frames, max(floor, total_frames // divisor))


def _coverage(start: int, window_frames: int, stride: int) -> tuple[int, int]:
    """Score positions (first, last) covered by frames [start, start+l-1]."""
    first = (start - 1) // stride
    last = (start + window_frames - 2) // stride
    return first, last


def sliding_window_max_mean(series: ScoreSeries, window_frames: int) -> SuspicionWindow:
    """Find the window of `window_frames` frames with the highest mean score.

    The mean is the unweighted arithmetic mean of the score positions the
    frame window overlaps. Ties break to the smallest start frame; lengths
    beyond the video are clamped to the full video.
    """
    if window_frames < 1:
        raise ValueError("window length must be >= 1")
    t = series.total_frames
    stride = series.stride
    length = min(window_frames, t)
    s_max = t - length + 1

    # The covered-position pair (first, last) is a step function of the start
    # frame; it only changes where either endpoint crosses a block boundary.
    # Evaluating one candidate per step segment is exhaustive over windows.
    a_changes = np.arange(stride + 1, s_max + 1, stride, dtype=np.int64)
    k_lo = (length + stride - 1) // stride
    k_hi = (s_max + length - 2) // stride
    b_changes = np.arange(k_lo, k_hi + 1, dtype=np.int64) * stride - length + 2
    b_changes = b_changes[(b_changes >= 2) & (b_changes <= s_max)]
    cand = np.unique(np.concatenate((np.array([1], dtype=np.int64), a_changes, b_changes)))

    first = (cand - 1) // stride
    last = (cand + length - 2) // stride
    counts = last - first + 1

    # Each window is summed independently (not via prefix differences) so
    # windows with identical covered values tie bit-exactly and the earliest
    # start wins, even on constant series.
    values_arr = np.asarray(series.values, dtype=np.float64)
    means = np.empty(len(cand), dtype=np.float64)
    for count in np.unique(counts):
        run_sums = np.lib.stride_tricks.sliding_window_view(values_arr, int(count)).sum(axis=1)
        mask = counts == count
        means[mask] = run_sums[first[mask]] / count

    best = int(np.argmax(means))  # first occurrence wins on ties
    start = int(cand[best])
    return SuspicionWindow(
        start=start,
        end=start + length - 1,
        mean_score=float(means[best]),
        length=length,
    )


def surrogate_score(window: SuspicionWindow) -> float:
    """Video-level anomaly probability: the mean of the most suspicious window."""
    return window.mean_score


def variance_margin(series: ScoreSeries) -> float:
    """Population variance of the score values; always within [0, 0.25].

    Exactly zero for constant series (np.var alone leaves ~1e-33 residue).
    """
    values = np.asarray(series.values, dtype=np.float64)
    if np.all(values == values[0]):
        return 0.0
    return float(np.var(values))


def adaptive_margin(series: ScoreSeries) -> float:
    """Per-video gate margin from score variance, clamped to keep the band valid."""
    return min(variance_margin(series), ADAPTIVE_MARGIN_MAX)


def gate_decision(
    surrogate: float,
    margin: float,
    boundary: float = 0.5,
    margin_mode: str = "fixed",
) -> GateDecision:
    """Decide whether a second reasoning pass runs.

    Refinement triggers iff the surrogate lies inside [boundary - margin,
    boundary + margin]; both band edges are inclusive.
    """
    if not 0.0 <= margin < 0.5:
        raise ValueError("margin must lie in [0, 0.5)")
    if not 0.0 < boundary < 1.0:
        raise ValueError("boundary must lie in (0, 1)")
    refine = _in_gate_band(surrogate, margin, boundary)
    return GateDecision(
        surrogate=surrogate,
        margin=margin,
        boundary=boundary,
        refine=refine,
        margin_mode=margin_mode,
    )


def gaussian_smooth(series: ScoreSeries, config: SmoothingConfig | None = None) -> ScoreSeries:
    """Smooth a score series with a normalized Gaussian kernel.

    Boundary handling mirrors the series into the padding (v[-1-j] = v[j],
    v[n+j] = v[n-1-j], repeating reflections for deep pads). Output values
    are clamped to [0, 1].
    """
    cfg = config or SmoothingConfig()
    kernel = cfg.kernel()
    values = np.asarray(series.values, dtype=np.float64)
    padded = np.pad(values, cfg.radius, mode="symmetric")
    smoothed = np.convolve(padded, kernel, mode="valid")
    smoothed = np.clip(smoothed, 0.0, 1.0)
    return ScoreSeries(
        values=tuple(float(v) for v in smoothed),
        stride=series.stride,
        total_frames=series.total_frames,
    )


def expand_to_frames(series: ScoreSeries) -> np.ndarray:
    """Per-frame score vector of length total_frames (zero-order hold per block)."""
    values = np.asarray(series.values, dtype=np.float64)
    frame_idx = np.arange(series.total_frames, dtype=np.int64)
    return values[frame_idx // series.stride]


def replace_scores(series: ScoreSeries, values: list[float] | tuple[float, ...]) -> ScoreSeries:
    """New series with the same geometry but different values."""
    return ScoreSeries(values=tuple(values), stride=series.stride, total_frames=series.total_frames)


def series_to_dict(series: ScoreSeries) -> dict:
    return {
        "values": list(series.values),
        "stride": series.stride,
        "total_frames": series.total_frames,
    }


def series_from_dict(data: dict) -> ScoreSeries:
    return ScoreSeries(
        values=tuple(data["values"]),
        stride=int(data["stride"]),
        total_frames=int(data["total_frames"]),
    )


def window_to_dict(window: SuspicionWindow) -> dict:
    return {
        "start": window.start,
        "end": window.end,
        "mean_score": window.mean_score,
        "length": window.length,
    }


def window_from_dict(data: dict) -> SuspicionWindow:
    return SuspicionWindow(
        start=int(data["start"]),
        end=int(data["end"]),
        mean_score=float(data["mean_score"]),
        length=int(data["length"]),
    )


def gate_to_dict(gate: GateDecision) -> dict:
    return {
        "surrogate": gate.surrogate,
        "margin": gate.margin,
        "boundary": gate.boundary,
        "refine": gate.refine,
        "margin_mode": gate.margin_mode,
    }


def gate_from_dict(data: dict) -> GateDecision:
    return GateDecision(
        surrogate=float(data["surrogate"]),
        margin=float(data["margin"]),
        boundary=float(data["boundary"]),
        refine=bool(data["refine"]),
        margin_mode=str(data["margin_mode"]),
    )
