"""Deterministic frame-index selection.

All samplers share one primitive: floor of N evenly spaced reals between two
inclusive endpoints, computed with exact integer arithmetic so results never
depend on floating-point rounding. Frame indices are 1-based everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scores import SuspicionWindow


def floor_linspace(start: int, end: int, count: int) -> list[int]:
    """floor(linspace(start, end, count)) with both endpoints included."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if end < start:
        raise ValueError("end must be >= start")
    if count == 1:
        return [start]
    span = end - start
    return [start + (i * span) // (count - 1) for i in range(count)]


def dedup_ordered(indices: list[int]) -> list[int]:
    seen: set[int] = set()
    out: list[int] = []
    for idx in indices:
        if idx not in seen:
            seen.add(idx)
            out.append(idx)
    return out


@dataclass(frozen=True)
class ClipSpec:
    """Frames fed to the captioner for one scored position."""

    center_frame: int
    indices: tuple[int, ...]
    radius_seconds: float
    fps: float
    clip_size: int


def clip_indices(
    center: int,
    total_frames: int,
    fps: float,
    radius_seconds: float = 10.0,
    clip_size: int = 10,
) -> ClipSpec:
    """Evenly sample clip frames around a center frame.

    The window spans radius_seconds of video on either side (clamped to the
    video bounds): L = 2*radius*fps + 1, half-width floor(L/2).
    """
    if not 1 <= center <= total_frames:
        raise ValueError(f"center {center} outside [1, {total_frames}]")
    if clip_size < 1:
        raise ValueError("clip_size must be >= 1")
    window_len = 2.0 * radius_seconds * fps + 1.0
    delta = int(math.floor(window_len / 2.0))
    a = max(1, center - delta)
    b = min(total_frames, center + delta)
    return ClipSpec(
        center_frame=center,
        indices=tuple(floor_linspace(a, b, clip_size)),
        radius_seconds=radius_seconds,
        fps=fps,
        clip_size=clip_size,
    )


def window_subsample(window: SuspicionWindow, cap: int = 180) -> list[int]:
    """At most `cap` evenly spaced frames from a suspicious window.

    Windows at or under the cap are returned whole; oversized windows are
    thinned with floor-linspace and deduplicated preserving order.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if window.length <= cap:
        return list(range(window.start, window.end + 1))
    return dedup_ordered(floor_linspace(window.start, window.end, cap))


def vau_frame_sample(
    total_frames: int,
    window: SuspicionWindow | None = None,
    count: int = 16,
) -> list[int]:
    """Frames shown to the describer: whole video, or the suspicious window.

    The window-based variant is used on the anomalous branch so the overlay
    frames come from the most suspicious segment.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if window is None:
        return dedup_ordered(floor_linspace(1, total_frames, count))
    return dedup_ordered(floor_linspace(window.start, window.end, count))
