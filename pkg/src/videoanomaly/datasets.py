"""Manifests, ground-truth annotations, and label vectors.

File formats are deliberately plain:
  * manifest: JSON array of {video_id, frames_dir, fps, total_frames,
    dataset_prior_preset};
  * temporal: "video_id start end [start end ...]" per line, -1 sentinels
    for normal videos;
  * spatial: "video_id frame x1 y1 x2 y2" per line;
  * descriptions: "video_id<TAB>reference text" per line.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boxes import BoundingBox
from .errors import AnnotationError, ManifestError

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}

_INT_RE = re.compile(r"(\d+)")


@dataclass
class VideoManifest:
    video_id: str
    frames_dir: Path
    fps: float
    total_frames: int
    dataset_prior_preset: str = "base"
    frame_files: list[Path] = field(default_factory=list)

    def frame_path(self, index: int) -> str:
        """Path of the 1-based frame index."""
        if not 1 <= index <= self.total_frames:
            raise IndexError(f"frame {index} outside [1, {self.total_frames}]")
        return str(self.frame_files[index - 1])


def _list_frames(frames_dir: Path) -> list[Path]:
    return sorted(p for p in frames_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def _first_gap(files: list[Path]) -> int | None:
    """First missing integer in numerically named frame files, if inferable."""
    numbers = []
    for p in files:
        match = _INT_RE.search(p.stem)
        if match is None:
            return None
        numbers.append(int(match.group(1)))
    numbers.sort()
    for i, n in enumerate(numbers, start=numbers[0] if numbers else 0):
        if n != i:
            return i
    return None


def load_manifest(path: str | Path) -> list[VideoManifest]:
    """Load and validate a manifest, verifying frame counts on disk."""
    path = Path(path)
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ManifestError(f"{path}: cannot parse manifest: {exc}") from exc
    if not isinstance(entries, list):
        raise ManifestError(f"{path}: manifest must be a JSON array")

    manifests: list[VideoManifest] = []
    seen: set[str] = set()
    for idx, raw in enumerate(entries):
        where = f"{path} entry {idx}"
        if not isinstance(raw, dict):
            raise ManifestError(f"{where}: expected an object")
        try:
            video_id = str(raw["video_id"])
            frames_dir = Path(raw["frames_dir"])
            fps = float(raw["fps"])
            total_frames = int(raw["total_frames"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{where}: {exc}") from exc
        prior = str(raw.get("dataset_prior_preset", "base"))
        if video_id in seen:
            raise ManifestError(f"{where}: duplicate video_id {video_id!r}")
        seen.add(video_id)
        if fps <= 0:
            raise ManifestError(f"{where} ({video_id}): fps must be positive, got {fps}")
        if total_frames < 1:
            raise ManifestError(f"{where} ({video_id}): total_frames must be >= 1")
        if not frames_dir.is_absolute():
            frames_dir = path.parent / frames_dir
        if not frames_dir.is_dir():
            raise ManifestError(f"{where} ({video_id}): frames_dir {frames_dir} does not exist")
        files = _list_frames(frames_dir)
        if len(files) != total_frames:
            gap = _first_gap(files)
            hint = f"; first missing frame number appears to be {gap}" if gap is not None else ""
            raise ManifestError(
                f"{where} ({video_id}): frames_dir holds {len(files)} images, "
                f"manifest declares {total_frames}{hint}"
            )
        manifests.append(
            VideoManifest(
                video_id=video_id,
                frames_dir=frames_dir,
                fps=fps,
                total_frames=total_frames,
                dataset_prior_preset=prior,
                frame_files=files,
            )
        )
    return manifests


def _merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def load_temporal_annotations(path: str | Path) -> dict[str, list[tuple[int, int]]]:
    """Per-video anomalous intervals; -1 pairs (or no pairs) mean a normal video."""
    result: dict[str, list[tuple[int, int]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        video_id = tokens[0]
        numbers = tokens[1:]
        if len(numbers) % 2 != 0:
            raise AnnotationError(f"{path}:{lineno}: odd number of interval bounds")
        intervals: list[tuple[int, int]] = []
        for i in range(0, len(numbers), 2):
            try:
                start, end = int(numbers[i]), int(numbers[i + 1])
            except ValueError as exc:
                raise AnnotationError(f"{path}:{lineno}: non-integer bound: {exc}") from exc
            if start == -1 and end == -1:
                continue
            if start < 1 or end < start:
                raise AnnotationError(f"{path}:{lineno}: bad interval [{start}, {end}]")
            intervals.append((start, end))
        result[video_id] = _merge_intervals(intervals)
    return result


def frame_label_vector(manifest: VideoManifest, intervals: list[tuple[int, int]]) -> np.ndarray:
    """Boolean vector of length total_frames, true inside any interval."""
    labels = np.zeros(manifest.total_frames, dtype=bool)
    for start, end in intervals:
        if end > manifest.total_frames:
            raise AnnotationError(
                f"{manifest.video_id}: interval [{start}, {end}] exceeds T={manifest.total_frames}"
            )
        labels[start - 1 : end] = True
    return labels


def load_bbox_annotations(path: str | Path) -> dict[str, dict[int, list[BoundingBox]]]:
    """Per-video, per-frame ground-truth boxes; corners normalized, clamped at 0."""
    result: dict[str, dict[int, list[BoundingBox]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 6:
            raise AnnotationError(f"{path}:{lineno}: expected 'video_id frame x1 y1 x2 y2'")
        video_id = tokens[0]
        try:
            frame = int(tokens[1])
            coords = [float(t) for t in tokens[2:]]
        except ValueError as exc:
            raise AnnotationError(f"{path}:{lineno}: {exc}") from exc
        if frame < 1:
            raise AnnotationError(f"{path}:{lineno}: frame index must be >= 1")
        box = BoundingBox.from_corners(*coords)
        box = BoundingBox(
            x1=max(box.x1, 0.0),
            y1=max(box.y1, 0.0),
            x2=max(box.x2, 0.0),
            y2=max(box.y2, 0.0),
            confidence=box.confidence,
        )
        if box.area() == 0.0:
            logger.warning("%s:%d: zero-area ground-truth box retained", path, lineno)
        result.setdefault(video_id, {}).setdefault(frame, []).append(box)
    return result


def load_descriptions(path: str | Path) -> dict[str, str]:
    """Per-video reference descriptions, tab-separated."""
    result: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise AnnotationError(f"{path}:{lineno}: expected 'video_id<TAB>text'")
        video_id, text = line.split("\t", 1)
        result[video_id.strip()] = text.strip()
    return result


@dataclass
class AnnotationSet:
    """All ground truth for one evaluation run."""

    temporal: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    spatial: dict[str, dict[int, list[BoundingBox]]] = field(default_factory=dict)
    descriptions: dict[str, str] = field(default_factory=dict)
