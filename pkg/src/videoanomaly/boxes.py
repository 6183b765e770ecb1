"""Bounding boxes: normalization, IoU, and overlay drawing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OVERLAY_COLOR = (255, 0, 0)
OVERLAY_STROKE = 3


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel rectangle; corners are stored in canonical order."""

    x1: float
    y1: float
    x2: float
    y2: float
    confidence: float = 1.0

    def __post_init__(self) -> None:
        for name in ("x1", "y1", "x2", "y2", "confidence"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.x2 < self.x1 or self.y2 < self.y1:
            raise ValueError("box corners not in canonical order")

    @classmethod
    def from_corners(
        cls,
        x1: float,
        y1: float,
        x2: float,
        y2: float,
        confidence: float = 1.0,
    ) -> "BoundingBox":
        """Build a box from possibly swapped corners, clamping confidence to [0, 1]."""
        return cls(
            x1=min(x1, x2),
            y1=min(y1, y2),
            x2=max(x1, x2),
            y2=max(y1, y2),
            confidence=min(max(confidence, 0.0), 1.0),
        )

    def clamped(self, frame_width: float, frame_height: float) -> "BoundingBox":
        clip_x = lambda v: min(max(v, 0.0), float(frame_width))  # noqa: E731
        clip_y = lambda v: min(max(v, 0.0), float(frame_height))  # noqa: E731
        return BoundingBox(
            x1=clip_x(self.x1),
            y1=clip_y(self.y1),
            x2=clip_x(self.x2),
            y2=clip_y(self.y2),
            confidence=self.confidence,
        )

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def to_dict(self) -> dict:
        return {
            "x1": self.x1,
            "y1": self.y1,
            "x2": self.x2,
            "y2": self.y2,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundingBox":
        return cls(
            x1=float(data["x1"]),
            y1=float(data["y1"]),
            x2=float(data["x2"]),
            y2=float(data["y2"]),
            confidence=float(data.get("confidence", 1.0)),
        )


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union; zero-area inputs overlap nothing."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def overlay_boxes(frame: np.ndarray, boxes: list[BoundingBox]) -> np.ndarray:
    """Draw rectangle outlines on a copy of an HxWx3 frame.

    The stroke band is the set of integer pixels inside the (rounded,
    clamped) box but not inside the box shrunk by the stroke width on every
    side. The input array is never modified.
    """
    out = frame.copy()
    height, width = out.shape[:2]
    for box in boxes:
        x1 = int(round(max(box.x1, 0.0)))
        y1 = int(round(max(box.y1, 0.0)))
        x2 = int(round(min(box.x2, float(width - 1))))
        y2 = int(round(min(box.y2, float(height - 1))))
        if x2 < x1 or y2 < y1:
            continue
        s = OVERLAY_STROKE
        mask = np.zeros((height, width), dtype=bool)
        mask[y1 : y2 + 1, x1 : x2 + 1] = True
        if y2 - y1 + 1 > 2 * s and x2 - x1 + 1 > 2 * s:
            mask[y1 + s : y2 + 1 - s, x1 + s : x2 + 1 - s] = False
        out[mask] = OVERLAY_COLOR
    return out
