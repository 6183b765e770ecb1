"""Lenient parsers for structured model replies.

Frozen models decorate their outputs with chatter and code fences, so the
default mode scans for the first well-formed payload instead of demanding a
clean reply. Strict mode (for conformance testing) requires the whole reply
to be the payload.
"""

from __future__ import annotations

import json
import re

from .boxes import BoundingBox
from .prompts import DEFAULT_TAG_CAP, TagList

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n?|```")


def strip_code_fences(text: str) -> str:
    return _FENCE_RE.sub("", text)


def _split_top_level(body: str) -> list[str]:
    """Split a bracketless list body on commas outside quotes."""
    parts: list[str] = []
    buf: list[str] = []
    quote: str | None = None
    for ch in body:
        if quote is not None:
            buf.append(ch)
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
            buf.append(ch)
        elif ch == ",":
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def parse_tag_list(text: str, cap: int = DEFAULT_TAG_CAP, strict: bool = False) -> TagList:
    """Parse a Python-style list of phrases into a TagList.

    Returns an empty TagList when no list is found (lenient mode never
    raises). Strict mode requires the trimmed reply to be exactly the list.
    """
    cleaned = strip_code_fences(text)
    if strict:
        stripped = cleaned.strip()
        if not (stripped.startswith("[") and stripped.endswith("]")):
            return TagList((), cap=cap)
        body = stripped[1:-1]
    else:
        open_pos = cleaned.find("[")
        close_pos = cleaned.rfind("]")
        if open_pos == -1 or close_pos <= open_pos:
            return TagList((), cap=cap)
        body = cleaned[open_pos + 1 : close_pos]
    if not body.strip():
        return TagList((), cap=cap)
    return TagList(tuple(_split_top_level(body)), cap=cap)


def _candidate_arrays(text: str) -> list[list]:
    decoder = json.JSONDecoder()
    found: list[list] = []
    pos = text.find("[")
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(text, pos)
        except ValueError:
            pos = text.find("[", pos + 1)
            continue
        if isinstance(value, list):
            found.append(value)
        pos = text.find("[", pos + 1)
    return found


def _boxes_from_array(items: list, frame_width: float, frame_height: float) -> list[BoundingBox] | None:
    if not all(isinstance(item, dict) for item in items):
        return None
    boxes: list[BoundingBox] = []
    for item in items:
        coords = item.get("bbox_2d")
        if (
            not isinstance(coords, list)
            or len(coords) != 4
            or not all(isinstance(c, (int, float)) for c in coords)
        ):
            return None
        confidence = item.get("confidence", 1.0)
        if not isinstance(confidence, (int, float)):
            return None
        box = BoundingBox.from_corners(*[float(c) for c in coords], confidence=float(confidence))
        boxes.append(box.clamped(frame_width, frame_height))
    return boxes


def parse_bbox_list(
    text: str,
    frame_width: float,
    frame_height: float,
    strict: bool = False,
) -> list[BoundingBox]:
    """Extract predicted boxes from a reply.

    Accepts the first JSON array of {"bbox_2d": [x1, y1, x2, y2],
    "confidence": c} objects; corners are reordered and clamped to the frame,
    missing confidence defaults to 1.0. An empty array is a valid "nothing
    found" reply. Failures yield an empty list.
    """
    cleaned = strip_code_fences(text)
    if strict:
        try:
            value = json.loads(cleaned.strip())
        except ValueError:
            return []
        if not isinstance(value, list):
            return []
        arrays = [value]
    else:
        arrays = _candidate_arrays(cleaned)
    for items in arrays:
        if not items:
            return []
        boxes = _boxes_from_array(items, frame_width, frame_height)
        if boxes is not None:
            return boxes
    return []
