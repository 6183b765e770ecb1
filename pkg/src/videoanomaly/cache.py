"""Content-addressed reply cache.

One UTF-8 file per reply under {cache_dir}/{model}/{key[:2]}/{key}, keyed by
the request fingerprint (rendered prompt + media digests + model name).
A warm cache makes re-runs free and interrupted batches resumable.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable

logger = logging.getLogger(__name__)


class ResponseCache:
    """Disk-backed reply store; safe for concurrent readers."""

    def __init__(self, cache_dir: str | Path, model_name: str):
        self.root = Path(cache_dir) / _safe_name(model_name)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / key

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not path.is_file():
            self.misses += 1
            return None
        try:
            value = path.read_text(encoding="utf-8")
        except OSError as exc:
            logger.warning("cache entry %s unreadable, treating as miss: %s", key, exc)
            self.misses += 1
            return None
        self.hits += 1
        return value

    def put(self, key: str, value: str) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(value, encoding="utf-8")
        tmp.replace(path)

    def delete(self, key: str) -> None:
        path = self._path(key)
        if path.is_file():
            path.unlink()


def cached_call(cache: ResponseCache | None, key: str, producer: Callable[[], str]) -> str:
    """Return the cached value for `key`, producing and persisting on a miss."""
    if cache is None:
        return producer()
    cached = cache.get(key)
    if cached is not None:
        return cached
    value = producer()
    cache.put(key, value)
    return value


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in name) or "model"
