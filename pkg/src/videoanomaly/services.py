"""High-level model operations used by the pipeline stages.

Each operation renders a prompt bundle, consults the reply cache, invokes
the role's backend, and parses the reply. Roles (captioner, scorer, tagger,
localizer, describer) may share one backend or point at different servers.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

from PIL import Image

from .backend import Backend, CompletionRequest
from .cache import ResponseCache, cached_call
from .boxes import BoundingBox
from .errors import EmptyCaption, MalformedScore
from .parsers import parse_bbox_list, parse_tag_list
from .prompts import DEFAULT_TAG_CAP, PromptBundle, PromptRegistry, TagList
from .sampling import ClipSpec
from .scores import parse_score_token

logger = logging.getLogger(__name__)

ROLES = ("captioner", "scorer", "tagger", "localizer", "describer")

SCORE_FALLBACK = 0.5

_size_lock = threading.Lock()
_size_cache: dict[str, tuple[int, int]] = {}


def image_size(path: str) -> tuple[int, int]:
    """(width, height) of an image file, cached per path."""
    with _size_lock:
        cached = _size_cache.get(path)
    if cached is not None:
        return cached
    with Image.open(path) as img:
        size = img.size
    with _size_lock:
        _size_cache[path] = size
    return size


@dataclass
class RoleBinding:
    """A backend plus its cache and retry budget for one role."""

    backend: Backend
    cache: ResponseCache | None = None
    max_retries: int = 2
    supports_system_prompt: bool = True


class ModelServices:
    """Facade over all model-backed operations.

    Replies are cached by request fingerprint; a warm cache answers without
    any backend call. Parse-level retries (for the scorer) bypass the cache
    read so a cached malformed reply cannot wedge a run.
    """

    def __init__(
        self,
        bindings: dict[str, RoleBinding],
        registry: PromptRegistry | None = None,
        temperature: float = 0.0,
        tag_cap: int = DEFAULT_TAG_CAP,
        strict_parsing: bool = False,
    ):
        missing = [role for role in ROLES if role not in bindings]
        if missing:
            raise ValueError(f"missing role bindings: {missing}")
        self.bindings = bindings
        self.registry = registry or PromptRegistry()
        self.temperature = temperature
        self.tag_cap = tag_cap
        self.strict_parsing = strict_parsing

    def _complete(self, role: str, bundle: PromptBundle) -> str:
        binding = self.bindings[role]
        if not binding.supports_system_prompt:
            bundle = bundle.without_system_role()
        request = CompletionRequest(bundle=bundle, temperature=self.temperature)
        key = request.fingerprint(binding.backend.model_name)
        return cached_call(binding.cache, key, lambda: binding.backend.complete(request).text)

    def _complete_fresh(self, role: str, bundle: PromptBundle) -> str:
        """Backend call that skips the cache read (still refreshes the entry)."""
        binding = self.bindings[role]
        if not binding.supports_system_prompt:
            bundle = bundle.without_system_role()
        request = CompletionRequest(bundle=bundle, temperature=self.temperature)
        text = binding.backend.complete(request).text
        if binding.cache is not None:
            binding.cache.put(request.fingerprint(binding.backend.model_name), text)
        return text

    def caption_clip(self, clip: ClipSpec, frame_paths: list[str]) -> str:
        """One captioner call per clip; blank replies are an error."""
        bundle = self.registry.build_caption_prompt(tuple(frame_paths))
        caption = self._complete("captioner", bundle).strip()
        if not caption:
            raise EmptyCaption(f"captioner returned blank text for clip at frame {clip.center_frame}")
        return caption

    def score_caption(
        self,
        caption: str,
        dataset_prior: str,
        tags: TagList | None = None,
    ) -> float:
        """Score one caption in [0, 1].

        Malformed replies are retried up to the scorer's retry budget, then
        fall back to maximal uncertainty (0.5) with a warning; a single
        unparseable clip must not abort a long run.
        """
        bundle = self.registry.build_vad_prompt(dataset_prior, caption, tags)
        binding = self.bindings["scorer"]
        reply = self._complete("scorer", bundle)
        for attempt in range(binding.max_retries + 1):
            try:
                return parse_score_token(reply)
            except MalformedScore:
                if attempt == binding.max_retries:
                    break
                reply = self._complete_fresh("scorer", bundle)
        logger.warning("scorer reply stayed malformed after retries; falling back to %.1f", SCORE_FALLBACK)
        return SCORE_FALLBACK

    def extract_tags(self, window_frame_paths: list[str]) -> TagList:
        """Tag phrases for the suspicious window; parse failures yield no tags."""
        bundle = self.registry.build_extract_prompt(tuple(window_frame_paths))
        reply = self._complete("tagger", bundle)
        tags = parse_tag_list(reply, cap=self.tag_cap, strict=self.strict_parsing)
        if not tags and reply.strip() not in ("[]", ""):
            logger.warning("tag extraction reply had no parseable list: %r", reply[:120])
        return tags

    def localize_frame(self, frame_path: str, tags: TagList | None = None) -> list[BoundingBox]:
        """Predicted boxes for one frame, clamped to the frame bounds."""
        bundle = self.registry.build_loc_prompt(frame_path, tags)
        reply = self._complete("localizer", bundle)
        width, height = image_size(frame_path)
        boxes = parse_bbox_list(reply, width, height, strict=self.strict_parsing)
        if not boxes and reply.strip() not in ("[]", ""):
            logger.warning("localization reply had no parseable boxes: %r", reply[:120])
        return boxes

    def describe_video(self, frame_paths: list[str], tags: TagList | None = None) -> str:
        """Final textual judgment over the selected frames."""
        bundle = self.registry.build_vau_prompt(tuple(frame_paths), tags)
        text = self._complete("describer", bundle).strip()
        if not text:
            raise EmptyCaption("describer returned blank text")
        return text
