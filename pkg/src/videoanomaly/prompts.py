"""Prompt templates and composition.

Templates are embedded verbatim and rendered by plain placeholder
substitution ({dataset_prior}, {tags}, {caption}); literal braces in the
JSON-format instructions survive untouched. A template directory can
override any entry with a UTF-8 text file of the same name.

Composition rules:
  * scoring prompt: the tag-injection sentence goes immediately after the
    head sentence of the system text, by direct concatenation;
  * localization prompt: the tagged variant is a separate template;
  * description prompt: the tag suffix is appended to the system text, by
    direct concatenation;
  * an empty tag list never injects anything — the rendered bytes equal the
    untagged variant.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from pathlib import Path

DEFAULT_TAG_CAP = 8

_BRACKET_CHARS = "[]"

DEFAULT_TEMPLATES: dict[str, str] = {
    "caption_system": (
        "You are an AI assistant analyzing this video segment. "
        "Summarize the main events or actions in a concise way."
    ),
    "vad_system_head": (
        "How would you rate the scene described on a scale from 0 to 1, "
        "with 0 representing a standard scene and 1 denoting a scene with "
        "{dataset_prior} activities?"
    ),
    "vad_system_tail": (
        "Please provide the response in the form of a Python list and "
        "respond with only one number in the provided list below "
        "[0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0] without any "
        "textual explanation. It should begin with '[' and end with  ']'."
    ),
    "vad_tag_injection": (
        "In addition, we have identified certain {dataset_prior} behaviors "
        "that may appear in the video. Please consider these carefully when "
        "deciding on the final anomaly rating. "
        "[Potentially reported suspicious activities: {tags}]"
    ),
    "extract_system": "You are an AI assistant analyzing a suspicious segment of a video. ",
    "extract_user": (
        "Analyze the video interval to identify any possible suspicious "
        "behaviors. Return your answer strictly as a Python-style list of "
        "phrases that could briefly describe the suspicious scene split by "
        "commas. No additional commentary or text, return only the list."
    ),
    "loc_user": (
        "Analyze this image and identify any suspicious or anomalous region, "
        "if present."
        "Return your answer in JSON format: "
        '[{"bbox_2d": [x1, y1, x2, y2], "confidence": c}].'
    ),
    "loc_tagged_user": (
        "The video could contain the following anomaly type: '{tags}'."
        "Localize the suspicious region or individual in this image."
        "Return your answer in JSON format: "
        '[{"bbox_2d": [x1, y1, x2, y2], "confidence": c}].'
    ),
    "vau_system": "You are an AI assistant analyzing a video.",
    "vau_user": (
        "Please analyze the video for any anomaly activities in detail. "
        "If there is any anomaly, describe the anomaly activities present in "
        "the video in detail. After description, analyze why it is an anomaly "
        "without timestamps."
        "If no anomalies are found, state that the video appears normal and "
        "then describe the scene in detail."
    ),
    "vau_tag_suffix": (
        "For better anomaly detection and description in detail, a preliminary "
        "analysis suggests that the suspicious activity could be related to "
        "{tags}. Use these information to guide your anomaly detection analysis."
    ),
}

# What counts as anomalous, per benchmark flavor. "base" is the neutral default.
DATASET_PRIORS: dict[str, str] = {
    "base": "suspicious activities",
    "criminal": "suspicious or potentially criminal",
    "violent": "suspicious or violent",
}


def resolve_prior(preset_or_text: str) -> str:
    """Map a preset name to its prior phrase; unknown names pass through as text."""
    return DATASET_PRIORS.get(preset_or_text, preset_or_text)


@dataclass(frozen=True)
class TagList:
    """Short anomaly phrases extracted from the suspicious window."""

    tags: tuple[str, ...] = ()
    cap: InitVar[int] = DEFAULT_TAG_CAP

    def __post_init__(self, cap: int) -> None:
        cleaned: list[str] = []
        seen: set[str] = set()
        for tag in self.tags:
            text = tag.strip().strip("'\"").strip()
            text = text.translate({ord(c): None for c in _BRACKET_CHARS})
            if text and text not in seen:
                seen.add(text)
                cleaned.append(text)
        object.__setattr__(self, "tags", tuple(cleaned[:cap]))

    def __bool__(self) -> bool:
        return bool(self.tags)

    def __len__(self) -> int:
        return len(self.tags)

    def joined(self) -> str:
        return ", ".join(self.tags)


@dataclass(frozen=True)
class PromptMessage:
    role: str
    text: str
    media: tuple[str, ...] = ()


@dataclass(frozen=True)
class PromptBundle:
    kind: str
    messages: tuple[PromptMessage, ...]

    def system_text(self) -> str | None:
        for msg in self.messages:
            if msg.role == "system":
                return msg.text
        return None

    def user_text(self) -> str:
        for msg in self.messages:
            if msg.role == "user":
                return msg.text
        raise ValueError("bundle has no user message")

    def without_system_role(self) -> "PromptBundle":
        """Fold the system text into the user text for backends without system prompts."""
        system = self.system_text()
        if system is None:
            return self
        user = next(m for m in self.messages if m.role == "user")
        merged = PromptMessage(role="user", text=system + user.text, media=user.media)
        return PromptBundle(kind=self.kind, messages=(merged,))


def _render(template: str, substitutions: dict[str, str]) -> str:
    out = template
    for key, value in substitutions.items():
        out = out.replace("{" + key + "}", value)
    return out


@dataclass
class PromptRegistry:
    """Immutable-after-load template set with optional directory overrides."""

    templates: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))

    @classmethod
    def with_overrides(cls, template_dir: str | Path | None) -> "PromptRegistry":
        registry = cls()
        if template_dir is None:
            return registry
        root = Path(template_dir)
        for name in registry.templates:
            candidate = root / f"{name}.txt"
            if candidate.is_file():
                registry.templates[name] = candidate.read_text(encoding="utf-8")
        return registry

    def _get(self, name: str, substitutions: dict[str, str] | None = None) -> str:
        return _render(self.templates[name], substitutions or {})

    def build_caption_prompt(self, frame_refs: tuple[str, ...] = ()) -> PromptBundle:
        """Fixed captioning prompt; clip frames ride on the user message."""
        return PromptBundle(
            kind="caption",
            messages=(
                PromptMessage(role="system", text=self._get("caption_system")),
                PromptMessage(role="user", text="", media=tuple(frame_refs)),
            ),
        )

    def build_vad_prompt(
        self,
        dataset_prior: str,
        caption: str,
        tags: TagList | None = None,
    ) -> PromptBundle:
        """Scoring prompt; tags (when present) are injected after the head sentence."""
        subs = {"dataset_prior": dataset_prior}
        head = self._get("vad_system_head", subs)
        tail = self._get("vad_system_tail", subs)
        if tags:
            injection = self._get(
                "vad_tag_injection",
                {"dataset_prior": dataset_prior, "tags": tags.joined()},
            )
            system = head + injection + tail
        else:
            system = head + tail
        return PromptBundle(
            kind="vad",
            messages=(
                PromptMessage(role="system", text=system),
                PromptMessage(role="user", text=caption),
            ),
        )

    def build_extract_prompt(self, frame_refs: tuple[str, ...]) -> PromptBundle:
        if not frame_refs:
            raise ValueError("tag extraction needs at least one frame")
        return PromptBundle(
            kind="extract",
            messages=(
                PromptMessage(role="system", text=self._get("extract_system")),
                PromptMessage(role="user", text=self._get("extract_user"), media=tuple(frame_refs)),
            ),
        )

    def build_loc_prompt(self, frame_ref: str, tags: TagList | None = None) -> PromptBundle:
        if tags:
            text = self._get("loc_tagged_user", {"tags": tags.joined()})
        else:
            text = self._get("loc_user")
        return PromptBundle(
            kind="loc",
            messages=(PromptMessage(role="user", text=text, media=(frame_ref,)),),
        )

    def build_vau_prompt(
        self,
        frame_refs: tuple[str, ...],
        tags: TagList | None = None,
    ) -> PromptBundle:
        if not frame_refs:
            raise ValueError("description needs at least one frame")
        system = self._get("vau_system")
        if tags:
            system = system + self._get("vau_tag_suffix", {"tags": tags.joined()})
        return PromptBundle(
            kind="vau",
            messages=(
                PromptMessage(role="system", text=system),
                PromptMessage(role="user", text=self._get("vau_user"), media=tuple(frame_refs)),
            ),
        )
