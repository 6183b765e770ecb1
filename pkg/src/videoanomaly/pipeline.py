"""Per-video orchestration of the three chained analysis tasks.

Stage order within a video is fixed: first-pass scoring -> suspicious-window
priors (tags, surrogate) -> refinement gate -> optional second scoring pass
-> smoothing, then localization and description stages that reuse those
priors. Captions are computed once and reused by the refinement pass, which
halves captioner cost and keeps the second pass a pure re-scoring.

Every model reply is cached on disk by request fingerprint, so re-running
any stage with a warm cache performs zero backend calls and reproduces
byte-identical analysis records.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .boxes import BoundingBox, overlay_boxes
from .config import RunConfig
from .datasets import VideoManifest
from .errors import BackendError, ConfigError, PipelineError, TransportError
from .prompts import TagList, resolve_prior
from .sampling import clip_indices, vau_frame_sample, window_subsample
from .scores import (
    GateDecision,
    ScoreSeries,
    SmoothingConfig,
    SuspicionWindow,
    adaptive_margin,
    admissible_window_length,
    gate_decision,
    gate_from_dict,
    gate_to_dict,
    gaussian_smooth,
    series_from_dict,
    series_to_dict,
    sliding_window_max_mean,
    surrogate_score,
    window_from_dict,
    window_to_dict,
)
from .services import ModelServices

logger = logging.getLogger(__name__)


@dataclass
class VideoAnalysis:
    """Everything the pipeline derived for one video."""

    video_id: str
    first_pass: ScoreSeries
    window: SuspicionWindow
    surrogate: float
    tags: TagList
    gate: GateDecision
    final_scores: ScoreSeries
    video_label: bool
    refined: ScoreSeries | None = None
    refined_surrogate: float | None = None
    localizations: dict[int, list[BoundingBox]] = field(default_factory=dict)
    description: str | None = None

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "first_pass": series_to_dict(self.first_pass),
            "window": window_to_dict(self.window),
            "surrogate": self.surrogate,
            "tags": list(self.tags.tags),
            "gate": gate_to_dict(self.gate),
            "refined": series_to_dict(self.refined) if self.refined else None,
            "refined_surrogate": self.refined_surrogate,
            "final_scores": series_to_dict(self.final_scores),
            "video_label": self.video_label,
            "localizations": {
                str(frame): [box.to_dict() for box in boxes]
                for frame, boxes in sorted(self.localizations.items())
            },
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VideoAnalysis":
        return cls(
            video_id=data["video_id"],
            first_pass=series_from_dict(data["first_pass"]),
            window=window_from_dict(data["window"]),
            surrogate=float(data["surrogate"]),
            tags=TagList(tuple(data["tags"])),
            gate=gate_from_dict(data["gate"]),
            refined=series_from_dict(data["refined"]) if data.get("refined") else None,
            refined_surrogate=data.get("refined_surrogate"),
            final_scores=series_from_dict(data["final_scores"]),
            video_label=bool(data["video_label"]),
            localizations={
                int(frame): [BoundingBox.from_dict(b) for b in boxes]
                for frame, boxes in data.get("localizations", {}).items()
            },
            description=data.get("description"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _score_positions(
    manifest: VideoManifest,
    services: ModelServices,
    config: RunConfig,
    dataset_prior: str,
    tags: TagList | None,
    captions: list[str],
) -> list[float]:
    """Score every cached caption, optionally with the tag-refined prompt."""

    def score_one(caption: str) -> float:
        return services.score_caption(caption, dataset_prior, tags)

    if config.clip_parallel > 1:
        with ThreadPoolExecutor(max_workers=config.clip_parallel) as pool:
            return list(pool.map(score_one, captions))
    return [score_one(caption) for caption in captions]


def run_vad(manifest: VideoManifest, services: ModelServices, config: RunConfig) -> VideoAnalysis:
    """First-pass scoring, suspicious-window priors, gated refinement, smoothing."""
    total = manifest.total_frames
    prior = resolve_prior(config.prior_override or manifest.dataset_prior_preset)
    centers = [1 + k * config.stride for k in range((total + config.stride - 1) // config.stride)]

    def caption_one(center: int) -> str:
        clip = clip_indices(
            center,
            total,
            manifest.fps,
            radius_seconds=config.clip_radius_seconds,
            clip_size=config.clip_size,
        )
        paths = [manifest.frame_path(i) for i in clip.indices]
        return services.caption_clip(clip, paths)

    if config.clip_parallel > 1:
        with ThreadPoolExecutor(max_workers=config.clip_parallel) as pool:
            captions = list(pool.map(caption_one, centers))
    else:
        captions = [caption_one(center) for center in centers]

    first_values = _score_positions(manifest, services, config, prior, None, captions)
    first_pass = ScoreSeries(values=tuple(first_values), stride=config.stride, total_frames=total)

    length = admissible_window_length(total, config.window_floor, config.window_divisor)
    window = sliding_window_max_mean(first_pass, length)
    surrogate = surrogate_score(window)

    window_frames = window_subsample(window, config.window_subsample_cap)
    tags = services.extract_tags([manifest.frame_path(i) for i in window_frames])

    if config.margin_mode == "adaptive":
        margin = adaptive_margin(first_pass)
    else:
        margin = config.margin
    gate = gate_decision(surrogate, margin, config.boundary, margin_mode=config.margin_mode)

    refined: ScoreSeries | None = None
    refined_surrogate: float | None = None
    if gate.refine:
        refined_values = _score_positions(
            manifest, services, config, prior, tags if tags else None, captions
        )
        refined = ScoreSeries(values=tuple(refined_values), stride=config.stride, total_frames=total)
        refined_surrogate = surrogate_score(sliding_window_max_mean(refined, length))

    smoothing = SmoothingConfig(sigma=config.smoothing_sigma, truncate=config.smoothing_truncate)
    final_scores = gaussian_smooth(refined if refined is not None else first_pass, smoothing)

    if config.label_source == "refined" and refined_surrogate is not None:
        video_label = refined_surrogate > gate.boundary
    else:
        video_label = surrogate > gate.boundary

    return VideoAnalysis(
        video_id=manifest.video_id,
        first_pass=first_pass,
        window=window,
        surrogate=surrogate,
        tags=tags,
        gate=gate,
        final_scores=final_scores,
        video_label=video_label,
        refined=refined,
        refined_surrogate=refined_surrogate,
    )


def run_val(
    analysis: VideoAnalysis,
    manifest: VideoManifest,
    services: ModelServices,
    frames: list[int],
) -> dict[int, list[BoundingBox]]:
    """Localize the requested frames with the video's tag hint."""
    tags = analysis.tags if analysis.tags else None
    for frame in frames:
        try:
            boxes = services.localize_frame(manifest.frame_path(frame), tags)
        except (TransportError, BackendError) as exc:
            logger.warning("%s frame %d: localization failed: %s", manifest.video_id, frame, exc)
            boxes = []
        analysis.localizations[frame] = boxes
    return analysis.localizations


def run_vau(
    analysis: VideoAnalysis,
    manifest: VideoManifest,
    services: ModelServices,
    config: RunConfig,
    overlay_dir: str | Path | None = None,
) -> str:
    """Describe the video, optionally overlaying localized boxes first.

    The overlay branch runs only when the surrogate strictly exceeds the
    decision boundary (the detector already believes an anomaly is present)
    and overlays are enabled; otherwise the original sampled frames are
    described unmodified.
    """
    tags = analysis.tags if analysis.tags else None
    anomalous = analysis.surrogate > analysis.gate.boundary
    if anomalous:
        selected = vau_frame_sample(manifest.total_frames, analysis.window, config.vau_sample_count)
    else:
        selected = vau_frame_sample(manifest.total_frames, None, config.vau_sample_count)

    query_paths = [manifest.frame_path(i) for i in selected]
    if anomalous and config.overlay_enabled:
        out_root = Path(overlay_dir) if overlay_dir is not None else manifest.frames_dir.parent / "overlays"
        out_root = out_root / manifest.video_id
        out_root.mkdir(parents=True, exist_ok=True)
        annotated: list[str] = []
        for frame, path in zip(selected, query_paths):
            boxes = run_val(analysis, manifest, services, [frame])[frame]
            try:
                annotated.append(_write_overlay(path, boxes, out_root / f"{frame:06d}.png"))
            except OSError as exc:
                logger.warning("%s frame %d: overlay failed, using raw frame: %s", manifest.video_id, frame, exc)
                annotated.append(path)
        query_paths = annotated

    description = services.describe_video(query_paths, tags)
    analysis.description = description
    return description


def _write_overlay(frame_path: str, boxes: list[BoundingBox], out_path: Path) -> str:
    with Image.open(frame_path) as img:
        pixels = np.asarray(img.convert("RGB"))
    annotated = overlay_boxes(pixels, boxes)
    Image.fromarray(annotated).save(out_path)
    return str(out_path)


def _frames_in_intervals(intervals: list[tuple[int, int]]) -> list[int]:
    frames: list[int] = []
    for start, end in intervals:
        frames.extend(range(start, end + 1))
    return frames


def default_val_frames(
    analysis: VideoAnalysis,
    manifest: VideoManifest,
    config: RunConfig,
    intervals: list[tuple[int, int]] | None,
) -> list[int]:
    """Annotated anomalous frames when ground truth is at hand, else the VAU sample."""
    if intervals:
        return _frames_in_intervals(intervals)
    window = analysis.window if analysis.surrogate > analysis.gate.boundary else None
    return vau_frame_sample(manifest.total_frames, window, config.vau_sample_count)


@dataclass
class VideoOutcome:
    video_id: str
    status: str
    stages: list[str]
    error: str | None = None


def run_batch(
    manifests: list[VideoManifest],
    services: ModelServices,
    config: RunConfig,
    out_dir: str | Path,
    stages: list[str],
    temporal: dict[str, list[tuple[int, int]]] | None = None,
) -> list[VideoOutcome]:
    """Execute the requested stages for every video; failures never abort the batch."""
    out = Path(out_dir)
    analysis_dir = out / "analysis"
    analysis_dir.mkdir(parents=True, exist_ok=True)
    later_stages = [s for s in stages if s in ("val", "vau")]

    if later_stages and "vad" not in stages:
        missing = [m.video_id for m in manifests if not (analysis_dir / f"{m.video_id}.json").is_file()]
        if missing:
            raise ConfigError(
                f"no detection artifacts for {missing}; run the vad stage before val/vau"
            )

    def process(manifest: VideoManifest) -> VideoOutcome:
        path = analysis_dir / f"{manifest.video_id}.json"
        done: list[str] = []
        try:
            if "vad" in stages:
                analysis = run_vad(manifest, services, config)
                path.write_text(analysis.to_json(), encoding="utf-8")
                done.append("vad")
            elif later_stages:
                analysis = VideoAnalysis.from_dict(json.loads(path.read_text(encoding="utf-8")))
            else:
                return VideoOutcome(manifest.video_id, "ok", [])

            if "val" in stages:
                intervals = (temporal or {}).get(manifest.video_id)
                frames = default_val_frames(analysis, manifest, config, intervals)
                run_val(analysis, manifest, services, frames)
                path.write_text(analysis.to_json(), encoding="utf-8")
                done.append("val")
            if "vau" in stages:
                run_vau(analysis, manifest, services, config, overlay_dir=out / "overlays")
                path.write_text(analysis.to_json(), encoding="utf-8")
                done.append("vau")
            return VideoOutcome(manifest.video_id, "ok", done)
        except PipelineError as exc:
            logger.warning("%s: failed after stages %s: %s", manifest.video_id, done, exc)
            return VideoOutcome(manifest.video_id, "failed", done, error=str(exc))

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(process, manifests))
    else:
        outcomes = [process(m) for m in manifests]

    summary = {
        "videos": [
            {"video_id": o.video_id, "status": o.status, "stages": o.stages, "error": o.error}
            for o in sorted(outcomes, key=lambda o: o.video_id)
        ]
    }
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return outcomes


def load_analyses(out_dir: str | Path) -> dict[str, VideoAnalysis]:
    """All analysis records under a run directory, keyed by video id."""
    analysis_dir = Path(out_dir) / "analysis"
    result: dict[str, VideoAnalysis] = {}
    if not analysis_dir.is_dir():
        return result
    for path in sorted(analysis_dir.glob("*.json")):
        analysis = VideoAnalysis.from_dict(json.loads(path.read_text(encoding="utf-8")))
        result[analysis.video_id] = analysis
    return result
