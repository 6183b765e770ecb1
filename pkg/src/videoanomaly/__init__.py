"""Training-free video anomaly analysis over frozen model backends.

Chains temporal detection (score series + gated refinement), spatial
localization, and textual description, with an offline evaluation harness.
"""

from .backend import (
    BackendEndpoint,
    CompletionReply,
    CompletionRequest,
    HttpChatBackend,
    MockBackend,
    MockScript,
    request_completion,
)
from .boxes import BoundingBox, iou, overlay_boxes
from .cache import ResponseCache, cached_call
from .config import RunConfig
from .datasets import (
    AnnotationSet,
    VideoManifest,
    frame_label_vector,
    load_bbox_annotations,
    load_descriptions,
    load_manifest,
    load_temporal_annotations,
)
from .evaluate import build_report
from .metrics import MetricReport, average_precision, bleu, roc_auc, rouge_l, tiou
from .parsers import parse_bbox_list, parse_tag_list
from .pipeline import VideoAnalysis, run_batch, run_vad, run_val, run_vau
from .prompts import DATASET_PRIORS, PromptBundle, PromptRegistry, TagList
from .sampling import ClipSpec, clip_indices, vau_frame_sample, window_subsample
from .scores import (
    GateDecision,
    ScoreSeries,
    SmoothingConfig,
    SuspicionWindow,
    adaptive_margin,
    admissible_window_length,
    expand_to_frames,
    gate_decision,
    gaussian_smooth,
    parse_score_token,
    sliding_window_max_mean,
    surrogate_score,
    variance_margin,
)
from .services import ModelServices, RoleBinding

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "BackendEndpoint",
    "BoundingBox",
    "ClipSpec",
    "CompletionReply",
    "CompletionRequest",
    "DATASET_PRIORS",
    "GateDecision",
    "HttpChatBackend",
    "MetricReport",
    "MockBackend",
    "MockScript",
    "ModelServices",
    "PromptBundle",
    "PromptRegistry",
    "ResponseCache",
    "RoleBinding",
    "RunConfig",
    "ScoreSeries",
    "SmoothingConfig",
    "SuspicionWindow",
    "TagList",
    "VideoAnalysis",
    "VideoManifest",
    "adaptive_margin",
    "admissible_window_length",
    "average_precision",
    "bleu",
    "build_report",
    "cached_call",
    "clip_indices",
    "expand_to_frames",
    "frame_label_vector",
    "gate_decision",
    "gaussian_smooth",
    "iou",
    "load_bbox_annotations",
    "load_descriptions",
    "load_manifest",
    "load_temporal_annotations",
    "overlay_boxes",
    "parse_bbox_list",
    "parse_score_token",
    "parse_tag_list",
    "request_completion",
    "roc_auc",
    "rouge_l",
    "run_batch",
    "run_vad",
    "run_val",
    "run_vau",
    "sliding_window_max_mean",
    "surrogate_score",
    "tiou",
    "variance_margin",
    "vau_frame_sample",
    "window_subsample",
]
