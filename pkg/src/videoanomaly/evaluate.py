"""Assemble a MetricReport from analysis records and ground truth.

Frame-level AUC/AP concatenate expanded per-frame scores across videos (the
dominant benchmark convention); a per-video averaging mode exists behind a
flag. Metrics whose inputs are missing are reported as absent, never as 0.
"""

from __future__ import annotations

import logging

import numpy as np

from .datasets import AnnotationSet, VideoManifest, frame_label_vector
from .errors import DegenerateLabels, EmptyText, NoAnnotatedFrames
from .metrics import MetricReport, average_precision, bleu, rouge_l, roc_auc, tiou
from .pipeline import VideoAnalysis
from .scores import expand_to_frames

logger = logging.getLogger(__name__)


def build_report(
    analyses: dict[str, VideoAnalysis],
    manifests: dict[str, VideoManifest],
    annotations: AnnotationSet,
    per_video_ranking: bool = False,
    tiou_threshold: float = 0.5,
) -> MetricReport:
    report = MetricReport()
    scored = [
        vid for vid in sorted(analyses)
        if vid in annotations.temporal and vid in manifests
    ]

    all_scores: list[np.ndarray] = []
    all_labels: list[np.ndarray] = []
    for vid in scored:
        scores = expand_to_frames(analyses[vid].final_scores)
        labels = frame_label_vector(manifests[vid], annotations.temporal[vid])
        all_scores.append(scores)
        all_labels.append(labels)
        entry = report.per_video.setdefault(vid, {})
        try:
            entry["auc"] = roc_auc(scores, labels)
        except DegenerateLabels:
            entry["auc"] = None
        try:
            entry["ap"] = average_precision(scores, labels)
        except DegenerateLabels:
            entry["ap"] = None

    if scored:
        if per_video_ranking:
            aucs = [report.per_video[v]["auc"] for v in scored if report.per_video[v]["auc"] is not None]
            aps = [report.per_video[v]["ap"] for v in scored if report.per_video[v]["ap"] is not None]
            report.auc = float(np.mean(aucs)) if aucs else None
            report.ap = float(np.mean(aps)) if aps else None
        else:
            scores = np.concatenate(all_scores)
            labels = np.concatenate(all_labels)
            try:
                report.auc = roc_auc(scores, labels)
            except DegenerateLabels:
                logger.warning("AUC not computable: labels are single-class")
            try:
                report.ap = average_precision(scores, labels)
            except DegenerateLabels:
                logger.warning("AP not computable: no positive labels")

    if annotations.spatial:
        predictions = {}
        ground_truth = {}
        for vid, per_frame in annotations.spatial.items():
            if vid not in analyses:
                continue
            for frame, boxes in per_frame.items():
                ground_truth[(vid, frame)] = boxes
                predicted = analyses[vid].localizations.get(frame)
                if predicted:
                    predictions[(vid, frame)] = predicted
        try:
            report.tiou = tiou(predictions, ground_truth, threshold=tiou_threshold)
        except NoAnnotatedFrames:
            logger.warning("TIoU not computable: no annotated frames matched")

    described = [
        vid for vid in sorted(analyses)
        if analyses[vid].description and vid in annotations.descriptions
    ]
    bleus: list[float] = []
    rouges: list[float] = []
    for vid in described:
        candidate = analyses[vid].description or ""
        reference = annotations.descriptions[vid]
        entry = report.per_video.setdefault(vid, {})
        try:
            entry["bleu"] = bleu(candidate, reference)
            entry["rouge_l"] = rouge_l(candidate, reference)
        except EmptyText:
            entry["bleu"] = None
            entry["rouge_l"] = None
            continue
        bleus.append(entry["bleu"])
        rouges.append(entry["rouge_l"])
    if bleus:
        report.bleu = float(np.mean(bleus))
        report.rouge_l = float(np.mean(rouges))

    return report
