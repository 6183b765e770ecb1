"""Command-line entry point: run, evaluate, sweep, plot."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
from pathlib import Path

from .backend import HttpChatBackend, MockBackend, MockScript
from .cache import ResponseCache
from .config import STAGES, EndpointsConfig, RunConfig
from .datasets import (
    AnnotationSet,
    load_bbox_annotations,
    load_descriptions,
    load_manifest,
    load_temporal_annotations,
)
from .errors import ConfigError, PipelineError
from .evaluate import build_report
from .pipeline import load_analyses, run_batch
from .plotting import render_score_plot
from .prompts import PromptRegistry
from .services import ROLES, ModelServices, RoleBinding

logger = logging.getLogger(__name__)


def build_services(
    config: RunConfig,
    cache_dir: str | Path | None,
    mock_script: str | Path | None = None,
    endpoints_file: str | Path | None = None,
    template_dir: str | Path | None = None,
) -> tuple[ModelServices, MockBackend | None]:
    """Wire role bindings to either one mock backend or per-role HTTP backends."""
    registry = PromptRegistry.with_overrides(template_dir)
    bindings: dict[str, RoleBinding] = {}
    mock: MockBackend | None = None
    if mock_script is not None:
        mock = MockBackend(MockScript.from_file(mock_script))
        cache = ResponseCache(cache_dir, mock.model_name) if cache_dir else None
        for role in ROLES:
            bindings[role] = RoleBinding(backend=mock, cache=cache, max_retries=2)
    elif endpoints_file is not None:
        endpoints = EndpointsConfig.from_file(endpoints_file)
        backends: dict[tuple[str, str], HttpChatBackend] = {}
        caches: dict[str, ResponseCache] = {}
        for role in ROLES:
            endpoint = endpoints.for_role(role)
            key = (endpoint.base_url, endpoint.model_name)
            if key not in backends:
                backends[key] = HttpChatBackend(endpoint)
            if cache_dir and endpoint.model_name not in caches:
                caches[endpoint.model_name] = ResponseCache(cache_dir, endpoint.model_name)
            bindings[role] = RoleBinding(
                backend=backends[key],
                cache=caches.get(endpoint.model_name),
                max_retries=endpoint.max_retries,
            )
    else:
        raise ConfigError("either --mock-script or --backends is required")
    services = ModelServices(
        bindings,
        registry=registry,
        temperature=config.temperature,
        tag_cap=config.tag_cap,
    )
    return services, mock


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for field in dataclasses.fields(RunConfig):
        if hasattr(args, field.name) and getattr(args, field.name) is not None:
            overrides[field.name] = getattr(args, field.name)
    if getattr(args, "no_overlay", False):
        overrides["overlay_enabled"] = False
    return RunConfig(**overrides)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--stride", type=int, help="frames between scored positions (default 16)")
    parser.add_argument("--margin-mode", dest="margin_mode", choices=["fixed", "adaptive"])
    parser.add_argument("--margin", type=float, help="fixed gate half-width (default 0.05)")
    parser.add_argument("--boundary", type=float, help="decision boundary (default 0.5)")
    parser.add_argument("--window-floor", dest="window_floor", type=int)
    parser.add_argument("--window-divisor", dest="window_divisor", type=int)
    parser.add_argument("--sigma", dest="smoothing_sigma", type=float)
    parser.add_argument("--truncate", dest="smoothing_truncate", type=float)
    parser.add_argument("--tag-cap", dest="tag_cap", type=int)
    parser.add_argument("--subsample-cap", dest="window_subsample_cap", type=int)
    parser.add_argument("--vau-count", dest="vau_sample_count", type=int)
    parser.add_argument("--clip-size", dest="clip_size", type=int)
    parser.add_argument("--omega", dest="clip_radius_seconds", type=float, help="clip radius in seconds")
    parser.add_argument("--prior", dest="prior_override", help="dataset prior preset or raw phrase")
    parser.add_argument("--label-source", dest="label_source", choices=["first_pass", "refined"])
    parser.add_argument("--no-overlay", action="store_true", help="skip the localization overlay step")
    parser.add_argument("--workers", type=int, help="videos processed in parallel")
    parser.add_argument("--clip-parallel", dest="clip_parallel", type=int)
    parser.add_argument("--temperature", type=float)


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mock-script", help="scripted mock backend (JSON)")
    parser.add_argument("--backends", help="endpoints config (JSON) for HTTP backends")
    parser.add_argument("--cache-dir", help="reply cache directory (default {out}/cache)")
    parser.add_argument("--templates", help="prompt template override directory")


def _load_annotations(args: argparse.Namespace) -> AnnotationSet:
    annotations = AnnotationSet()
    if getattr(args, "temporal", None):
        annotations.temporal = load_temporal_annotations(args.temporal)
    if getattr(args, "spatial", None):
        annotations.spatial = load_bbox_annotations(args.spatial)
    if getattr(args, "descriptions", None):
        annotations.descriptions = load_descriptions(args.descriptions)
    return annotations


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(args.cache_dir) if args.cache_dir else out / "cache"
    stages = [s.strip() for s in args.stages.split(",") if s.strip()]
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ConfigError(f"unknown stages {unknown}; valid stages: {list(STAGES)}")
    manifests = load_manifest(args.manifest)
    services, _ = build_services(config, cache_dir, args.mock_script, args.backends, args.templates)
    temporal = load_temporal_annotations(args.temporal) if args.temporal else None
    (out / "config.json").write_text(config.to_json(), encoding="utf-8")
    outcomes = run_batch(manifests, services, config, out, stages, temporal=temporal)
    failed = [o for o in outcomes if o.status == "failed"]
    for outcome in failed:
        logger.warning("video %s failed: %s", outcome.video_id, outcome.error)
    print(f"processed {len(outcomes)} videos, {len(failed)} failed; artifacts in {out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    manifests = {m.video_id: m for m in load_manifest(args.manifest)}
    analyses = load_analyses(run_dir)
    if not analyses:
        raise ConfigError(f"no analysis artifacts under {run_dir}/analysis")
    annotations = _load_annotations(args)
    report = build_report(
        analyses,
        manifests,
        annotations,
        per_video_ranking=args.per_video,
        tiou_threshold=args.tiou_threshold,
    )
    (run_dir / "metrics.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    (run_dir / "metrics.csv").write_text(report.to_csv(), encoding="utf-8")
    for name in ("auc", "ap", "tiou", "bleu", "rouge_l"):
        value = getattr(report, name)
        print(f"{name}: {'absent' if value is None else f'{value:.6f}'}")
    return 0


def _sweep_settings(args: argparse.Namespace) -> list[tuple[str, str, RunConfig]]:
    base = _config_from_args(args)
    settings: list[tuple[str, str, RunConfig]] = []
    if args.margins:
        for raw in args.margins.split(","):
            value = float(raw)
            label = f"m={value:g}"
            settings.append(("margin", label, dataclasses.replace(base, margin=value, margin_mode="fixed")))
    if args.include_adaptive:
        settings.append(("margin", "adaptive-variance", dataclasses.replace(base, margin_mode="adaptive")))
    if args.divisors:
        for raw in args.divisors.split(","):
            divisor = int(raw)
            label = f"max({base.window_floor}, T/{divisor})"
            settings.append(("window", label, dataclasses.replace(base, window_divisor=divisor)))
    if not settings:
        raise ConfigError("sweep needs --margins, --include-adaptive, or --divisors")
    return settings


def cmd_sweep(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(args.cache_dir) if args.cache_dir else out / "cache"
    manifests = load_manifest(args.manifest)
    manifest_map = {m.video_id: m for m in manifests}
    annotations = AnnotationSet(temporal=load_temporal_annotations(args.temporal))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["sweep", "setting", "auc", "ap"])
    for sweep_name, label, config in _sweep_settings(args):
        services, _ = build_services(config, cache_dir, args.mock_script, args.backends, args.templates)
        run_dir = out / "sweep_runs" / "".join(c if c.isalnum() or c in ".=-" else "_" for c in label)
        run_batch(manifests, services, config, run_dir, ["vad"])
        report = build_report(load_analyses(run_dir), manifest_map, annotations)
        auc = "" if report.auc is None else repr(report.auc)
        ap = "" if report.ap is None else repr(report.ap)
        writer.writerow([sweep_name, label, auc, ap])
        print(f"{sweep_name} {label}: auc={auc or 'absent'} ap={ap or 'absent'}")
    (out / "sweep.csv").write_text(buffer.getvalue(), encoding="utf-8")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    analyses = load_analyses(run_dir)
    if not analyses:
        raise ConfigError(f"no analysis artifacts under {run_dir}/analysis")
    temporal = load_temporal_annotations(args.temporal) if args.temporal else {}
    plot_dir = Path(args.out_dir) if args.out_dir else run_dir / "plots"
    for video_id, analysis in sorted(analyses.items()):
        path = render_score_plot(analysis, temporal.get(video_id), plot_dir / f"{video_id}.svg")
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videoanomaly",
        description="Training-free video anomaly detection, localization, and description "
        "over chat-completion model backends.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run analysis stages over a manifest")
    p_run.add_argument("--manifest", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--stages", default="vad,val,vau", help="comma-separated subset of vad,val,vau")
    p_run.add_argument("--temporal", help="temporal annotations (selects val frames)")
    _add_backend_flags(p_run)
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("evaluate", help="score a finished run against ground truth")
    p_eval.add_argument("--run-dir", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--temporal")
    p_eval.add_argument("--spatial")
    p_eval.add_argument("--descriptions")
    p_eval.add_argument("--per-video", action="store_true", help="average per-video AUC/AP instead of concatenating")
    p_eval.add_argument("--tiou-threshold", type=float, default=0.5)
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="grid over gate margins and window rules")
    p_sweep.add_argument("--manifest", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--temporal", required=True)
    p_sweep.add_argument("--margins", help="comma-separated fixed margins")
    p_sweep.add_argument("--include-adaptive", action="store_true")
    p_sweep.add_argument("--divisors", help="comma-separated window divisors")
    _add_backend_flags(p_sweep)
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser("plot", help="render score-curve SVGs for a run")
    p_plot.add_argument("--run-dir", required=True)
    p_plot.add_argument("--temporal")
    p_plot.add_argument("--out-dir")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
