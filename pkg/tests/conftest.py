"""Shared fixtures: a 3-video scripted corpus and end-to-end runs over it.

Videos (320 frames each, fps 2, default 16-frame stride -> 20 scored
positions, suspicious-window length max(300, 32) = 300):

  * vnormal — every position scores 0.1; far below the gate band.
  * vanom   — every position scores 0.9; far above the band, overlay branch.
  * vamb    — positions [0.6, 0.6, 0.6, 0.5 x 16, 0.6]; the best 300-frame
    window starts at frame 6 and covers all 20 positions with mean 0.52,
    inside the 0.5 +/- 0.05 band, so refinement fires (scripted to 0.8).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from videoanomaly.backend import CompletionRequest, MockBackend
from videoanomaly.cli import build_services
from videoanomaly.config import RunConfig
from videoanomaly.datasets import load_manifest
from videoanomaly.pipeline import run_batch
from videoanomaly.prompts import PromptRegistry
from videoanomaly.sampling import clip_indices

FPS = 2.0
TOTAL_FRAMES = 320
STRIDE = 16
VIDEO_IDS = ("vnormal", "vanom", "vamb")
AMB_POSITION_SCORES = [0.6, 0.6, 0.6] + [0.5] * 16 + [0.6]

GOLDEN_DIR = Path(__file__).parent / "goldens"


def read_golden(name: str) -> str:
    """Golden files carry one trailing newline added at write time."""
    data = (GOLDEN_DIR / "prompts" / f"{name}.txt").read_text(encoding="utf-8")
    assert data.endswith("\n")
    return data[:-1]


def caption_text(video_id: str, center: int) -> str:
    return f"{video_id} clip at frame {center} under observation"


def write_frames(video_dir: Path, count: int, base: tuple[int, int, int]) -> None:
    video_dir.mkdir(parents=True)
    for i in range(1, count + 1):
        arr = np.full((8, 8, 3), base, dtype=np.uint8)
        arr[0, 0] = (i % 256, (i >> 8) % 256, base[2])
        Image.fromarray(arr).save(video_dir / f"{i:06d}.png")


def build_mock_script(frames_root: Path) -> dict:
    registry = PromptRegistry()
    fingerprints: dict[str, str] = {}
    rules: list[dict] = []
    centers = [1 + k * STRIDE for k in range(TOTAL_FRAMES // STRIDE)]
    for video_id in VIDEO_IDS:
        for k, center in enumerate(centers):
            clip = clip_indices(center, TOTAL_FRAMES, FPS, radius_seconds=10.0, clip_size=10)
            paths = tuple(str(frames_root / video_id / f"{i:06d}.png") for i in clip.indices)
            bundle = registry.build_caption_prompt(paths)
            fingerprints[CompletionRequest(bundle=bundle).fingerprint("mock")] = caption_text(
                video_id, center
            )
            if video_id == "vnormal":
                base_reply, tagged_reply = "[0.1]", "[0.1]"
            elif video_id == "vanom":
                base_reply, tagged_reply = "[0.9]", "[0.9]"
            else:
                base_reply, tagged_reply = f"[{AMB_POSITION_SCORES[k]:g}]", "[0.8]"
            rules.append(
                {
                    "kind": "vad",
                    "contains": [caption_text(video_id, center), "Potentially reported"],
                    "reply": tagged_reply,
                }
            )
            rules.append(
                {
                    "kind": "vad",
                    "contains": [caption_text(video_id, center)],
                    "not_contains": ["Potentially reported"],
                    "reply": base_reply,
                }
            )
    rules.extend(
        [
            {"kind": "extract", "media_contains": "/vnormal/", "reply": "[]"},
            {"kind": "extract", "media_contains": "/vanom/", "reply": '["people fighting", "assault"]'},
            {"kind": "extract", "media_contains": "/vamb/", "reply": '["crowd gathering", "pushing"]'},
            {"kind": "loc", "media_contains": "/vnormal/", "reply": "[]"},
            {
                "kind": "loc",
                "media_contains": "/vanom/",
                "reply": '[{"bbox_2d": [1, 1, 6, 6], "confidence": 0.9}]',
            },
            {
                "kind": "loc",
                "media_contains": "/vamb/",
                "reply": '[{"bbox_2d": [2, 2, 7, 7], "confidence": 0.8}]',
            },
            {
                "kind": "vau",
                "media_contains": "/vnormal/",
                "reply": "The video appears normal. People walk through a street and nothing unusual happens.",
            },
            {
                "kind": "vau",
                "media_contains": "/vanom/",
                "reply": "Two people fight in a parking lot and one man strikes the other repeatedly.",
            },
            {
                "kind": "vau",
                "media_contains": "/vamb/",
                "reply": "A crowd gathers in a lobby and pushing breaks out between several people.",
            },
        ]
    )
    return {"fingerprints": fingerprints, "rules": rules}


@dataclass
class FixturePaths:
    root: Path
    manifest: Path
    script: Path
    temporal: Path
    temporal_val: Path
    spatial: Path
    descriptions: Path
    frames_root: Path


@pytest.fixture(scope="session")
def fixture_paths(tmp_path_factory) -> FixturePaths:
    root = tmp_path_factory.mktemp("corpus")
    frames_root = root / "frames"
    colors = {"vnormal": (40, 120, 40), "vanom": (140, 30, 30), "vamb": (60, 60, 140)}
    for video_id in VIDEO_IDS:
        write_frames(frames_root / video_id, TOTAL_FRAMES, colors[video_id])

    manifest = root / "manifest.json"
    manifest.write_text(
        json.dumps(
            [
                {
                    "video_id": "vnormal",
                    "frames_dir": "frames/vnormal",
                    "fps": FPS,
                    "total_frames": TOTAL_FRAMES,
                    "dataset_prior_preset": "base",
                },
                {
                    "video_id": "vanom",
                    "frames_dir": "frames/vanom",
                    "fps": FPS,
                    "total_frames": TOTAL_FRAMES,
                    "dataset_prior_preset": "criminal",
                },
                {
                    "video_id": "vamb",
                    "frames_dir": "frames/vamb",
                    "fps": FPS,
                    "total_frames": TOTAL_FRAMES,
                    "dataset_prior_preset": "base",
                },
            ],
            indent=2,
        ),
        encoding="utf-8",
    )

    script = root / "script.json"
    script.write_text(json.dumps(build_mock_script(frames_root), indent=2), encoding="utf-8")

    temporal = root / "temporal.txt"
    temporal.write_text("vnormal -1 -1\nvanom 1 320\nvamb 81 304\n", encoding="utf-8")

    temporal_val = root / "temporal_val.txt"
    temporal_val.write_text("vnormal -1 -1\nvanom 10 20\nvamb 100 105\n", encoding="utf-8")

    spatial = root / "spatial.txt"
    rows = [f"vanom {frame} 1 1 6 6" for frame in range(10, 21)]
    rows += [f"vamb {frame} 2 2 7 7" for frame in range(100, 106)]
    spatial.write_text("\n".join(rows) + "\n", encoding="utf-8")

    descriptions = root / "refs.tsv"
    descriptions.write_text(
        "vnormal\tPeople walk through a street and nothing unusual happens.\n"
        "vanom\tTwo people fight in a parking lot and one strikes the other.\n"
        "vamb\tA crowd gathers in a lobby and people push each other.\n",
        encoding="utf-8",
    )

    return FixturePaths(
        root=root,
        manifest=manifest,
        script=script,
        temporal=temporal,
        temporal_val=temporal_val,
        spatial=spatial,
        descriptions=descriptions,
        frames_root=frames_root,
    )


@dataclass
class E2EResult:
    paths: FixturePaths
    out: Path
    config: RunConfig
    mock_first: MockBackend
    mock_second: MockBackend
    analysis_first: dict[str, bytes] = field(default_factory=dict)
    analysis_second: dict[str, bytes] = field(default_factory=dict)
    elapsed_first: float = 0.0
    elapsed_second: float = 0.0


@pytest.fixture(scope="session")
def e2e(fixture_paths: FixturePaths) -> E2EResult:
    """Two identical vad+vau runs; the second must be answered by the cache."""
    out = fixture_paths.root / "out"
    config = RunConfig()
    manifests = load_manifest(fixture_paths.manifest)

    services1, mock1 = build_services(config, out / "cache", mock_script=fixture_paths.script)
    t0 = time.monotonic()
    run_batch(manifests, services1, config, out, ["vad", "vau"])
    elapsed1 = time.monotonic() - t0
    first = {p.name: p.read_bytes() for p in sorted((out / "analysis").glob("*.json"))}

    services2, mock2 = build_services(config, out / "cache", mock_script=fixture_paths.script)
    t1 = time.monotonic()
    run_batch(manifests, services2, config, out, ["vad", "vau"])
    elapsed2 = time.monotonic() - t1
    second = {p.name: p.read_bytes() for p in sorted((out / "analysis").glob("*.json"))}

    return E2EResult(
        paths=fixture_paths,
        out=out,
        config=config,
        mock_first=mock1,
        mock_second=mock2,
        analysis_first=first,
        analysis_second=second,
        elapsed_first=elapsed1,
        elapsed_second=elapsed2,
    )
