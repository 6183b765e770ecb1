"""CLI surface tests: stage handling, evaluate, sweep, plot, config golden."""

import csv
import json

import pytest

from videoanomaly.cli import main
from videoanomaly.config import RunConfig

from conftest import GOLDEN_DIR


def read_csv_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def run_cli(*args):
    return main([str(a) for a in args])


class TestConfigDefaults:
    def test_default_config_matches_reference(self):
        golden = (GOLDEN_DIR / "default_config.json").read_text(encoding="utf-8")
        assert RunConfig().to_json() == golden

    def test_reference_pins_published_values(self):
        data = json.loads((GOLDEN_DIR / "default_config.json").read_text(encoding="utf-8"))
        assert data["stride"] == 16
        assert data["margin"] == 0.05
        assert data["margin_mode"] == "fixed"
        assert data["smoothing_sigma"] == 10.0
        assert data["smoothing_truncate"] == 4.0
        assert data["window_floor"] == 300
        assert data["window_divisor"] == 10
        assert data["window_subsample_cap"] == 180
        assert data["vau_sample_count"] == 16
        assert data["clip_size"] == 10
        assert data["clip_radius_seconds"] == 10.0
        assert data["boundary"] == 0.5

    def test_round_trip_from_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(RunConfig(stride=8).to_json(), encoding="utf-8")
        assert RunConfig.from_json_file(path) == RunConfig(stride=8)


class TestRunCommand:
    def test_vad_stage_writes_artifacts(self, fixture_paths, tmp_path):
        out = tmp_path / "run"
        code = run_cli(
            "run",
            "--manifest", fixture_paths.manifest,
            "--out", out,
            "--stages", "vad",
            "--mock-script", fixture_paths.script,
        )
        assert code == 0
        files = sorted(p.name for p in (out / "analysis").glob("*.json"))
        assert files == ["vamb.json", "vanom.json", "vnormal.json"]
        summary = json.loads((out / "summary.json").read_text())
        assert [v["status"] for v in summary["videos"]] == ["ok", "ok", "ok"]
        assert (out / "config.json").read_text() == RunConfig().to_json()

    def test_later_stage_without_vad_artifacts_fails(self, fixture_paths, tmp_path, capsys):
        code = run_cli(
            "run",
            "--manifest", fixture_paths.manifest,
            "--out", tmp_path / "empty",
            "--stages", "vau",
            "--mock-script", fixture_paths.script,
        )
        assert code == 2
        assert "vad stage" in capsys.readouterr().err

    def test_unknown_stage_rejected(self, fixture_paths, tmp_path, capsys):
        code = run_cli(
            "run",
            "--manifest", fixture_paths.manifest,
            "--out", tmp_path / "x",
            "--stages", "vad,bogus",
            "--mock-script", fixture_paths.script,
        )
        assert code == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_backend_flag_rejected(self, fixture_paths, tmp_path):
        code = run_cli(
            "run", "--manifest", fixture_paths.manifest, "--out", tmp_path / "x", "--stages", "vad"
        )
        assert code == 2

    def test_resume_after_interrupt_uses_cache(self, fixture_paths, tmp_path):
        from videoanomaly.cli import build_services
        from videoanomaly.config import RunConfig
        from videoanomaly.datasets import load_manifest
        from videoanomaly.pipeline import run_batch

        out = tmp_path / "resume"
        config = RunConfig()
        manifests = load_manifest(fixture_paths.manifest)
        services, _ = build_services(config, out / "cache", mock_script=fixture_paths.script)
        run_batch(manifests, services, config, out, ["vad"])
        victim = out / "analysis" / "vanom.json"
        original = victim.read_bytes()
        victim.unlink()

        services2, mock2 = build_services(config, out / "cache", mock_script=fixture_paths.script)
        run_batch(manifests, services2, config, out, ["vad"])
        assert mock2.calls_total == 0  # everything answered from the cache
        assert victim.read_bytes() == original

    def test_workers_parallel_batch_identical(self, fixture_paths, tmp_path):
        from videoanomaly.cli import build_services
        from videoanomaly.config import RunConfig
        from videoanomaly.datasets import load_manifest
        from videoanomaly.pipeline import run_batch

        serial_out, parallel_out = tmp_path / "w1", tmp_path / "w3"
        manifests = load_manifest(fixture_paths.manifest)
        for out, workers in ((serial_out, 1), (parallel_out, 3)):
            config = RunConfig(workers=workers)
            services, _ = build_services(config, out / "cache", mock_script=fixture_paths.script)
            run_batch(manifests, services, config, out, ["vad"])
        for name in ("vnormal.json", "vanom.json", "vamb.json"):
            assert (serial_out / "analysis" / name).read_bytes() == (
                parallel_out / "analysis" / name
            ).read_bytes()

    def test_val_stage_with_annotated_frames(self, fixture_paths, tmp_path):
        out = tmp_path / "val_run"
        code = run_cli(
            "run",
            "--manifest", fixture_paths.manifest,
            "--out", out,
            "--stages", "vad,val",
            "--temporal", fixture_paths.temporal_val,
            "--mock-script", fixture_paths.script,
        )
        assert code == 0
        vanom = json.loads((out / "analysis" / "vanom.json").read_text())
        assert sorted(map(int, vanom["localizations"])) == list(range(10, 21))
        # normal video falls back to the description sample (16 frames)
        vnormal = json.loads((out / "analysis" / "vnormal.json").read_text())
        assert len(vnormal["localizations"]) == 16
        assert all(v == [] for v in vnormal["localizations"].values())


class TestEvaluateCommand:
    @pytest.fixture
    def val_run(self, fixture_paths, tmp_path):
        out = tmp_path / "run"
        assert run_cli(
            "run",
            "--manifest", fixture_paths.manifest,
            "--out", out,
            "--stages", "vad,val,vau",
            "--temporal", fixture_paths.temporal_val,
            "--mock-script", fixture_paths.script,
        ) == 0
        return out

    def test_full_evaluation(self, fixture_paths, val_run):
        code = run_cli(
            "evaluate",
            "--run-dir", val_run,
            "--manifest", fixture_paths.manifest,
            "--temporal", fixture_paths.temporal,
            "--spatial", fixture_paths.spatial,
            "--descriptions", fixture_paths.descriptions,
        )
        assert code == 0
        report = json.loads((val_run / "metrics.json").read_text())
        assert report["auc"] is not None
        assert report["ap"] is not None
        assert report["tiou"] == 1.0  # scripted predictions equal the ground truth
        assert report["bleu"] is not None
        assert report["rouge_l"] is not None
        csv = (val_run / "metrics.csv").read_text()
        assert csv.splitlines()[0] == "metric,value,present"

    def test_absent_metrics_marked(self, fixture_paths, val_run):
        code = run_cli(
            "evaluate",
            "--run-dir", val_run,
            "--manifest", fixture_paths.manifest,
            "--temporal", fixture_paths.temporal,
        )
        assert code == 0
        report = json.loads((val_run / "metrics.json").read_text())
        assert report["tiou"] is None
        assert report["bleu"] is None
        assert report["rouge_l"] is None
        csv = (val_run / "metrics.csv").read_text()
        assert "tiou,,absent" in csv
        assert "bleu,,absent" in csv

    def test_per_video_mode(self, fixture_paths, val_run):
        code = run_cli(
            "evaluate",
            "--run-dir", val_run,
            "--manifest", fixture_paths.manifest,
            "--temporal", fixture_paths.temporal,
            "--per-video",
        )
        assert code == 0
        report = json.loads((val_run / "metrics.json").read_text())
        # only vamb has both classes; the per-video average is its AUC alone
        assert report["auc"] == report["per_video"]["vamb"]["auc"]
        assert report["per_video"]["vanom"]["auc"] is None

    def test_requires_artifacts(self, fixture_paths, tmp_path):
        assert run_cli(
            "evaluate", "--run-dir", tmp_path / "nothing", "--manifest", fixture_paths.manifest
        ) == 2


class TestSweepCommand:
    def test_margin_sweep_schema(self, fixture_paths, tmp_path):
        out = tmp_path / "sweep"
        code = run_cli(
            "sweep",
            "--manifest", fixture_paths.manifest,
            "--out", out,
            "--temporal", fixture_paths.temporal,
            "--mock-script", fixture_paths.script,
            "--margins", "0.05,0.10,0.20,0.40",
            "--include-adaptive",
        )
        assert code == 0
        rows = read_csv_rows(out / "sweep.csv")
        assert rows[0] == ["sweep", "setting", "auc", "ap"]
        assert [r[1] for r in rows[1:]] == ["m=0.05", "m=0.1", "m=0.2", "m=0.4", "adaptive-variance"]
        assert len(rows) == 6
        for row in rows[1:]:
            assert row[0] == "margin"
            assert float(row[2]) > 0
            assert float(row[3]) > 0

    def test_window_sweep_schema(self, fixture_paths, tmp_path):
        out = tmp_path / "sweep"
        code = run_cli(
            "sweep",
            "--manifest", fixture_paths.manifest,
            "--out", out,
            "--temporal", fixture_paths.temporal,
            "--mock-script", fixture_paths.script,
            "--divisors", "5,10,15",
        )
        assert code == 0
        rows = read_csv_rows(out / "sweep.csv")
        assert len(rows) == 4
        assert [r[1] for r in rows[1:]] == ["max(300, T/5)", "max(300, T/10)", "max(300, T/15)"]
        assert all(r[0] == "window" for r in rows[1:])

    def test_singleton_sweep_equals_run_plus_evaluate(self, fixture_paths, tmp_path, e2e):
        out = tmp_path / "sweep1"
        code = run_cli(
            "sweep",
            "--manifest", fixture_paths.manifest,
            "--out", out,
            "--temporal", fixture_paths.temporal,
            "--mock-script", fixture_paths.script,
            "--margins", "0.05",
        )
        assert code == 0
        _, _, auc, ap = read_csv_rows(out / "sweep.csv")[1]

        assert run_cli(
            "evaluate",
            "--run-dir", e2e.out,
            "--manifest", fixture_paths.manifest,
            "--temporal", fixture_paths.temporal,
        ) == 0
        report = json.loads((e2e.out / "metrics.json").read_text())
        assert float(auc) == pytest.approx(report["auc"], abs=1e-12)
        assert float(ap) == pytest.approx(report["ap"], abs=1e-12)

    def test_sweep_requires_a_grid(self, fixture_paths, tmp_path):
        assert run_cli(
            "sweep",
            "--manifest", fixture_paths.manifest,
            "--out", tmp_path / "s",
            "--temporal", fixture_paths.temporal,
            "--mock-script", fixture_paths.script,
        ) == 2


class TestPlotCommand:
    def test_plots_written_and_deterministic(self, fixture_paths, e2e, tmp_path):
        out1, out2 = tmp_path / "p1", tmp_path / "p2"
        for out in (out1, out2):
            code = run_cli(
                "plot",
                "--run-dir", e2e.out,
                "--temporal", fixture_paths.temporal,
                "--out-dir", out,
            )
            assert code == 0
        for name in ("vnormal.svg", "vanom.svg", "vamb.svg"):
            first = (out1 / name).read_bytes()
            assert first == (out2 / name).read_bytes()
            assert first.startswith(b"<svg")

    def test_interval_shading_present_only_for_anomalous(self, fixture_paths, e2e, tmp_path):
        out = tmp_path / "plots"
        run_cli("plot", "--run-dir", e2e.out, "--temporal", fixture_paths.temporal, "--out-dir", out)
        normal = (out / "vnormal.svg").read_text()
        anom = (out / "vanom.svg").read_text()
        assert "#f5b7b1" not in normal  # no ground-truth shading
        assert "#f5b7b1" in anom
