import json

import numpy as np
import pytest

from app.cli import main


def spec_args(command, manifest_dir, spec="F dist(z, g1) <=", *extra):
    return [
        command,
        "--spec", spec,
        "--manifest", str(manifest_dir / "manifest.json"),
        "--trace", str(manifest_dir / "trace.json"),
        *extra,
    ]


class TestMonitorCommands:
    """Test check, score and monitor"""

    def test_check(self, manifest_dir, capsys):
        """Test a satisfied check prints JSON and a summary"""
        assert main(spec_args("check", manifest_dir)) == 0
        captured = capsys.readouterr()
        data = json.loads(captured.out)
        assert data["sat"] is True
        assert data["score"] == pytest.approx(0.5)
        assert "satisfied" in captured.err

    def test_bound(self, manifest_dir, capsys):
        """Test --bound cuts the window"""
        assert main(spec_args("score", manifest_dir, "F dist(z, g1) <=", "--bound", "1")) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["score"] == pytest.approx(-0.25)
        assert data["sat"] is False
        assert data["window"] == [0, 1]

    def test_spec_file(self, manifest_dir, capsys):
        """Test reading the spec from a file"""
        (manifest_dir / "reach.etl").write_text("G dist(z, a) > 0.5\n")
        args = [
            "score",
            "--spec-file", str(manifest_dir / "reach.etl"),
            "--manifest", str(manifest_dir / "manifest.json"),
            "--trace", str(manifest_dir / "trace.json"),
        ]
        assert main(args) == 0
        assert json.loads(capsys.readouterr().out)["score"] == pytest.approx(0.5)

    def test_monitor(self, manifest_dir, capsys):
        """Test the per-prefix series"""
        assert main(spec_args("monitor", manifest_dir)) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["scores"] == pytest.approx([-0.5, -0.25, 0.25, 0.5])
        assert data["sat"] == [False, False, True, True]

    def test_syntax_error(self, manifest_dir, capsys):
        """Test toolkit errors exit 2 with the error code"""
        assert main(spec_args("check", manifest_dir, "F (dist(z, g1) <=")) == 2
        assert "error[spec-syntax]" in capsys.readouterr().err

    def test_missing_spec(self, manifest_dir, capsys):
        """Test a spec is required"""
        args = ["check", "--manifest", str(manifest_dir / "manifest.json"), "--trace", str(manifest_dir / "trace.json")]
        assert main(args) == 2
        assert "error[invalid-input]" in capsys.readouterr().err

    def test_missing_manifest(self, manifest_dir, capsys):
        """Test an unreadable manifest is an io error"""
        args = spec_args("check", manifest_dir)
        args[args.index("--manifest") + 1] = str(manifest_dir / "missing.json")
        assert main(args) == 2
        assert "error[io-error]" in capsys.readouterr().err

    def test_true_scores_null(self, manifest_dir, capsys):
        """Test an unbounded score is printed as null so stdout stays strict JSON"""
        assert main(spec_args("score", manifest_dir, "true")) == 0
        captured = capsys.readouterr()
        data = json.loads(captured.out, parse_constant=pytest.fail)
        assert data["score"] is None
        assert data["sat"] is True
        assert "score inf" in captured.err
        assert main(spec_args("monitor", manifest_dir, "!true")) == 0
        data = json.loads(capsys.readouterr().out, parse_constant=pytest.fail)
        assert data["scores"] == [None] * 4
        assert data["sat"] == [False] * 4

    def test_chamfer_target_on_vector_trace(self, manifest_dir, capsys):
        """Test a patch-set target against a vector trace is a toolkit error"""
        (manifest_dir / "p.json").write_text(json.dumps({"kind": "patch_set", "data": [[1.0, 0.0], [0.0, 1.0]]}))
        (manifest_dir / "manifest.json").write_text(json.dumps({
            "targets": {
                "g1": {"file": "g1.json", "metric": "l2", "threshold": 0.5},
                "p": {"file": "p.json", "metric": "chamfer", "threshold": 0.5},
            }
        }))
        for command in ("check", "score", "monitor"):
            assert main(spec_args(command, manifest_dir, "F (dist(z, p) <= & dist(z, g1) <=)")) == 2
            assert "error[incompatible-metric]" in capsys.readouterr().err

    def test_version(self, capsys):
        """Test --version names the spec language"""
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "ETL-text v1" in capsys.readouterr().out


class TestHeatmapCommand:
    """Test the heatmap command"""

    def test_from_file(self, manifest_dir, tmp_path, capsys):
        """Test a heatmap of the trace file written as CSV"""
        out = tmp_path / "heat.csv"
        assert main(["heatmap", "--embeddings", str(manifest_dir / "trace.json"), "--metric", "l2", "--out", str(out)]) == 0
        matrix = np.loadtxt(out, delimiter=",")
        xs = np.array([0.0, 0.25, 0.75, 1.0])
        np.testing.assert_array_equal(matrix, np.abs(xs[:, None] - xs[None, :]))

    @pytest.mark.parametrize("metric,patches", [("l1", 0), ("l2", 0), ("cosine", 0), ("chamfer", 3)])
    def test_synthetic(self, metric, patches, tmp_path, capsys):
        """Test eight synthetic views under every metric"""
        out = tmp_path / f"{metric}.csv"
        args = ["heatmap", "--synthetic", "8", "--patches", str(patches), "--metric", metric, "--out", str(out)]
        assert main(args) == 0
        matrix = np.loadtxt(out, delimiter=",")
        assert matrix.shape == (8, 8)
        np.testing.assert_array_equal(np.diag(matrix), np.zeros(8))
        np.testing.assert_array_equal(matrix, matrix.T)
        assert np.all(matrix >= 0)

    def test_chamfer_needs_patches(self, capsys):
        """Test chamfer on vector views is refused"""
        assert main(["heatmap", "--metric", "chamfer"]) == 2
        assert "error[incompatible-metric]" in capsys.readouterr().err


class TestPlanCommands:
    """Test plan and demo"""

    def test_plan_writes_outputs(self, tmp_path, capsys):
        """Test the report, episode and CSV land in the output directory"""
        config = tmp_path / "experiment.json"
        config.write_text(json.dumps({
            "name": "short",
            "spec": "phi1",
            "env": {"start": [3.0, 3.0], "goals": {"goal": {"center": [4.0, 3.0], "radius": 0.2}}},
            "plan": {"horizon": 4, "samples": 64, "max_steps": 2},
        }))
        code = main(["plan", str(config), "--out", str(tmp_path / "runs")])
        episode = json.loads(capsys.readouterr().out)
        assert code == (0 if episode["satisfied"] else 1)
        directory = tmp_path / "runs" / "short"
        for name in ("report.json", "episode.json", "episode.csv"):
            assert (directory / name).exists()
        report = json.loads((directory / "report.json").read_text())
        assert report["episode"] == episode

    def test_demo_exit_code(self, tmp_path, capsys):
        """Test demo exits 0 iff satisfied"""
        code = main(["demo", "phi1", "--max-steps", "40", "--out", str(tmp_path)])
        report = json.loads(capsys.readouterr().out)
        assert code == (0 if report["satisfied"] else 1)
        assert (tmp_path / "phi1" / "episode.csv").exists()

    def test_demo_unknown(self):
        """Test argparse refuses unknown experiments"""
        with pytest.raises(SystemExit):
            main(["demo", "phi9"])

    def test_benchmark(self, capsys):
        """Test a one-row benchmark table"""
        assert main(["benchmark", "--specs", "phi1", "--metrics", "l2", "--max-steps", "3"]) == 0
        table = json.loads(capsys.readouterr().out)
        assert table["specs"] == ["phi1"]
        assert set(table["scores"]["phi1"]) == {"l2"}
