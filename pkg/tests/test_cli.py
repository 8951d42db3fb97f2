import json

import pytest
from click.testing import CliRunner

from rfocus.cli import main


@pytest.fixture
def runner():
    return CliRunner()


class TestGenEnv:
    def test_iid(self, runner, tmp_path):
        out = tmp_path / "env.json"
        result = runner.invoke(main, ["gen-env", "--n-elements", "12",
                                      "--element-sigma", "0.5", "--seed", "4",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        env = json.loads(out.read_text())
        assert len(env["h"]) == 12

    def test_scene(self, runner, tmp_path):
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps({
            "wavelength_m": 2.0,
            "grid": {"rows": 1, "cols": 2, "row_spacing_m": 1.0,
                     "col_spacing_m": 1.0},
            "tx_m": [0.0, 0.0, 3.0],
            "rx_m": [0.0, 0.0, 4.0],
        }))
        out = tmp_path / "env.json"
        result = runner.invoke(main, ["gen-env", "--scene",
                                      "--scene-file", str(scene_path),
                                      "--frequency", "149896229.0",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert len(json.loads(out.read_text())["h"]) == 2

    def test_scene_requires_file_and_frequency(self, runner, tmp_path):
        result = runner.invoke(main, ["gen-env", "--scene",
                                      "--out", str(tmp_path / "env.json")])
        assert result.exit_code != 0


class TestOptimize:
    def _make_env(self, runner, tmp_path):
        out = tmp_path / "env.json"
        result = runner.invoke(main, ["gen-env", "--n-elements", "10",
                                      "--seed", "3", "--out", str(out)])
        assert result.exit_code == 0, result.output
        return out

    def test_halfplane(self, runner, tmp_path):
        env = self._make_env(runner, tmp_path)
        result = runner.invoke(main, ["optimize", "--env", str(env),
                                      "--algorithm", "halfplane"])
        assert result.exit_code == 0, result.output
        assert "best config:" in result.output

    def test_controller_writes_report(self, runner, tmp_path):
        env = self._make_env(runner, tmp_path)
        report_path = tmp_path / "report.json"
        result = runner.invoke(main, ["optimize", "--env", str(env),
                                      "--noise", "0.2", "--batch-size", "100",
                                      "--budget", "500",
                                      "--out", str(report_path)])
        assert result.exit_code == 0, result.output
        report = json.loads(report_path.read_text())
        assert "best_config_hex" in report
        assert report["achieved_ratio"] > 0

    def test_brute_force_matches_halfplane(self, runner, tmp_path):
        env = self._make_env(runner, tmp_path)
        out_a = runner.invoke(main, ["optimize", "--env", str(env),
                                     "--algorithm", "halfplane"])
        out_b = runner.invoke(main, ["optimize", "--env", str(env),
                                     "--algorithm", "brute-force"])
        assert out_a.output.splitlines()[0] == out_b.output.splitlines()[0]


class TestExperimentCommands:
    def test_pi_bound_run(self, runner, tmp_path):
        out = tmp_path / "pi"
        result = runner.invoke(main, ["pi-bound", "--trials", "100",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "[PASS]" in result.output
        assert (out / "manifest.json").exists()
        assert (out / "series" / "pi_bound.csv").exists()

    def test_underscore_spelling_accepted(self, runner, tmp_path):
        out = tmp_path / "pi"
        result = runner.invoke(main, ["pi_bound", "--trials", "50",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output

    def test_failing_experiment_exits_nonzero(self, runner, tmp_path):
        out = tmp_path / "ta"
        result = runner.invoke(main, ["two-approx", "--trials", "500",
                                      "--out", str(out)])
        assert result.exit_code == 1
        assert "[FAIL]" in result.output
        # outputs are still written for inspection
        assert (out / "summary.json").exists()

    def test_spec_file_parameters(self, runner, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({"params": {"n_choices": [4, 8]},
                                         "trials": 60, "seed": 5}))
        out = tmp_path / "pi"
        result = runner.invoke(main, ["pi-bound", "--spec", str(spec_path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["trials"] == 60
        assert manifest["seed"] == 5
        assert manifest["params"] == {"n_choices": [4, 8]}

    def test_cli_overrides_spec_file(self, runner, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({"trials": 60, "seed": 5}))
        out = tmp_path / "pi"
        result = runner.invoke(main, ["pi-bound", "--spec", str(spec_path),
                                      "--trials", "30", "--seed", "9",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["trials"] == 30
        assert manifest["seed"] == 9

    def test_diffraction_writes_grids(self, runner, tmp_path):
        out = tmp_path / "diff"
        result = runner.invoke(main, ["diffraction", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "grids" / "field_far.bin").exists()
