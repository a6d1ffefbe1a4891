import json
import os
from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest

from nonlocal_transport.nonlocal_transport.api.cli import build_parser, main
from nonlocal_transport.nonlocal_transport.api.transport_api import (
	cmd_blowup_probe,
	cmd_diagnose,
	cmd_inequality_lab,
	cmd_init,
	cmd_scaling_test,
	cmd_simulate,
	error_response,
	j_statistics,
)
from nonlocal_transport.nonlocal_transport.cli_runner.run_config import load_run_config
from nonlocal_transport.nonlocal_transport.config.transport_config import merge_conf, write_conf_file
from nonlocal_transport.nonlocal_transport.integrator.integrator import Termination
from nonlocal_transport.exceptions import ArtifactError, ConfigurationError

SMALL = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 1.0, "kappa": 0.5},
	"grid": {"N": 16},
	"initial_condition": {"family": "gaussian-bump", "amplitude": 1.0, "width": 0.8},
	"run": {"t_end": 0.02, "cadence": 2},
	"diagnostics": {"extrema": "grid"},
}

SMALL_PROBE = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 0.2, "kappa": 1.0},
	"grid": {"N": 16},
	"initial_condition": {"family": "radial-bump", "amplitude": 0.05, "width": 1.5},
	"run": {"t_end": 0.05, "cadence": 1},
	"diagnostics": {"extrema": "grid"},
}


@pytest.fixture
def write_config(tmp_path):
	def write(conf, name="experiment.ini"):
		path = tmp_path / name
		write_conf_file(conf, path)
		return str(path)

	return write


class TestErrorResponse:
	@pytest.mark.parametrize("error,code", [
		(ConfigurationError("bad"), 2),
		(ValueError("bad"), 2),
		(FileNotFoundError("gone"), 3),
		(ArtifactError("torn"), 3),
		(RuntimeError("odd"), 1),
	])
	def test_exit_codes(self, error, code):
		response = error_response(error, "testing")
		assert response["status"] == "error"
		assert response["exit_code"] == code


class TestSimulate:
	def test_writes_artifacts(self, tmp_path, write_config):
		out = str(tmp_path / "run")
		result = cmd_simulate(write_config(SMALL), out=out, quiet=True)
		assert result["status"] == "success", result.get("message")
		assert result["termination"] == "Completed"
		assert sorted(os.listdir(out)) == ["diagnostics.csv", "final_state.bin", "run_summary.json"]
		with open(os.path.join(out, "run_summary.json")) as handle:
			summary = json.load(handle)
		assert summary["regime"] == "Critical"
		assert summary["termination"] == "Completed"
		assert summary["existence_time_scale"] > 0
		assert summary["config"]["grid"]["N"] == 16

	def test_byte_identical_reruns(self, tmp_path, write_config):
		path = write_config(SMALL)
		cmd_simulate(path, out=str(tmp_path / "a"), quiet=True)
		cmd_simulate(path, out=str(tmp_path / "b"), quiet=True)
		first = open(tmp_path / "a" / "diagnostics.csv", "rb").read()
		second = open(tmp_path / "b" / "diagnostics.csv", "rb").read()
		assert first == second

	def test_malformed_config_leaves_no_artifacts(self, tmp_path, write_config):
		out = tmp_path / "never"
		path = write_config(merge_conf(SMALL, {"model": {"gamma": "2.5"}}))
		result = cmd_simulate(path, out=str(out), quiet=True)
		assert result["exit_code"] == 2
		assert not out.exists()

	def test_missing_config_file_is_an_io_error(self, tmp_path):
		result = cmd_simulate(str(tmp_path / "absent.ini"), out=str(tmp_path / "out"), quiet=True)
		assert result["exit_code"] == 3

	def test_optional_artifacts_can_be_switched_off(self, tmp_path, write_config):
		out = tmp_path / "lean"
		conf = merge_conf(SMALL, {"output": {"final_state": "0", "summary": "0"}})
		assert cmd_simulate(write_config(conf), out=str(out), quiet=True)["exit_code"] == 0
		assert os.listdir(out) == ["diagnostics.csv"]

	def test_supercritical_summary_has_eventual_times(self, tmp_path, write_config):
		conf = merge_conf(SMALL, {"model": {"gamma": "0.8"}, "diagnostics": {"eventual": "1", "beta": "0.6"}})
		out = tmp_path / "super"
		assert cmd_simulate(write_config(conf), out=str(out), quiet=True)["exit_code"] == 0
		with open(out / "run_summary.json") as handle:
			summary = json.load(handle)
		assert summary["regime"] == "Supercritical"
		assert summary["eventual_regularity_time"] > 0
		assert "holds" in summary["eventual_regularity"]


class TestScalingTest:
	def test_unit_dilation(self, tmp_path, write_config):
		result = cmd_scaling_test(write_config(SMALL), lam=1, out=str(tmp_path / "scaling"), quiet=True)
		assert result["status"] == "success", result.get("message")
		assert result["report"]["discrepancy"] == 0.0
		assert result["report"]["passed"]
		assert os.path.exists(tmp_path / "scaling" / "scaling_report.json")

	def test_dilation_must_divide_n(self, tmp_path, write_config):
		result = cmd_scaling_test(write_config(SMALL), lam=3, out=str(tmp_path / "scaling"), quiet=True)
		assert result["exit_code"] == 2


class TestInequalityLab:
	def test_single_profile_is_deterministic(self, tmp_path):
		first = cmd_inequality_lab(1, seed=11, alphas=[0.5], gammas=[0.5], out=str(tmp_path / "a"), quiet=True)
		second = cmd_inequality_lab(1, seed=11, alphas=[0.5], gammas=[0.5], out=str(tmp_path / "b"), quiet=True)
		assert first["status"] == "success", first.get("message")
		assert first["rows"] == 2
		assert open(tmp_path / "a" / "corpus.csv", "rb").read() == open(tmp_path / "b" / "corpus.csv", "rb").read()
		assert open(tmp_path / "a" / "corpus.csv").readline() == "# seed=11\n"

	def test_zero_profile_rows_are_flagged(self, tmp_path):
		result = cmd_inequality_lab(1, seed=2, alphas=[], gammas=[0.5], out=str(tmp_path), include_zero=True, quiet=True)
		frame = pd.read_csv(tmp_path / "corpus.csv", comment="#")
		assert result["rows"] == 2
		assert frame["degenerate"].tolist() == [False, True]
		assert result["summary"]["dissipation:0.5"]["degenerate"] == 1

	@pytest.mark.parametrize("kwargs", [
		{"corpus_size": 0},
		{"corpus_size": 1, "gammas": [1.5]},
		{"corpus_size": 1, "alphas": [1.0]},
	])
	def test_bad_parameters(self, tmp_path, kwargs):
		result = cmd_inequality_lab(out=str(tmp_path), quiet=True, **kwargs)
		assert result["exit_code"] == 2


class TestBlowupProbe:
	def test_small_radial_data(self, tmp_path, write_config):
		conf = merge_conf(SMALL_PROBE, {"blowup": {"run_control": "1", "control_amplitude": "0.01"}})
		result = cmd_blowup_probe(write_config(conf), out=str(tmp_path / "probe"), quiet=True)
		assert result["status"] == "success", result.get("message")
		probe = result["report"]["probe"]
		assert probe["termination"] == "Completed"
		assert probe["j_initial"] > 0
		assert 0 < probe["j_threshold_ratio"] < probe["j_initial"]
		assert result["report"]["control"]["termination"] == "Completed"
		assert os.path.exists(tmp_path / "probe" / "blowup_report.json")
		assert os.path.exists(tmp_path / "probe" / "control_diagnostics.csv")

	def test_prediction_ratio_is_reported_for_completed_runs(self):
		times = np.linspace(0.0, 1.0, 41)
		j = 2.0 / (1.0 - 0.5 * times)
		frame = pd.DataFrame({"t": times, "j_value": j, "grad_sup": j, "sup_theta": np.ones_like(times), "inf_theta": np.zeros_like(times)})
		result = SimpleNamespace(reason=Termination.COMPLETED, final_state=SimpleNamespace(t=1.0))
		stats = j_statistics(frame, result)
		assert stats["j_increasing"]
		assert stats["predicted_blowup_time"] == pytest.approx(2.0, rel=0.05)
		assert stats["prediction_ratio"] == pytest.approx(stats["predicted_blowup_time"])
		assert stats["j_threshold_ratio"] == pytest.approx(1.0)

	@pytest.mark.slow
	def test_large_radial_bump_concentrates(self, tmp_path):
		result = cmd_blowup_probe(preset="blowup-probe", out=str(tmp_path / "probe"), quiet=True)
		assert result["status"] == "success", result.get("message")
		probe = result["report"]["probe"]
		assert probe["termination"] in ("BlowUp", "DtFloor")
		assert probe["j_increasing"]
		assert probe["j_final"] > probe["j_initial"]
		assert probe["prediction_ratio"] is not None
		assert 1 / 3 <= probe["prediction_ratio"] <= 3
		assert result["report"]["control"]["termination"] == "Completed"

	def test_rejects_non_radial_data(self, tmp_path, write_config):
		conf = merge_conf(SMALL_PROBE, {"initial_condition": {"family": "multi-mode"}})
		result = cmd_blowup_probe(write_config(conf), out=str(tmp_path / "probe"), quiet=True)
		assert result["exit_code"] == 2

	def test_rejects_gamma_above_alpha(self, tmp_path, write_config):
		conf = merge_conf(SMALL_PROBE, {"model": {"gamma": "0.8"}})
		result = cmd_blowup_probe(write_config(conf), out=str(tmp_path / "probe"), quiet=True)
		assert result["exit_code"] == 2


class TestDiagnose:
	def test_recomputes_final_row(self, tmp_path, write_config):
		path = write_config(SMALL)
		out = tmp_path / "run"
		cmd_simulate(path, out=str(out), quiet=True)
		result = cmd_diagnose(str(out / "final_state.bin"), config_path=path, out=str(tmp_path / "again"))
		assert result["status"] == "success", result.get("message")
		final = pd.read_csv(out / "diagnostics.csv").iloc[-1]
		assert result["record"]["t"] == pytest.approx(final["t"], abs=1e-15)
		assert result["record"]["sup_theta"] == pytest.approx(final["sup_theta"], rel=1e-12)

	def test_missing_dump(self, tmp_path):
		assert cmd_diagnose(str(tmp_path / "absent.bin"))["exit_code"] == 3


class TestInit:
	def test_writes_loadable_presets(self, tmp_path):
		result = cmd_init(out=str(tmp_path), calibrate=False)
		assert result["status"] == "success", result.get("message")
		presets = result["artifacts"]["presets"]
		assert len(presets) == 6
		for path in presets:
			assert load_run_config(path).grid.N == 64

	@pytest.mark.slow
	def test_calibrates_preset_grids(self, tmp_path):
		result = cmd_init(out=str(tmp_path), calibration_path=str(tmp_path / "calibration.txt"))
		assert result["artifacts"]["calibrations"]
		assert os.path.exists(tmp_path / "calibration.txt")


class TestCli:
	def test_simulate(self, tmp_path, write_config):
		code = main(["--quiet", "simulate", "--config", write_config(SMALL), "--out", str(tmp_path / "cli")])
		assert code == 0
		assert os.path.exists(tmp_path / "cli" / "diagnostics.csv")

	def test_config_error_exit_code(self, tmp_path, write_config):
		path = write_config(merge_conf(SMALL, {"grid": {"N": "12"}}))
		assert main(["simulate", "--quiet", "--config", path, "--out", str(tmp_path / "cli")]) == 2

	def test_config_or_preset_is_required(self):
		with pytest.raises(SystemExit) as info:
			build_parser().parse_args(["simulate"])
		assert info.value.code == 2

	def test_seed_override_reaches_the_config(self):
		args = build_parser().parse_args(["scaling-test", "--preset", "critical", "--seed", "5", "--lambda", "2"])
		assert args.seed == 5
		assert args.lam == 2
		assert args.preset == "critical"
