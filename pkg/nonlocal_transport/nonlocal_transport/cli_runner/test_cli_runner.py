import json
import math
import os
import sys
from types import SimpleNamespace

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from nonlocal_transport.exceptions import ArtifactError, ConfigurationError, ParameterError
from nonlocal_transport.nonlocal_transport.cli_runner import artifacts
from nonlocal_transport.nonlocal_transport.cli_runner.artifacts import (
	STATE_MAGIC,
	read_final_state,
	staged_artifacts,
	write_diagnostics_csv,
	write_final_state,
	write_frame_csv,
	write_json,
	write_run_artifacts,
)
from nonlocal_transport.nonlocal_transport.cli_runner.initial_conditions import (
	cosine,
	gaussian_bump,
	multi_mode,
	radial_bump,
	tanh_front,
)
from nonlocal_transport.nonlocal_transport.cli_runner.run_config import (
	InitialCondition,
	build_run_config,
	load_conf,
	load_run_config,
)
from nonlocal_transport.nonlocal_transport.config.transport_config import write_conf_file
from nonlocal_transport.nonlocal_transport.diagnostics.diagnostics import DIAGNOSTICS_COLUMNS
from nonlocal_transport.nonlocal_transport.integrator.integrator import Termination, run
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import ScalarField, asymmetry_norm, make_grid

SMALL = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 1.0, "kappa": 0.5},
	"grid": {"N": 16},
	"initial_condition": {"family": "gaussian-bump", "amplitude": 1.0, "width": 0.8},
	"run": {"t_end": 0.02, "cadence": 1},
	"diagnostics": {"extrema": "grid"},
}


class TestInitialConditions:
	def test_gaussian_bump_is_radial_and_peaks_at_centre(self, small_grid2d):
		theta = gaussian_bump(small_grid2d, amplitude=2.0, width=0.5, offset=0.1)
		assert theta.values[small_grid2d.centre_index] == pytest.approx(2.1)
		assert asymmetry_norm(theta) < 1e-12

	def test_radial_bump_has_compact_support(self, small_grid2d):
		theta = radial_bump(small_grid2d, amplitude=1.0, width=1.0)
		outside = small_grid2d.centred_radius >= 1.0
		assert np.all(theta.values[outside] == 0.0)
		assert theta.sup_norm() == pytest.approx(1.0)
		assert asymmetry_norm(theta) < 1e-12

	def test_radial_bump_must_fit_in_box(self, small_grid2d):
		with pytest.raises(ParameterError):
			radial_bump(small_grid2d, width=4.0)

	@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
	def test_multi_mode_is_normalized_and_seeded(self, seed):
		grid = make_grid(2, 16)
		first = multi_mode(grid, amplitude=0.5, offset=1.0, modes=3, seed=seed)
		second = multi_mode(grid, amplitude=0.5, offset=1.0, modes=3, seed=seed)
		assert np.array_equal(first.values, second.values)
		assert np.max(np.abs(first.values - 1.0)) == pytest.approx(0.5)

	def test_tanh_front_is_bounded(self, grid1d):
		theta = tanh_front(grid1d, amplitude=0.3, width=0.1)
		assert theta.sup_norm() <= 0.3

	def test_cosine(self, grid1d):
		theta = cosine(grid1d, amplitude=2.0, offset=1.0, mode=3)
		x = grid1d.coordinates[0]
		assert np.max(np.abs(theta.values - (1.0 + 2.0 * np.cos(3 * x)))) < 1e-14

	def test_non_positive_width(self, grid1d):
		with pytest.raises(ParameterError):
			gaussian_bump(grid1d, width=0.0)

	@pytest.mark.parametrize("family", [gaussian_bump, radial_bump, tanh_front])
	def test_width_below_grid_spacing(self, family):
		grid = make_grid(2, 16)
		with pytest.raises(ParameterError):
			family(grid, width=0.5 * grid.dx)
		family(grid, width=2 * grid.dx)

	def test_refined_sampling_matches_coarse_nodes(self):
		condition = InitialCondition("tanh-front", amplitude=1.0, width=0.3)
		coarse = condition.generate(make_grid(1, 32))
		fine = condition.generate(make_grid(1, 64))
		assert np.max(np.abs(fine.values[::2] - coarse.values)) < 1e-14


class TestRunConfig:
	def test_build_from_conf(self):
		config = build_run_config(SMALL)
		assert config.grid.N == 16
		assert config.model.kappa == 0.5
		assert config.diagnostics.eventual is None
		assert config.initial_field().grid == config.grid

	def test_refined_keeps_everything_but_the_grid(self):
		config = build_run_config(SMALL)
		fine = config.refined(2)
		assert fine.grid.N == 32
		assert fine.model == config.model
		assert fine.initial_condition == config.initial_condition

	def test_eventual_clock_uses_data_size(self):
		conf = dict(SMALL, model={"alpha": 0.5, "gamma": 0.8}, diagnostics={"eventual": 1, "beta": 0.6})
		config = build_run_config(conf)
		assert config.diagnostics.eventual.eta0 == pytest.approx(0.6 ** 5)

	def test_overrides(self):
		conf = load_conf(preset="critical", seed=7, out="elsewhere")
		assert conf["initial_condition"]["seed"] == 7
		assert conf["output"]["directory"] == "elsewhere"

	def test_needs_a_source(self):
		with pytest.raises(ConfigurationError):
			load_conf()

	def test_unknown_preset(self):
		with pytest.raises(ConfigurationError):
			load_conf(preset="hypercritical")

	def test_invalid_file_reports_every_error(self, tmp_path):
		path = tmp_path / "bad.ini"
		write_conf_file({"model": {"alpha": "2"}, "grid": {"N": "many"}}, path)
		with pytest.raises(ConfigurationError) as info:
			load_run_config(path)
		assert len(info.value.errors) >= 2

	def test_to_dict_is_plain_data(self):
		data = build_run_config(SMALL).to_dict()
		assert data["grid"] == {"n": 2, "N": 16, "L": pytest.approx(2 * math.pi)}
		assert data["initial_condition"]["family"] == "gaussian-bump"


class TestArtifacts:
	def test_final_state_layout(self, tmp_path, small_grid2d, smooth_field):
		theta = smooth_field(small_grid2d, seed=3)
		path = write_final_state(theta, 0.25, tmp_path / "final_state.bin")
		payload = open(path, "rb").read()
		assert payload[:8] == STATE_MAGIC
		assert np.frombuffer(payload[8:16], dtype="<u4").tolist() == [2, 32]
		assert np.frombuffer(payload[16:32], dtype="<f8").tolist() == [small_grid2d.L, 0.25]
		assert len(payload) == 32 + 8 * 32 * 32
		restored, t = read_final_state(path)
		assert t == 0.25
		assert np.array_equal(restored.values, theta.values)

	def test_bad_magic(self, tmp_path):
		path = tmp_path / "junk.bin"
		path.write_bytes(b"NOTSTATE" + bytes(24))
		with pytest.raises(ArtifactError):
			read_final_state(path)

	def test_truncated_values(self, tmp_path, grid1d):
		path = tmp_path / "final_state.bin"
		write_final_state(ScalarField.zeros(grid1d), 0.0, path)
		path.write_bytes(path.read_bytes()[:-8])
		with pytest.raises(ArtifactError):
			read_final_state(path)

	def test_diagnostics_header_is_pinned(self, tmp_path):
		config = build_run_config(SMALL)
		result = run(config)
		path = write_diagnostics_csv(result.frame, tmp_path / "diagnostics.csv")
		with open(path, newline="") as handle:
			header = handle.readline()
		assert header == ",".join(DIAGNOSTICS_COLUMNS) + "\n"
		assert "\r" not in open(path, newline="").read()

	def test_diagnostics_frame_must_have_schema(self, tmp_path):
		with pytest.raises(ArtifactError):
			write_diagnostics_csv(pd.DataFrame({"t": [0.0]}), tmp_path / "diagnostics.csv")

	def test_csv_comments_and_precision(self, tmp_path):
		frame = pd.DataFrame({"x": [0.1, 1 / 3]})
		path = write_frame_csv(frame, tmp_path / "corpus.csv", ["seed=5"])
		lines = open(path).read().splitlines()
		assert lines[0] == "# seed=5"
		assert float(lines[3]) == 1 / 3

	def test_run_artifacts_are_deterministic(self, tmp_path):
		config = build_run_config(SMALL)
		first = write_run_artifacts(config, run(config), str(tmp_path / "a"))
		second = write_run_artifacts(config, run(config), str(tmp_path / "b"))
		assert open(first["diagnostics"], "rb").read() == open(second["diagnostics"], "rb").read()
		assert open(first["final_state"], "rb").read() == open(second["final_state"], "rb").read()
		assert set(first) == {"diagnostics", "final_state", "summary"}

	def test_failed_write_leaves_no_file(self, tmp_path):
		class Exploding:
			columns = DIAGNOSTICS_COLUMNS

			def __getitem__(self, key):
				return self

			def to_csv(self, *args, **kwargs):
				raise RuntimeError("boom")

		with pytest.raises(RuntimeError):
			write_diagnostics_csv(Exploding(), tmp_path / "diagnostics.csv")
		assert list(tmp_path.iterdir()) == []

	def test_json_writes_non_finite_numbers_as_null(self, tmp_path):
		data = {
			"nan": float("nan"),
			"list": [np.inf, 1.5],
			"numpy": np.float64(-np.inf),
			"count": np.int64(3),
			"flag": np.bool_(True),
			"array": np.array([1.0, np.nan]),
		}
		path = write_json(data, tmp_path / "report.json")
		text = open(path).read()
		assert "NaN" not in text and "Infinity" not in text
		assert json.loads(text) == {"nan": None, "list": [None, 1.5], "numpy": None, "count": 3, "flag": True, "array": [1.0, None]}

	@pytest.mark.skipif(sys.platform.startswith("win"), reason="POSIX permission bits")
	@pytest.mark.parametrize("mask, expected", [(0o022, 0o644), (0o027, 0o640)])
	def test_written_files_follow_umask(self, tmp_path, mask, expected):
		previous = os.umask(mask)
		try:
			json_path = write_json({"a": 1}, tmp_path / "report.json")
			state_path = write_final_state(ScalarField.zeros(make_grid(1, 16)), 0.0, tmp_path / "final_state.bin")
		finally:
			os.umask(previous)
		assert os.stat(json_path).st_mode & 0o777 == expected
		assert os.stat(state_path).st_mode & 0o777 == expected

	def test_staged_files_appear_together(self, tmp_path):
		with staged_artifacts() as staging:
			first = write_json({"a": 1}, tmp_path / "first.json", staging)
			second = write_json({"b": 2}, tmp_path / "second.json", staging)
			assert not os.path.exists(first) and not os.path.exists(second)
		assert json.load(open(first)) == {"a": 1}
		assert json.load(open(second)) == {"b": 2}

	def test_failed_summary_keeps_previous_run(self, tmp_path, monkeypatch):
		config = build_run_config(SMALL)
		result = run(config)
		directory = tmp_path / "run"
		paths = write_run_artifacts(config, result, str(directory))
		before = {name: open(path, "rb").read() for name, path in paths.items()}

		def failing_summary(*args, **kwargs):
			raise RuntimeError("summary failed")

		monkeypatch.setattr(artifacts, "run_summary", failing_summary)
		shorter = SimpleNamespace(frame=result.frame.iloc[:1], final_state=result.final_state)
		with pytest.raises(RuntimeError):
			write_run_artifacts(config, shorter, str(directory))
		assert {name: open(path, "rb").read() for name, path in paths.items()} == before
		assert sorted(os.listdir(directory)) == ["diagnostics.csv", "final_state.bin", "run_summary.json"]

	def test_run_completes_for_small_config(self):
		result = run(build_run_config(SMALL))
		assert result.reason == Termination.COMPLETED
