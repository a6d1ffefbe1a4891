import logging
import math
import os
from dataclasses import replace

import numpy as np

from nonlocal_transport.exceptions import ArtifactError, ParameterError, TransportError
from nonlocal_transport.nonlocal_transport.blowup_lab.blowup_lab import (
	extract_radial_profile,
	fit_riccati,
)
from nonlocal_transport.nonlocal_transport.blowup_lab.corpus import (
	evaluate_corpus,
	random_radial_corpus,
	summarize_corpus,
	zero_profile,
)
from nonlocal_transport.nonlocal_transport.cli_runner.artifacts import (
	prepare_output_dir,
	read_final_state,
	staged_artifacts,
	write_frame_csv,
	write_json,
	write_run_artifacts,
)
from nonlocal_transport.nonlocal_transport.cli_runner.run_config import load_run_config
from nonlocal_transport.nonlocal_transport.diagnostics.diagnostics import (
	DIAGNOSTICS_COLUMNS,
	DiagnosticsRecorder,
	DiagnosticsSettings,
	check_eventual_regularity,
	eventual_regularity_time,
	existence_time_scale,
	monotonicity_report,
	records_to_frame,
)
from nonlocal_transport.nonlocal_transport.integrator.integrator import (
	SimState,
	rescale_solution,
	run,
	scaling_discrepancy,
	self_convergence,
)
from nonlocal_transport.nonlocal_transport.nonlocal_operators.nonlocal_operators import ModelParams, Regime

logger = logging.getLogger(__name__)

SCALING_TOLERANCE_FACTOR = 10.0
SCALING_ABSOLUTE_FLOOR = 1e-10
J_MONOTONE_SLACK = 1e-12


def error_response(e, doing):
	"""Log a failed command and map the failure to an exit code"""
	logger.error(f"Error {doing}: {str(e)}")
	if isinstance(e, (OSError, ArtifactError)):
		exit_code = 3
	elif isinstance(e, (TransportError, ValueError, KeyError)):
		exit_code = 2
	else:
		exit_code = 1
	return {"status": "error", "exit_code": exit_code, "message": str(e)}


def _optional(function, *args, **kwargs):
	try:
		return function(*args, **kwargs)
	except ParameterError as e:
		logger.debug(f"Skipped {function.__name__}: {str(e)}")
		return None


def time_scales(config, theta0, frame):
	"""Existence-time scale and, for supercritical runs, the eventual-regularity times"""
	model = config.model
	s = config.diagnostics.sobolev_index(model.n)
	scales = {"existence_time_scale": _optional(existence_time_scale, theta0, s, model.alpha, model.n)}
	eventual = config.diagnostics.eventual
	if model.regime == Regime.SUPERCRITICAL and eventual is not None:
		scales["eventual_regularity_time"] = _optional(eventual_regularity_time, theta0.sup_norm(), model.alpha, model.gamma, eventual.beta)
		report = check_eventual_regularity(frame, eventual, model.gamma, theta0.sup_norm())
		scales["eventual_regularity"] = dict(report._asdict(), holds=report.holds)
	return scales


def cmd_simulate(config_path=None, out=None, seed=None, quiet=False, preset=None):
	"""Run one configured experiment and write its artifacts"""
	try:
		config = load_run_config(config_path, preset, seed, out)
		theta0 = config.initial_field()
		result = run(config, theta0=theta0, progress=not quiet)
		frame = result.frame
		monotonicity = monotonicity_report(frame)
		extra = time_scales(config, theta0, frame)
		extra["monotonicity"] = dict(monotonicity._asdict(), holds=monotonicity.holds)
		artifacts = write_run_artifacts(config, result, config.output.directory, extra)
		return {
			"status": "success",
			"exit_code": 0,
			"termination": result.reason.value,
			"final_time": result.final_state.t,
			"steps": result.final_state.step_count,
			"artifacts": artifacts,
			"message": f"{result.reason.value} at t={result.final_state.t:.6g}",
		}
	except Exception as e:
		return error_response(e, "running simulation")


def cmd_scaling_test(config_path=None, lam=2, out=None, seed=None, quiet=False, preset=None):
	"""Compare a run with its dilated counterpart against the self-convergence tolerance"""
	try:
		config = load_run_config(config_path, preset, seed, out)
		model = config.model
		rescale_solution(config.initial_field(), lam, model.alpha, model.gamma)
		scaling = scaling_discrepancy(config, lam)
		if lam == 1:
			convergence = None
			tolerance = SCALING_ABSOLUTE_FLOOR
		else:
			convergence = self_convergence(config).discrepancy
			tolerance = SCALING_TOLERANCE_FACTOR * convergence + SCALING_ABSOLUTE_FLOOR
		passed = scaling.discrepancy <= tolerance
		report = {
			"lambda": lam,
			"regime": model.regime.value,
			"discrepancy": scaling.discrepancy,
			"sample_times": scaling.times,
			"self_convergence": convergence,
			"tolerance": tolerance,
			"passed": passed,
			"base_termination": scaling.base.reason.value,
			"rescaled_termination": scaling.rescaled.reason.value,
		}
		prepare_output_dir(config.output.directory)
		path = write_json(report, os.path.join(config.output.directory, "scaling_report.json"))
		return {
			"status": "success",
			"exit_code": 0,
			"report": report,
			"artifacts": {"report": path},
			"message": f"discrepancy {scaling.discrepancy:.3e} vs tolerance {tolerance:.3e}: {'pass' if passed else 'fail'}",
		}
	except Exception as e:
		return error_response(e, "running scaling test")


def validate_lab_parameters(corpus_size, alphas, gammas):
	if corpus_size < 1:
		raise ParameterError(f"corpus_size must be at least 1, got {corpus_size}")
	for alpha in alphas:
		if not 0 < alpha < 1:
			raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
	for gamma in gammas:
		if not 0 < gamma < 1:
			raise ParameterError(f"gamma must lie in (0, 1) for the weighted dissipation check, got {gamma}")


def cmd_inequality_lab(corpus_size=20, seed=0, alphas=(0.5,), gammas=(0.25, 0.5), out="output", workers=1, include_zero=False, quiet=False):
	"""Sweep the weighted inequalities over a seeded radial corpus"""
	try:
		alphas = [float(a) for a in alphas]
		gammas = [float(g) for g in gammas]
		validate_lab_parameters(corpus_size, alphas, gammas)
		profiles = random_radial_corpus(corpus_size, seed)
		if include_zero:
			profiles.append(zero_profile())
		frame = evaluate_corpus(profiles, alphas, gammas, workers=workers, progress=not quiet)
		summary = summarize_corpus(frame)
		prepare_output_dir(out)
		comments = [f"seed={seed}", f"corpus_size={corpus_size}", f"include_zero={int(bool(include_zero))}"]
		with staged_artifacts() as staging:
			artifacts = {
				"corpus": write_frame_csv(frame, os.path.join(out, "corpus.csv"), comments, staging),
				"summary": write_json(summary, os.path.join(out, "corpus_summary.json"), staging),
			}
		return {
			"status": "success",
			"exit_code": 0,
			"rows": len(frame),
			"summary": summary,
			"artifacts": artifacts,
			"message": f"Evaluated {len(frame)} corpus rows",
		}
	except Exception as e:
		return error_response(e, "running inequality lab")


def j_statistics(frame, result):
	"""Growth of J and of sup |grad theta| over the resolved window, and the Riccati prediction"""
	rows = frame[np.isfinite(frame["j_value"])]
	times = rows["t"].to_numpy()
	j = rows["j_value"].to_numpy()
	stats = {
		"termination": result.reason.value,
		"termination_time": result.final_state.t,
		"j_initial": float(j[0]) if j.size else None,
		"j_final": float(j[-1]) if j.size else None,
		"j_increasing": bool(np.all(np.diff(j) >= -J_MONOTONE_SLACK * max(1.0, float(np.max(np.abs(j)))))) if j.size > 1 else None,
		"j_growth_rate": float((j[-1] - j[0]) / (times[-1] - times[0])) if j.size > 1 and times[-1] > times[0] else None,
		"j_threshold_ratio": float(j[0] / (1.0 + max(abs(rows["sup_theta"].iloc[0]), abs(rows["inf_theta"].iloc[0])))) if j.size else None,
		"grad_growth_exponent": None,
		"riccati": None,
		"predicted_blowup_time": None,
		"prediction_ratio": None,
	}
	grad = rows["grad_sup"].to_numpy()
	if grad.size > 1 and np.all(grad > 0) and times[-1] > times[0]:
		stats["grad_growth_exponent"] = float(np.polyfit(times, np.log(grad), 1)[0])
	if j.size >= 3:
		fit = fit_riccati(times, j)
		stats["riccati"] = fit._asdict()
		predicted = fit.blowup_time(float(j[0]), 1.0)
		stats["predicted_blowup_time"] = predicted
		if predicted is not None and result.final_state.t > 0:
			stats["prediction_ratio"] = predicted / result.final_state.t
	return stats


def validate_probe(config):
	model = config.model
	if not model.inviscid and not model.gamma < model.alpha:
		raise ParameterError(f"The blow-up probe needs gamma < alpha (or the inviscid switch), got alpha={model.alpha} gamma={model.gamma}")
	extract_radial_profile(config.initial_field())


def cmd_blowup_probe(config_path=None, out=None, seed=None, quiet=False, preset=None):
	"""Track J and the gradient on radial data, optionally with a small-amplitude control run"""
	try:
		config = load_run_config(config_path, preset, seed, out)
		config = replace(config, diagnostics=replace(config.diagnostics, track_j=True))
		validate_probe(config)
		result = run(config, progress=not quiet)
		report = {"probe": j_statistics(result.frame, result), "control": None}
		directory = config.output.directory
		control = None
		if config.blowup.run_control:
			control = run(config.with_amplitude(config.blowup.control_amplitude), progress=not quiet)
			report["control"] = j_statistics(control.frame, control)
		with staged_artifacts() as staging:
			artifacts = write_run_artifacts(config, result, directory, {"blowup": report["probe"]}, staging)
			if control is not None:
				artifacts["control_diagnostics"] = write_frame_csv(control.frame, os.path.join(directory, "control_diagnostics.csv"), staging=staging)
			artifacts["report"] = write_json(report, os.path.join(directory, "blowup_report.json"), staging)
		logger.info(f"Blow-up probe: {result.reason.value} at t={result.final_state.t:.6g}")
		return {
			"status": "success",
			"exit_code": 0,
			"report": report,
			"artifacts": artifacts,
			"message": f"probe {result.reason.value} at t={result.final_state.t:.6g}",
		}
	except Exception as e:
		return error_response(e, "running blow-up probe")


def cmd_diagnose(state_path, config_path=None, out=None, preset=None, quiet=False):
	"""Recompute the diagnostics row of a final_state.bin dump"""
	try:
		theta, t = read_final_state(state_path)
		if config_path is not None or preset is not None:
			config = load_run_config(config_path, preset)
			model, settings = config.model, config.diagnostics
			if model.n != theta.grid.n:
				raise ParameterError(f"Config dimension {model.n} does not match the dump's {theta.grid.n}")
		else:
			model, settings = ModelParams(n=theta.grid.n), DiagnosticsSettings()
		record = DiagnosticsRecorder(settings, model, theta.grid).record(SimState(theta, t), math.nan)
		directory = out or os.path.dirname(os.path.abspath(state_path))
		prepare_output_dir(directory)
		path = write_frame_csv(records_to_frame([record]), os.path.join(directory, "diagnose.csv"))
		return {
			"status": "success",
			"exit_code": 0,
			"record": dict(zip(DIAGNOSTICS_COLUMNS, record.as_row())),
			"artifacts": {"diagnostics": path},
			"message": f"Diagnosed state at t={t:.6g}",
		}
	except Exception as e:
		return error_response(e, "diagnosing final state")


def cmd_init(out="presets", calibrate=True, calibration_path=None, quiet=False):
	"""Install checks, preset experiment files and quadrature calibrations"""
	try:
		from nonlocal_transport import hooks
		from nonlocal_transport.utils import get_attr

		get_attr(hooks.before_install)()
		provisioned = get_attr(hooks.after_install)(out, calibrate=calibrate, calibration_path=calibration_path)
		return {
			"status": "success",
			"exit_code": 0,
			"artifacts": provisioned,
			"message": f"Wrote {len(provisioned['presets'])} preset files to {out}",
		}
	except Exception as e:
		return error_response(e, "initializing presets")
