import configparser
import json
import logging
import math
import os
import re
from functools import lru_cache

from nonlocal_transport.exceptions import ConfigurationError, TransportError
from nonlocal_transport.nonlocal_transport.nonlocal_operators.quadrature import CALIBRATION_ENV
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import WORKERS_ENV

logger = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "run_config.json")
TRUE_VALUES = {"1", "true", "yes", "on"}
FALSE_VALUES = {"0", "false", "no", "off"}
PI_PATTERN = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi$")


@lru_cache(maxsize=1)
def get_schema():
	"""Field schema of an experiment file"""
	with open(SCHEMA_PATH) as handle:
		return json.load(handle)


def get_fields(section=None):
	fields = get_schema()["fields"]
	if section is None:
		return fields
	return [f for f in fields if f["section"] == section]


def parse_number(raw):
	"""Float from ``0.5``, ``1e-3``, ``pi``, ``2pi`` or ``64*pi``"""
	if isinstance(raw, (int, float)) and not isinstance(raw, bool):
		return float(raw)
	text = str(raw).strip().lower()
	match = PI_PATTERN.match(text)
	if match:
		return float(match.group(1) or 1.0) * math.pi
	return float(text)


def coerce_value(field, raw):
	"""Convert a raw value to the field's type; raises ValueError"""
	fieldtype = field["fieldtype"]
	if fieldtype == "Float":
		value = parse_number(raw)
		if not math.isfinite(value):
			raise ValueError(f"{raw!r} is not a finite number")
		return value
	if fieldtype == "Int":
		value = parse_number(raw)
		if value != int(value):
			raise ValueError(f"{raw!r} is not an integer")
		value = int(value)
	elif fieldtype == "Check":
		text = str(raw).strip().lower()
		if text in TRUE_VALUES:
			return True
		if text in FALSE_VALUES:
			return False
		raise ValueError(f"{raw!r} is not a yes/no value")
	else:
		value = str(raw).strip()
	options = field.get("options")
	if options and str(value) not in options.split("\n"):
		raise ValueError(f"{value!r} is not one of {options.split(chr(10))}")
	return value


def read_conf_file(path):
	"""Sections of an INI experiment file as plain dictionaries"""
	parser = configparser.ConfigParser(interpolation=None)
	parser.optionxform = str
	with open(path) as handle:
		try:
			parser.read_file(handle)
		except configparser.Error as e:
			raise ConfigurationError(f"Could not parse {path}: {str(e)}", [str(e)])
	return {section: dict(parser.items(section)) for section in parser.sections()}


def write_conf_file(conf, path):
	"""Write a conf dictionary as an INI experiment file in schema section order"""
	parser = configparser.ConfigParser(interpolation=None)
	parser.optionxform = str
	order = get_schema()["section_order"]
	for section in sorted(conf, key=lambda s: order.index(s) if s in order else len(order)):
		parser[section] = {key: str(value) for key, value in conf[section].items()}
	with open(path, "w") as handle:
		parser.write(handle)


def merge_conf(conf, overrides):
	merged = {section: dict(values) for section, values in (conf or {}).items()}
	for section, values in (overrides or {}).items():
		merged.setdefault(section, {}).update(values)
	return merged


def section_values(conf, section):
	"""Coerced values of one section with schema defaults filled in"""
	raw = (conf or {}).get(section, {})
	values = {}
	for field in get_fields(section):
		name = field["fieldname"]
		if name in raw and str(raw[name]).strip() != "":
			source = raw[name]
		elif field.get("default") is not None:
			source = field["default"]
		else:
			values[name] = None
			continue
		try:
			values[name] = coerce_value(field, source)
		except (TypeError, ValueError) as e:
			raise ConfigurationError(f"[{section}] {name}: {str(e)}", [f"[{section}] {name}: {str(e)}"])
	return values


class TransportConfig:
	"""Configuration class for transport experiments"""

	@staticmethod
	def get_model_settings(conf=None):
		"""Get model exponents and viscosity"""
		values = section_values(conf, "model")
		return {
			"n": values.get("n"),
			"alpha": values.get("alpha"),
			"gamma": values.get("gamma"),
			"kappa": values.get("kappa"),
			"inviscid": values.get("inviscid"),
		}

	@staticmethod
	def get_grid_settings(conf=None):
		"""Get torus resolution and period"""
		values = section_values(conf, "grid")
		return {"N": values.get("N"), "L": values.get("L")}

	@staticmethod
	def get_initial_condition_settings(conf=None):
		"""Get the initial-condition family and its parameters"""
		values = section_values(conf, "initial_condition")
		return {
			"family": values.get("family"),
			"amplitude": values.get("amplitude"),
			"width": values.get("width"),
			"offset": values.get("offset"),
			"modes": values.get("modes"),
			"mode": values.get("mode"),
			"seed": values.get("seed"),
		}

	@staticmethod
	def get_stepper_settings(conf=None):
		"""Get time-step control"""
		values = section_values(conf, "stepper")
		return {
			"cfl_safety": values.get("cfl_safety"),
			"dt_max": values.get("dt_max"),
			"dt_min": values.get("dt_min"),
			"advection_on": values.get("advection_on"),
			"dealias_on": values.get("dealias_on"),
			"grad_ceiling": values.get("grad_ceiling"),
		}

	@staticmethod
	def get_run_settings(conf=None):
		"""Get horizon and recording cadence"""
		values = section_values(conf, "run")
		return {"t_end": values.get("t_end"), "cadence": values.get("cadence")}

	@staticmethod
	def get_diagnostics_settings(conf=None):
		"""Get monitored-quantity exponents"""
		values = section_values(conf, "diagnostics")
		return {
			"s": values.get("s"),
			"beta": values.get("beta"),
			"delta": values.get("delta"),
			"track_j": values.get("track_j"),
			"extrema": values.get("extrema"),
			"eventual": values.get("eventual"),
			"c0": values.get("c0"),
			"c": values.get("c"),
		}

	@staticmethod
	def get_output_settings(conf=None):
		"""Get artifact destinations"""
		values = section_values(conf, "output")
		return {
			"directory": values.get("directory"),
			"final_state": values.get("final_state"),
			"summary": values.get("summary"),
		}

	@staticmethod
	def get_blowup_settings(conf=None):
		"""Get blow-up probe options"""
		values = section_values(conf, "blowup")
		return {
			"run_control": values.get("run_control"),
			"control_amplitude": values.get("control_amplitude"),
		}

	@staticmethod
	def get_environment_settings():
		"""Get settings taken from the process environment"""
		return {
			"workers": os.environ.get(WORKERS_ENV, "1"),
			"calibration_path": os.environ.get(CALIBRATION_ENV),
		}

	@staticmethod
	def validate_configuration(conf=None):
		"""Validate an experiment configuration"""
		errors = []
		warnings = []
		conf = conf or {}
		known_sections = get_schema()["section_order"]

		for section, raw in conf.items():
			if section not in known_sections:
				warnings.append(f"Unknown section [{section}] is ignored.")
				continue
			known = {f["fieldname"] for f in get_fields(section)}
			for key in raw:
				if key not in known:
					warnings.append(f"Unknown key {key!r} in [{section}] is ignored.")

		for field in get_fields():
			section, name = field["section"], field["fieldname"]
			raw = conf.get(section, {}).get(name)
			if field.get("reqd") and field.get("default") is None and (raw is None or str(raw).strip() == ""):
				errors.append(f"[{section}] {name} is required.")
			elif raw is not None and str(raw).strip() != "":
				try:
					coerce_value(field, raw)
				except (TypeError, ValueError) as e:
					errors.append(f"[{section}] {name}: {str(e)}")
		if errors:
			return {"valid": False, "errors": errors, "warnings": warnings}

		# Domain checks run only on a well-typed configuration
		from nonlocal_transport.nonlocal_transport.cli_runner.run_config import build_run_config

		try:
			run_config = build_run_config(conf)
		except TransportError as e:
			errors.append(str(e))
		else:
			if not run_config.stepper.dealias_on:
				warnings.append("Dealiasing is off; the advection product will alias.")
			if run_config.model.inviscid and run_config.stepper.grad_ceiling >= 1e8:
				warnings.append("Inviscid run with the default gradient ceiling; blow-up is detected late.")
			if run_config.t_end > 0 and run_config.t_end < run_config.stepper.dt_max:
				warnings.append("t_end is shorter than dt_max; the run takes a single step.")

		worker_setting = TransportConfig.get_environment_settings()["workers"]
		if not str(worker_setting).isdigit() or int(worker_setting) < 1:
			warnings.append(f"{WORKERS_ENV}={worker_setting!r} is not a positive integer; using 1.")

		return {"valid": len(errors) == 0, "errors": errors, "warnings": warnings}

	@staticmethod
	def get_default_settings(conf=None):
		"""Get every section with defaults filled in"""
		return {
			"model": TransportConfig.get_model_settings(conf),
			"grid": TransportConfig.get_grid_settings(conf),
			"initial_condition": TransportConfig.get_initial_condition_settings(conf),
			"stepper": TransportConfig.get_stepper_settings(conf),
			"run": TransportConfig.get_run_settings(conf),
			"diagnostics": TransportConfig.get_diagnostics_settings(conf),
			"output": TransportConfig.get_output_settings(conf),
			"blowup": TransportConfig.get_blowup_settings(conf),
		}
