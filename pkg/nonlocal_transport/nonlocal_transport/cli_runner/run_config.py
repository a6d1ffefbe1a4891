import logging
from dataclasses import asdict, dataclass, field, replace

from nonlocal_transport.exceptions import ConfigurationError, TransportError
from nonlocal_transport.nonlocal_transport.config.transport_config import (
	TransportConfig,
	merge_conf,
	read_conf_file,
)
from nonlocal_transport.nonlocal_transport.diagnostics.diagnostics import (
	DiagnosticsSettings,
	EventualRegularityParams,
)
from nonlocal_transport.nonlocal_transport.integrator.integrator import StepPolicy
from nonlocal_transport.nonlocal_transport.nonlocal_operators.nonlocal_operators import ModelParams
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import make_grid
from nonlocal_transport.utils import get_hooks, resolve_hook

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitialCondition:
	"""A named generator from the initial_conditions registry with its parameters"""

	family: str
	amplitude: float = 1.0
	width: float = 0.5
	offset: float = 0.0
	modes: int = 4
	mode: int = 1
	seed: int = 0

	def validate(self):
		if self.family not in get_hooks("initial_conditions"):
			raise ConfigurationError(f"Unknown initial-condition family {self.family!r}", [f"family: {self.family}"])

	def generate(self, grid):
		generator = resolve_hook("initial_conditions", self.family)
		return generator(grid, **{k: v for k, v in asdict(self).items() if k != "family"})


@dataclass(frozen=True)
class OutputSettings:
	directory: str = "output"
	final_state: bool = True
	summary: bool = True


@dataclass(frozen=True)
class BlowupSettings:
	run_control: bool = False
	control_amplitude: float = 0.01


@dataclass(frozen=True)
class RunConfig:
	"""Everything one run needs; equal configs reproduce byte-identical diagnostics"""

	model: ModelParams
	grid: object
	initial_condition: InitialCondition
	stepper: StepPolicy
	t_end: float
	diagnostics: DiagnosticsSettings
	cadence: int = 10
	output: OutputSettings = field(default_factory=OutputSettings)
	blowup: BlowupSettings = field(default_factory=BlowupSettings)

	def initial_field(self):
		return self.initial_condition.generate(self.grid)

	def refined(self, factor):
		"""Same experiment on a grid with factor times the points per axis"""
		return replace(self, grid=self.grid.refined(factor))

	def with_amplitude(self, amplitude):
		return replace(self, initial_condition=replace(self.initial_condition, amplitude=amplitude))

	def to_dict(self):
		"""Plain-data form written into run summaries"""
		eventual = self.diagnostics.eventual
		return {
			"model": asdict(self.model),
			"grid": {"n": self.grid.n, "N": self.grid.N, "L": self.grid.L},
			"initial_condition": asdict(self.initial_condition),
			"stepper": asdict(self.stepper),
			"run": {"t_end": self.t_end, "cadence": self.cadence},
			"diagnostics": {
				"s": self.diagnostics.s,
				"beta": self.diagnostics.beta,
				"delta": self.diagnostics.delta,
				"track_j": self.diagnostics.track_j,
				"extrema": self.diagnostics.extrema,
				"eventual": asdict(eventual) if eventual is not None else None,
			},
			"output": asdict(self.output),
			"blowup": asdict(self.blowup),
		}


def build_run_config(conf):
	"""RunConfig from a conf dictionary; raises TransportError subclasses on invalid values"""
	model_settings = TransportConfig.get_model_settings(conf)
	grid_settings = TransportConfig.get_grid_settings(conf)
	run_settings = TransportConfig.get_run_settings(conf)
	diagnostics_settings = TransportConfig.get_diagnostics_settings(conf)

	model = ModelParams(**model_settings)
	grid = make_grid(model.n, grid_settings["N"], grid_settings["L"])
	initial_condition = InitialCondition(**TransportConfig.get_initial_condition_settings(conf))
	initial_condition.validate()
	theta0 = initial_condition.generate(grid)
	stepper = StepPolicy(**TransportConfig.get_stepper_settings(conf))
	if run_settings["t_end"] is None:
		raise ConfigurationError("[run] t_end is required", ["[run] t_end is required"])
	if run_settings["cadence"] < 1:
		raise ConfigurationError(f"[run] cadence must be at least 1, got {run_settings['cadence']}")

	eventual = None
	if diagnostics_settings["eventual"]:
		eventual = EventualRegularityParams.for_model(
			model.alpha,
			model.gamma,
			diagnostics_settings["beta"],
			theta0.sup_norm(),
			c0=diagnostics_settings["c0"],
			c=diagnostics_settings["c"],
		)
	diagnostics = DiagnosticsSettings(
		s=diagnostics_settings["s"],
		beta=diagnostics_settings["beta"],
		delta=diagnostics_settings["delta"],
		track_j=diagnostics_settings["track_j"],
		eventual=eventual,
		extrema=diagnostics_settings["extrema"],
	)
	return RunConfig(
		model=model,
		grid=grid,
		initial_condition=initial_condition,
		stepper=stepper,
		t_end=float(run_settings["t_end"]),
		diagnostics=diagnostics,
		cadence=int(run_settings["cadence"]),
		output=OutputSettings(**TransportConfig.get_output_settings(conf)),
		blowup=BlowupSettings(**TransportConfig.get_blowup_settings(conf)),
	)


def preset_conf(name):
	return resolve_hook("scenario_presets", name)


def load_conf(config_path=None, preset=None, seed=None, out=None):
	"""Conf dictionary from a preset and/or an experiment file, with command-line overrides"""
	if config_path is None and preset is None:
		raise ConfigurationError("Either a config file or a preset is required")
	conf = {}
	if preset is not None:
		try:
			conf = preset_conf(preset)
		except KeyError as e:
			raise ConfigurationError(str(e), [str(e)])
	if config_path is not None:
		conf = merge_conf(conf, read_conf_file(config_path))
	overrides = {}
	if seed is not None:
		overrides["initial_condition"] = {"seed": seed}
	if out is not None:
		overrides["output"] = {"directory": out}
	return merge_conf(conf, overrides)


def load_run_config(config_path=None, preset=None, seed=None, out=None):
	"""Validated RunConfig; raises ConfigurationError listing every problem found"""
	conf = load_conf(config_path, preset, seed, out)
	validation = TransportConfig.validate_configuration(conf)
	for warning in validation["warnings"]:
		logger.warning(warning)
	if not validation["valid"]:
		raise ConfigurationError(f"Invalid configuration: {'; '.join(validation['errors'])}", validation["errors"])
	try:
		return build_run_config(conf)
	except TransportError as e:
		raise ConfigurationError(str(e), [str(e)])
