"""Monitored quantities of a transport run: norms, increment seminorms, the OSS length,
the eventual-regularity clock and the existence-time scales.

Constants that the analysis leaves non-explicit are normalized to 1, so every time
returned here is a scale, not a certified bound.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from nonlocal_transport.exceptions import ParameterError
from nonlocal_transport.nonlocal_transport.blowup_lab.blowup_lab import j_functional_grid
from nonlocal_transport.nonlocal_transport.nonlocal_operators.nonlocal_operators import (
	NEAR_MAXIMUM_FRACTION,
	Regime,
	classify_regime,
	d_gamma_vector,
	fractional_laplacian_multiplier,
	velocity,
	velocity_gradient_sup,
)
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import (
	AXIS_DIRECTIONS,
	gradient,
	refined_extrema,
	shift_difference,
	shift_length,
)

logger = logging.getLogger(__name__)

DIAGNOSTICS_SCHEMA_VERSION = 1
DIAGNOSTICS_COLUMNS = [
	"t",
	"dt_used",
	"sup_theta",
	"inf_theta",
	"l2_norm",
	"hs_norm",
	"grad_sup",
	"holder_seminorm_beta",
	"oss_length",
	"bkm_integral",
	"u_sup",
	"grad_u_sup",
	"j_value",
	"vartheta_sup",
	"eta",
]
OPTIONAL_COLUMNS = ("j_value", "vartheta_sup", "eta")
EXTREMA_MODES = ("refined", "grid")
MONOTONE_SLACK = 1e-6


@dataclass
class DiagnosticsRecord:
	"""One row of the diagnostics trajectory"""

	t: float
	dt_used: float
	sup_theta: float
	inf_theta: float
	l2_norm: float
	hs_norm: float
	grad_sup: float
	holder_seminorm_beta: float
	oss_length: float
	bkm_integral: float
	u_sup: float
	grad_u_sup: float
	j_value: float = math.nan
	vartheta_sup: float = math.nan
	eta: float = math.nan

	def as_row(self):
		return [getattr(self, column) for column in DIAGNOSTICS_COLUMNS]

	def is_finite(self):
		"""Every tracked entry is finite (untracked optional columns are NaN)"""
		row = asdict(self)
		tracked = [c for c in DIAGNOSTICS_COLUMNS if not (c in OPTIONAL_COLUMNS and math.isnan(row[c]))]
		return all(math.isfinite(row[c]) for c in tracked)


class FieldNorms(NamedTuple):
	sup: float
	inf: float
	l2: float
	hs: float
	grad_sup: float


@dataclass(frozen=True)
class EventualRegularityParams:
	"""beta, eta_0 and the decay constant c_0 of the eventual-regularity clock

	When alpha and gamma are given, beta is checked against the supercritical window at construction.
	"""

	beta: float
	eta0: float
	c0: float = 1.0
	alpha: Optional[float] = None
	gamma: Optional[float] = None

	def __post_init__(self):
		if not self.eta0 > 0:
			raise ParameterError(f"eta0 must be positive, got {self.eta0}")
		if not self.c0 > 0:
			raise ParameterError(f"c0 must be positive, got {self.c0}")
		if not self.beta > 0:
			raise ParameterError(f"beta must be positive, got {self.beta}")
		if (self.alpha is None) != (self.gamma is None):
			raise ParameterError("alpha and gamma must be given together")
		if self.alpha is not None:
			validate_supercritical_window(self.alpha, self.gamma, self.beta)

	def validate_window(self, alpha, gamma):
		validate_supercritical_window(alpha, gamma, self.beta)

	@classmethod
	def for_model(cls, alpha, gamma, beta, theta0_sup, c0=1.0, c=1.0):
		"""Parameters with eta_0 chosen from the data size"""
		validate_supercritical_window(alpha, gamma, beta)
		return cls(beta, eta0_choice(theta0_sup, alpha, gamma, beta, c), c0, alpha, gamma)


@dataclass(frozen=True)
class DiagnosticsSettings:
	"""Which quantities a recorder evaluates, and with which exponents"""

	s: Optional[float] = None
	beta: float = 0.5
	delta: float = 0.1
	track_j: bool = False
	eventual: Optional[EventualRegularityParams] = None
	extrema: str = "refined"
	directions: Optional[tuple] = field(default=None)

	def __post_init__(self):
		self.validate()

	def validate(self):
		if self.s is not None and self.s < 0:
			raise ParameterError(f"Sobolev index s must be non-negative, got {self.s}")
		if not 0 < self.beta < 1:
			raise ParameterError(f"Hoelder exponent must lie in (0, 1), got {self.beta}")
		if not self.delta > 0:
			raise ParameterError(f"OSS threshold delta must be positive, got {self.delta}")
		if self.extrema not in EXTREMA_MODES:
			raise ParameterError(f"extrema must be one of {EXTREMA_MODES}, got {self.extrema!r}")

	def sobolev_index(self, n):
		return self.s if self.s is not None else n / 2 + 1.5


def validate_supercritical_window(alpha, gamma, beta):
	if classify_regime(alpha, gamma) != Regime.SUPERCRITICAL:
		raise ParameterError(f"The eventual-regularity window needs gamma < 2 alpha, got alpha={alpha} gamma={gamma}")
	if not 2 * alpha - gamma < beta < 2 * alpha:
		raise ParameterError(f"beta must lie in ({2 * alpha - gamma:g}, {2 * alpha:g}), got {beta}")


# Norms

def l2_norm(theta):
	return float(math.sqrt(np.sum(theta.values ** 2) * theta.grid.cell_volume))


def hs_norm(theta, s):
	"""||theta||_{H^s dot} = || |k|^s c_k ||_2 (the zero mode counts only for s = 0)"""
	weights = fractional_laplacian_multiplier(theta.grid, s)
	return float(math.sqrt(np.sum(np.abs(weights * theta.spectrum) ** 2)))


def norms(theta, s, extrema="grid"):
	"""(sup, inf, L2, H^s dot, sup |grad theta|)"""
	if s < 0:
		raise ParameterError(f"Sobolev index s must be non-negative, got {s}")
	if extrema == "refined":
		top, bottom = refined_extrema(theta)
	else:
		top, bottom = float(np.max(theta.values)), float(np.min(theta.values))
	return FieldNorms(top, bottom, l2_norm(theta), hs_norm(theta, s), gradient(theta).sup_norm())


# Increment-based estimators

def dyadic_shift_set(grid, directions=None):
	"""Lattice offsets of magnitude 1, 2, 4, ..., N/2 cells along each direction"""
	directions = tuple(directions) if directions is not None else AXIS_DIRECTIONS[grid.n]
	for direction in directions:
		if len(direction) != grid.n or not any(direction):
			raise ParameterError(f"Invalid shift direction {direction} for dimension {grid.n}")
	shifts = []
	magnitude = 1
	while magnitude <= grid.N // 2:
		shifts.extend(tuple(magnitude * c for c in direction) for direction in directions)
		magnitude *= 2
	return shifts


def increment_maxima(theta, shifts):
	"""[(|h|, max_x |delta_h theta(x)|)] over the shift set"""
	return [(shift_length(theta.grid, h), float(np.max(np.abs(shift_difference(theta, h))))) for h in shifts]


def weighted_increment_max(increments, eta_value, beta):
	best = 0.0
	for length, increment in increments:
		best = max(best, increment / (eta_value ** 2 + length ** 2) ** (beta / 2))
	return best


def vartheta_sup(theta, eta_value, beta, shifts=None):
	"""max over sampled (x, h) of |delta_h theta(x)| / (eta^2 + |h|^2)^(beta/2)"""
	if eta_value < 0:
		raise ParameterError(f"eta must be non-negative, got {eta_value}")
	shifts = shifts if shifts is not None else dyadic_shift_set(theta.grid)
	return weighted_increment_max(increment_maxima(theta, shifts), eta_value, beta)


def holder_seminorm(theta, beta, shifts=None):
	"""Lower estimate of [theta]_{C^beta} over a shift set"""
	if not 0 < beta < 1:
		raise ParameterError(f"Hoelder exponent must lie in (0, 1), got {beta}")
	return vartheta_sup(theta, 0.0, beta, shifts)


def oss_radii(grid):
	"""Dyadic radii 2 dx, 4 dx, ... below the torus diameter, then the diameter itself"""
	radii = []
	radius = 2 * grid.dx
	while radius < grid.diameter:
		radii.append(radius)
		radius *= 2
	radii.append(grid.diameter)
	return radii


def oss_length(theta, delta, shifts=None, radii=None):
	"""Largest radius R with every sampled pair closer than R oscillating by at most delta; 0 if none"""
	if not delta > 0:
		raise ParameterError(f"delta must be positive, got {delta}")
	shifts = shifts if shifts is not None else dyadic_shift_set(theta.grid)
	radii = sorted(radii) if radii is not None else oss_radii(theta.grid)
	increments = increment_maxima(theta, shifts)
	best = 0.0
	for radius in radii:
		worst = max((o for length, o in increments if length < radius), default=0.0)
		if worst > delta:
			break
		best = radius
	return best


class OssStabilityReport(NamedTuple):
	"""OSS_{sigma/4} length of the data and the uniform OSS_sigma length along the snapshots"""

	initial_length: float
	uniform_length: float

	@property
	def premise(self):
		return self.initial_length > 0

	@property
	def holds(self):
		return not self.premise or self.uniform_length > 0


def oss_stability(snapshots, sigma, shifts=None, radii=None):
	"""Whether OSS_{sigma/4} at the first snapshot is followed by a uniform OSS_sigma length"""
	snapshots = list(snapshots)
	if not snapshots:
		raise ParameterError("oss_stability needs at least one snapshot")
	initial = oss_length(snapshots[0], sigma / 4, shifts, radii)
	uniform = min(oss_length(theta, sigma, shifts, radii) for theta in snapshots)
	return OssStabilityReport(initial, uniform)


def conditional_regularity_ratio(theta, beta, gamma, shifts=None):
	"""min of D_gamma(grad f) [f]_beta^p / |grad f|^(2 + p), p = gamma/(1 - beta), near maximal gradient"""
	if not 0 < beta < 1:
		raise ParameterError(f"beta must lie in (0, 1), got {beta}")
	grad = gradient(theta)
	magnitude = grad.magnitude()
	peak = float(np.max(magnitude))
	if peak == 0:
		raise ParameterError("The conditional-regularity ratio needs a non-constant field")
	power = gamma / (1 - beta)
	seminorm = holder_seminorm(theta, beta, shifts)
	selected = magnitude >= NEAR_MAXIMUM_FRACTION * peak
	remainder = d_gamma_vector(grad, gamma).values
	return float(np.min(remainder[selected] * seminorm ** power / magnitude[selected] ** (2 + power)))


# Time scales

def _positive_norms(theta0, s):
	l2 = l2_norm(theta0)
	hs = hs_norm(theta0, s)
	if l2 == 0 or hs == 0:
		raise ParameterError("Time scales are undefined for data with a vanishing L2 or H^s norm")
	return l2, hs


def existence_time_scale(theta0, s, alpha, n=None):
	"""T_0 = 1 / (||theta_0||_2^(1-a) ||theta_0||_{H^s dot}^a), a = (n + 4 alpha)/(2 s)"""
	n = n if n is not None else theta0.grid.n
	if not s > n / 2 + 1:
		raise ParameterError(f"The existence-time scale needs s > n/2 + 1 = {n / 2 + 1:g}, got {s}")
	l2, hs = _positive_norms(theta0, s)
	a = (n + 4 * alpha) / (2 * s)
	return 1.0 / (l2 ** (1 - a) * hs ** a)


def hs_growth_envelope(t, theta0, s, alpha, n=None):
	"""Upper envelope of ||theta(t)||_{H^s dot} from y' <= ||theta_0||_2^(1-a) y^(1+a); inf once it blows up"""
	n = n if n is not None else theta0.grid.n
	scale = existence_time_scale(theta0, s, alpha, n)
	a = (n + 4 * alpha) / (2 * s)
	hs = hs_norm(theta0, s)
	remaining = 1 - a * np.asarray(t, dtype=float) / scale
	with np.errstate(divide="ignore", invalid="ignore"):
		envelope = np.where(remaining > 0, hs / np.where(remaining > 0, remaining, 1.0) ** (1 / a), np.inf)
	return float(envelope) if envelope.ndim == 0 else envelope


def global_regularity_data_size(theta0, s, alpha, gamma, n=None):
	"""||theta_0||_{H^s dot}^a ||theta_0||_2^(1-a), a = (n + 4 alpha - 2 gamma)/(2 s)"""
	n = n if n is not None else theta0.grid.n
	if not s > n / 2 + 1:
		raise ParameterError(f"The data size needs s > n/2 + 1 = {n / 2 + 1:g}, got {s}")
	l2, hs = _positive_norms(theta0, s)
	a = (n + 4 * alpha - 2 * gamma) / (2 * s)
	return hs ** a * l2 ** (1 - a)


def eventual_regularity_time(theta0_sup, alpha, gamma, beta):
	"""T*_alpha = beta^(2 alpha/(2 alpha - gamma)) ||theta_0||_sup^(gamma/(2 alpha - gamma))"""
	validate_supercritical_window(alpha, gamma, beta)
	if theta0_sup < 0:
		raise ParameterError(f"||theta_0||_sup must be non-negative, got {theta0_sup}")
	gap = 2 * alpha - gamma
	return beta ** (2 * alpha / gap) * theta0_sup ** (gamma / gap)


def eta0_choice(theta0_sup, alpha, gamma, beta, c=1.0):
	"""eta_0 = (c beta ||theta_0||_sup)^(1/(2 alpha - gamma))"""
	validate_supercritical_window(alpha, gamma, beta)
	if not theta0_sup > 0:
		raise ParameterError(f"eta_0 needs non-zero data, got ||theta_0||_sup = {theta0_sup}")
	return (c * beta * theta0_sup) ** (1 / (2 * alpha - gamma))


def eta_vanishing_time(params, gamma):
	"""16 c_0 beta eta_0^gamma / gamma"""
	return 16 * params.c0 * params.beta * params.eta0 ** gamma / gamma


def eta_of_t(t, params, gamma):
	"""(eta_0^gamma - gamma t / (16 c_0 beta))^(1/gamma) before it vanishes, exactly 0 afterwards"""
	t = np.asarray(t, dtype=float)
	if np.any(t < 0):
		raise ParameterError("eta is defined for t >= 0 only")
	vanish = eta_vanishing_time(params, gamma)
	remaining = params.eta0 ** gamma - gamma * t / (16 * params.c0 * params.beta)
	value = np.where(t >= vanish, 0.0, np.maximum(remaining, 0.0) ** (1 / gamma))
	return float(value) if value.ndim == 0 else value


def vartheta_ceiling(theta0_sup, eta0, beta):
	"""M = 4 ||theta_0||_sup / eta_0^beta"""
	return 4 * theta0_sup / eta0 ** beta


class EventualRegularityReport(NamedTuple):
	t_star: float
	ceiling: float
	first_crossing: Optional[float]
	max_after: Optional[float]

	@property
	def holds(self):
		return self.first_crossing is None and (self.max_after is None or self.max_after <= self.ceiling)


def check_eventual_regularity(frame, params, gamma, theta0_sup):
	"""Compare the recorded vartheta and Hoelder columns with the ceiling M

	``frame`` holds the diagnostics columns of a run recorded with eventual-regularity
	tracking; the Hoelder seminorm after the vanishing time must stay below M.
	"""
	t_star = eta_vanishing_time(params, gamma)
	ceiling = vartheta_ceiling(theta0_sup, params.eta0, params.beta)
	above = frame[frame["vartheta_sup"] > ceiling]
	first = float(above["t"].iloc[0]) if not above.empty else None
	after = frame[frame["t"] > t_star]
	worst = float(after["holder_seminorm_beta"].max()) if not after.empty else None
	return EventualRegularityReport(t_star, ceiling, first, worst)


# Monotone principles along a trajectory

class MonotonicityReport(NamedTuple):
	"""Largest violations of the maximum principle and L2 decay, net of the per-unit-time slack"""

	sup_excess: float
	inf_deficit: float
	l2_excess: float

	@property
	def holds(self):
		return self.sup_excess <= 0 and self.inf_deficit <= 0 and self.l2_excess <= 0


def monotonicity_report(frame, slack=MONOTONE_SLACK):
	"""Step-to-step changes of max theta, min theta and ||theta||_2 against slack * ||theta_0|| * dt"""
	if len(frame) < 2:
		return MonotonicityReport(0.0, 0.0, 0.0)
	elapsed = np.diff(frame["t"].to_numpy())
	sup0 = max(abs(frame["sup_theta"].iloc[0]), abs(frame["inf_theta"].iloc[0]))
	l20 = frame["l2_norm"].iloc[0]
	sup_excess = np.diff(frame["sup_theta"].to_numpy()) - slack * sup0 * elapsed
	inf_deficit = -np.diff(frame["inf_theta"].to_numpy()) - slack * sup0 * elapsed
	l2_excess = np.diff(frame["l2_norm"].to_numpy()) - slack * l20 * elapsed
	return MonotonicityReport(float(np.max(sup_excess)), float(np.max(inf_deficit)), float(np.max(l2_excess)))


def records_to_frame(records):
	"""Diagnostics records as a DataFrame with the fixed column order"""
	return pd.DataFrame([r.as_row() for r in records], columns=DIAGNOSTICS_COLUMNS)


class DiagnosticsRecorder:
	"""Evaluates a DiagnosticsRecord for states of one run"""

	def __init__(self, settings, params, grid):
		self.settings = settings
		self.params = params
		self.grid = grid
		self.s = settings.sobolev_index(grid.n)
		self.shifts = dyadic_shift_set(grid, settings.directions)
		self.radii = oss_radii(grid)
		if settings.eventual is not None:
			settings.eventual.validate_window(params.alpha, params.gamma)

	def record(self, state, dt_used=math.nan):
		theta = state.theta
		field_norms = norms(theta, self.s, self.settings.extrema)
		increments = increment_maxima(theta, self.shifts)
		holder = weighted_increment_max(increments, 0.0, self.settings.beta)
		oss = oss_length(theta, self.settings.delta, self.shifts, self.radii)
		record = DiagnosticsRecord(
			t=float(state.t),
			dt_used=float(dt_used),
			sup_theta=field_norms.sup,
			inf_theta=field_norms.inf,
			l2_norm=field_norms.l2,
			hs_norm=field_norms.hs,
			grad_sup=field_norms.grad_sup,
			holder_seminorm_beta=holder,
			oss_length=oss,
			bkm_integral=float(state.bkm_integral),
			u_sup=velocity(theta, self.params.alpha).sup_norm(),
			grad_u_sup=velocity_gradient_sup(theta, self.params.alpha),
		)
		if self.settings.track_j:
			record.j_value = j_functional_grid(theta)
		eventual = self.settings.eventual
		if eventual is not None:
			record.eta = eta_of_t(record.t, eventual, self.params.gamma)
			record.vartheta_sup = weighted_increment_max(increments, record.eta, eventual.beta)
		logger.debug(f"Recorded diagnostics at t={record.t:.6g}: grad_sup={record.grad_sup:.6g}")
		return record
