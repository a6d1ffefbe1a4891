import enum
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from nonlocal_transport.exceptions import ParameterError, UnderResolutionWarning
from nonlocal_transport.nonlocal_transport.nonlocal_operators.quadrature import LatticeEvaluator, QuadratureParams
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import (
	ScalarField,
	VectorField,
	apply_multiplier,
	derivative_multiplier,
	divergence,
	dyadic_shifts,
	gradient,
	interpolate,
	restrict,
	shift_difference,
	shift_length,
)

logger = logging.getLogger(__name__)

REGIME_EPSILON = 1e-12
UNDER_RESOLUTION_TOLERANCE = 1e-6
NEAR_MAXIMUM_FRACTION = 0.5


class Regime(str, enum.Enum):
	SUBCRITICAL = "Subcritical"
	CRITICAL = "Critical"
	SUPERCRITICAL = "Supercritical"


def classify_regime(alpha, gamma):
	"""Subcritical if gamma > 2 alpha, critical if equal within 1e-12, else supercritical"""
	difference = gamma - 2 * alpha
	if abs(difference) <= REGIME_EPSILON:
		return Regime.CRITICAL
	return Regime.SUBCRITICAL if difference > 0 else Regime.SUPERCRITICAL


@dataclass(frozen=True)
class ModelParams:
	"""Dimension, velocity exponent alpha, dissipation order gamma and viscosity kappa"""

	n: int = 2
	alpha: float = 0.5
	gamma: float = 1.0
	kappa: float = 1.0
	inviscid: bool = False

	def __post_init__(self):
		self.validate()

	def validate(self):
		self.validate_dimension()
		self.validate_exponents()
		self.validate_viscosity()

	def validate_dimension(self):
		if self.n not in (1, 2):
			raise ParameterError(f"Dimension must be 1 or 2, got {self.n}")

	def validate_exponents(self):
		if not 0 < self.alpha < 1:
			raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
		if not 0 < self.gamma < 2:
			raise ParameterError(f"gamma must lie in (0, 2), got {self.gamma}")

	def validate_viscosity(self):
		if self.inviscid:
			if self.kappa != 0:
				raise ParameterError(f"The inviscid switch requires kappa = 0, got {self.kappa}")
		elif not self.kappa > 0:
			raise ParameterError(f"kappa must be positive (use the inviscid switch for kappa = 0), got {self.kappa}")

	@property
	def regime(self):
		return classify_regime(self.alpha, self.gamma)


def fractional_laplacian_multiplier(grid, s):
	"""|k|^s with value 0 at k = 0 for s != 0"""
	if s == 0:
		return np.ones(grid.shape)
	with np.errstate(over="ignore"):
		largest = np.power(np.max(grid.kmag), float(s))
	if not np.isfinite(largest):
		raise ParameterError(f"|k|^{s} overflows at the largest mode of the grid")
	kmag = grid.kmag
	with np.errstate(divide="ignore"):
		return np.where(kmag == 0, 0.0, np.where(kmag == 0, 1.0, kmag) ** s)


def fractional_laplacian(f, s):
	"""Lambda^s f by the Fourier multiplier |k|^s"""
	return apply_multiplier(f, fractional_laplacian_multiplier(f.grid, s))


def velocity_multiplier(grid, alpha, axis):
	return derivative_multiplier(grid, axis) * fractional_laplacian_multiplier(grid, 2 * alpha - 2)


def velocity(theta, alpha):
	"""u = grad Lambda^(2 alpha - 2) theta"""
	return VectorField(apply_multiplier(theta, velocity_multiplier(theta.grid, alpha, axis)) for axis in range(theta.grid.n))


def velocity_gradient_sup(theta, alpha):
	"""max over the grid of the Frobenius norm of grad u"""
	grid = theta.grid
	base = fractional_laplacian_multiplier(grid, 2 * alpha - 2)
	total = np.zeros(grid.shape)
	for i in range(grid.n):
		for j in range(grid.n):
			entry = apply_multiplier(theta, -grid.wavevector[i] * grid.wavevector[j] * base).values
			total = total + entry ** 2
	return float(np.sqrt(np.max(total)))


def divergence_residual(theta, alpha):
	"""||div u + Lambda^(2 alpha) theta||_sup relative to ||Lambda^(2 alpha) theta||_sup"""
	target = fractional_laplacian(theta, 2 * alpha)
	scale = target.sup_norm()
	if scale == 0:
		return 0.0
	return float(np.max(np.abs(divergence(velocity(theta, alpha)).values + target.values)) / scale)


def d_gamma_spectral(f, gamma, warn=True):
	"""D_gamma(f) = 2 f Lambda^gamma f - Lambda^gamma(f^2), products formed alias-free on the 2x grid"""
	fine = interpolate(f, 2)
	remainder = 2.0 * fine * fractional_laplacian(fine, gamma) - fractional_laplacian(fine * fine, gamma)
	result = restrict(remainder, 2)
	result = ScalarField(f.grid, result.values)
	if warn:
		tolerance = UNDER_RESOLUTION_TOLERANCE * f.sup_norm() ** 2
		lowest = float(np.min(result.values))
		if lowest < -tolerance:
			message = f"D_gamma minimum {lowest:.3e} below -{tolerance:.3e}: field looks under-resolved"
			logger.warning(message)
			warnings.warn(message, UnderResolutionWarning, stacklevel=2)
	return result


def d_gamma_vector(v, gamma):
	"""Sum of the component remainders of a vector field"""
	total = np.zeros(v.grid.shape)
	for component in v.components:
		total = total + d_gamma_spectral(component, gamma, warn=False).values
	return ScalarField(v.grid, total)


def d_gamma_quadrature_report(f, gamma, x, q=None):
	"""Lattice quadrature of D_gamma(f)(x) with shell breakdown and truncation estimate"""
	return LatticeEvaluator(f, gamma, q).d_gamma(x)


def d_gamma_quadrature(f, gamma, x, q=None):
	"""c sum_k integral |f(x) - f(x+y)|^2 / |y - L k|^(n+gamma) dy at the grid point x"""
	return d_gamma_quadrature_report(f, gamma, x, q).value


def fractional_laplacian_quadrature(f, s, x, q=None):
	"""Singular-integral form of Lambda^s f at the grid point x"""
	return LatticeEvaluator(f, s, q).fractional_laplacian(x).value


def sample_points(grid, count, seed=0):
	"""Distinct grid indices drawn by a seeded generator"""
	rng = np.random.default_rng(seed)
	count = min(int(count), grid.size)
	flat = rng.choice(grid.size, size=count, replace=False)
	return [tuple(int(i) for i in np.unravel_index(int(k), grid.shape)) for k in flat]


def pointwise_identity_residual(f, gamma, method="quadrature", q=None, points=16, seed=0):
	"""sup |f Lambda f - 1/2 Lambda(f^2) - 1/2 D_gamma(f)| / ||f||_sup^2 over sampled points"""
	scale = f.sup_norm() ** 2
	if scale == 0:
		return 0.0
	fine = interpolate(f, 2)
	identity = restrict(fine * fractional_laplacian(fine, gamma) - 0.5 * fractional_laplacian(fine * fine, gamma), 2).values
	if method == "spectral":
		remainder = d_gamma_spectral(f, gamma, warn=False).values
		return float(np.max(np.abs(identity - 0.5 * remainder)) / scale)
	if method != "quadrature":
		raise ParameterError(f"Unknown method {method!r}")
	evaluator = LatticeEvaluator(f, gamma, q)
	worst = 0.0
	for x in sample_points(f.grid, points, seed):
		residual = abs(identity[x] - 0.5 * evaluator.d_gamma(x).value)
		worst = max(worst, residual)
	return float(worst / scale)


def nonlinear_lower_bound_ratio(f, gamma, method="spectral", q=None, max_points=16):
	"""min of D_gamma(grad f) ||f||_sup^gamma / |grad f|^(2+gamma) over near-maximal gradient points"""
	grad = gradient(f)
	magnitude = grad.magnitude()
	peak = float(np.max(magnitude))
	if peak == 0:
		raise ParameterError("The lower-bound ratio needs a non-constant field")
	selected = magnitude >= NEAR_MAXIMUM_FRACTION * peak
	sup_gamma = f.sup_norm() ** gamma
	if method == "spectral":
		remainder = d_gamma_vector(grad, gamma).values
		return float(np.min(remainder[selected] * sup_gamma / magnitude[selected] ** (2 + gamma)))
	if method != "quadrature":
		raise ParameterError(f"Unknown method {method!r}")
	indices = np.argwhere(selected)
	order = np.argsort(-magnitude[selected], kind="stable")[:max_points]
	evaluators = [LatticeEvaluator(component, gamma, q) for component in grad.components]
	ratios = []
	for row in indices[order]:
		x = tuple(int(i) for i in row)
		remainder = sum(ev.d_gamma(x, check_divergence=False).value for ev in evaluators)
		ratios.append(remainder * sup_gamma / magnitude[x] ** (2 + gamma))
	return float(min(ratios))


def finite_difference_lower_bound_ratio(theta, gamma, shifts=None):
	"""min of D_gamma(delta_h theta) |h|^gamma ||theta||^gamma / |delta_h theta|^(gamma+2) over sampled (x, h)"""
	shifts = shifts if shifts is not None else dyadic_shifts(theta.grid)
	sup_gamma = theta.sup_norm() ** gamma
	best = math.inf
	for shift in shifts:
		increment = shift_difference(theta, shift)
		peak = float(np.max(np.abs(increment)))
		if peak == 0:
			continue
		remainder = d_gamma_spectral(ScalarField(theta.grid, increment), gamma, warn=False).values
		selected = np.abs(increment) >= NEAR_MAXIMUM_FRACTION * peak
		length = shift_length(theta.grid, shift)
		ratio = remainder[selected] * length ** gamma * sup_gamma / np.abs(increment[selected]) ** (gamma + 2)
		best = min(best, float(np.min(ratio)))
	if best == math.inf:
		raise ParameterError("The finite-difference ratio needs a non-constant field")
	return best
