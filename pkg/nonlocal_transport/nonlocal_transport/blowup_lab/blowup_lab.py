"""Whole-space machinery for radial data: the weighted functional J, the two weighted
inequalities behind its Riccati bound, the exponential-integral bound and the Riccati
comparison envelope.

Whole-space operators are realized by embedding a compactly supported profile in a large
periodic box centred on the profile origin; the e^(-|x|) weight keeps the box boundary
contribution small and its size is estimated and reported.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.integrate
import scipy.special
from scipy.interpolate import CubicSpline

from nonlocal_transport.exceptions import AsymmetryError, ParameterError, ProfileError
from nonlocal_transport.nonlocal_transport.nonlocal_operators.nonlocal_operators import fractional_laplacian, velocity
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import (
	ScalarField,
	asymmetry_norm,
	gradient,
	make_grid,
)

logger = logging.getLogger(__name__)

RADIAL_CUTOFF = 60.0
ORIGIN_PROBE = 1e-6
ORIGIN_TOLERANCE = 1e-4
SUPPORT_THRESHOLD = 1e-10
ASYMMETRY_GATE = 1e-4
PERIODIZATION_TOLERANCE = 1e-6
GAUSS_POINTS = 24
QUAD_OPTIONS = {"epsabs": 0.0, "epsrel": 1e-12, "limit": 400}


def sphere_area(n):
	"""Surface area of the unit sphere in R^n (2 for n = 1)"""
	return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


class RadialProfile:
	"""Radial function g(r) on R^n, from nodes (cubic spline) or from a callable"""

	def __init__(self, n, r_nodes=None, values=None, support_radius=math.inf, function=None, max_jump=0.5):
		self.n = int(n)
		self.support_radius = float(support_radius)
		self.function = function
		self.max_jump = max_jump
		if function is not None and r_nodes is None:
			top = min(self.support_radius, RADIAL_CUTOFF)
			r_nodes = np.linspace(0.0, top, 513)
		self.r_nodes = np.asarray(r_nodes, dtype=float)
		if values is None:
			if function is None:
				raise ProfileError("A radial profile needs node values or a function")
			values = self._evaluate_function(self.r_nodes)
		self.values = np.asarray(values, dtype=float)
		self.validate()
		self._spline = None
		if function is None:
			self._spline = CubicSpline(self.r_nodes, self.values, bc_type=((1, 0.0), "not-a-knot"))

	@classmethod
	def from_function(cls, n, function, support_radius=math.inf):
		return cls(n, support_radius=support_radius, function=function)

	def validate(self):
		self.validate_dimension()
		self.validate_nodes()
		self.validate_values()

	def validate_dimension(self):
		if self.n < 1:
			raise ProfileError(f"Ambient dimension must be positive, got {self.n}")

	def validate_nodes(self):
		nodes = self.r_nodes
		if nodes.ndim != 1 or nodes.size < 4:
			raise ProfileError("A radial profile needs at least four nodes")
		if nodes[0] != 0.0:
			raise ProfileError(f"Radial nodes must start at 0, got {nodes[0]}")
		if not np.all(np.diff(nodes) > 0):
			raise ProfileError("Radial nodes must be strictly increasing")
		if not self.support_radius > 0:
			raise ProfileError(f"support_radius must be positive, got {self.support_radius}")

	def validate_values(self):
		values = self.values
		if values.shape != self.r_nodes.shape:
			raise ProfileError("Profile values and nodes differ in length")
		if not np.all(np.isfinite(values)):
			raise ProfileError("Profile values must be finite")
		scale = max(1.0, float(np.max(np.abs(values))))
		jump = float(np.max(np.abs(np.diff(values))))
		if jump > self.max_jump * scale:
			raise ProfileError(f"Successive profile values jump by {jump:.3g}; nodes are too sparse")

	def _evaluate_function(self, r):
		return np.broadcast_to(np.asarray(self.function(r), dtype=float), np.shape(r))

	def __call__(self, r):
		r = np.asarray(r, dtype=float)
		if self._spline is not None:
			out = self._spline(np.minimum(r, self.r_nodes[-1]))
		else:
			out = self._evaluate_function(r)
		return np.where(r >= self.support_radius, 0.0, out)

	@property
	def centre_value(self):
		return float(self(0.0))

	def sup_norm(self):
		if self._spline is not None:
			return float(np.max(np.abs(self.values)))
		top = min(self.support_radius, RADIAL_CUTOFF)
		return float(np.max(np.abs(self(np.linspace(0.0, top, 4097)))))

	def integration_radius(self):
		"""Upper limit of the radial integrals: the support radius, capped at the cutoff"""
		return min(self.support_radius, RADIAL_CUTOFF)

	def effective_support(self):
		"""Radius beyond which g is negligibly close to its far-field value (the support radius when finite)"""
		if math.isfinite(self.support_radius):
			return self.support_radius
		r = np.linspace(0.0, RADIAL_CUTOFF, 6001)
		magnitude = np.abs(self(r) - float(self(RADIAL_CUTOFF)))
		peak = float(np.max(magnitude))
		if peak == 0:
			return 1.0
		significant = np.nonzero(magnitude > 1e-12 * peak)[0]
		return max(float(r[significant[-1]]), 1.0)

	def scaled(self, factor):
		"""The profile factor * g"""
		if self._spline is not None:
			return RadialProfile(self.n, self.r_nodes, factor * self.values, self.support_radius, max_jump=self.max_jump)
		return RadialProfile(self.n, support_radius=self.support_radius, function=ScaledFunction(self.function, factor))


@dataclass(frozen=True)
class ScaledFunction:
	function: object
	factor: float

	def __call__(self, r):
		return self.factor * np.asarray(self.function(r), dtype=float)


@dataclass
class WeightedIntegralReport:
	"""Both sides of one weighted inequality with their ratio"""

	lhs_value: float
	rhs_value: float
	ratio: float
	quadrature_error_estimate: float
	degenerate: bool = False
	periodization_flag: bool = False
	periodization_error: float = 0.0


class ExpIntegralBound(NamedTuple):
	lhs: float
	rhs: float

	@property
	def holds(self):
		return self.lhs <= self.rhs


class RiccatiFit(NamedTuple):
	"""Least-squares fit of J' = c7 J^2 - k"""

	c7: float
	k: float
	residual: float

	def blowup_time(self, j0, m, horizon=math.inf):
		if self.c7 <= 0:
			return None
		return riccati_envelope(j0, self.c7, max(self.k, 0.0) / m ** 2, m, horizon)


class SingularEnergyReport(NamedTuple):
	energy: float
	c4: float
	j_value: float
	bound: float

	@property
	def holds(self):
		return abs(self.j_value) <= self.bound * (1 + 1e-9) + 1e-14


class GradientBoundReport(NamedTuple):
	j_value: float
	bound: float
	ratio: float


def check_origin(profile, probe=ORIGIN_PROBE, tolerance=ORIGIN_TOLERANCE):
	"""Reject profiles whose increment g(0) - g(r) does not vanish as r -> 0"""
	g0 = profile.centre_value
	jump = abs(g0 - float(profile(probe)))
	if jump > tolerance * max(1.0, abs(g0)):
		raise ProfileError(f"Profile is not continuous at the origin (|g(0) - g({probe:g})| = {jump:.3g})")


def _radial_quad(integrand, lower, upper):
	value, error = scipy.integrate.quad(integrand, lower, upper, **QUAD_OPTIONS)
	return value, abs(error)


def j_functional(profile):
	"""omega * integral over r of (g(0) - g(r)) / r * e^(-r)"""
	check_origin(profile)
	g0 = profile.centre_value
	top = profile.integration_radius()

	def integrand(r):
		return (g0 - float(profile(r))) / r * math.exp(-r) if r > 0 else 0.0

	value, _ = _radial_quad(integrand, 0.0, top)
	# beyond the last radius g is taken constant
	value += (g0 - float(profile(top))) * float(scipy.special.exp1(top))
	return sphere_area(profile.n) * value


def graded_panels(top, panels):
	"""Breakpoints top * (j / panels)^2, clustered at the origin"""
	return top * (np.arange(panels + 1) / panels) ** 2


def composite_gauss(integrand, breakpoints, points=GAUSS_POINTS):
	"""Gauss-Legendre rule on each panel of a composite mesh"""
	nodes, weights = np.polynomial.legendre.leggauss(points)
	total = 0.0
	for a, b in zip(breakpoints[:-1], breakpoints[1:]):
		half = 0.5 * (b - a)
		r = 0.5 * (a + b) + half * nodes
		total += half * float(np.sum(weights * integrand(r)))
	return total


def j_functional_composite(profile, panels=128):
	"""Same quantity as j_functional by a fixed graded Gauss-Legendre rule"""
	check_origin(profile)
	g0 = profile.centre_value
	top = profile.integration_radius()
	value = composite_gauss(lambda r: (g0 - profile(r)) / r * np.exp(-r), graded_panels(top, panels))
	# beyond the last radius g is taken constant
	value += (g0 - float(profile(top))) * float(scipy.special.exp1(top))
	return sphere_area(profile.n) * value


def singular_energy_integral(profile, alpha):
	"""omega * integral of (g(0) - g)^2 / r^(1 + 2 alpha) dr, with its quadrature error"""
	g0 = profile.centre_value
	top = profile.integration_radius()
	exponent = 1 + 2 * alpha

	def integrand(r):
		return (g0 - float(profile(r))) ** 2 / r ** exponent if r > 0 else 0.0

	value, error = _radial_quad(integrand, 0.0, top)
	outer = g0 - float(profile(top))
	value += outer ** 2 * top ** (-2 * alpha) / (2 * alpha)
	omega = sphere_area(profile.n)
	return omega * value, omega * error


def q_functional(profile, alpha):
	"""omega * integral over r <= 1 of (g(0) - g)^2 / r^(1 + 2 alpha) e^(-r) dr"""
	check_origin(profile)
	g0 = profile.centre_value
	exponent = 1 + 2 * alpha

	def integrand(r):
		return (g0 - float(profile(r))) ** 2 / r ** exponent * math.exp(-r) if r > 0 else 0.0

	value, _ = _radial_quad(integrand, 0.0, min(1.0, profile.integration_radius()))
	if profile.support_radius < 1.0:
		value += g0 ** 2 * scipy.integrate.quad(lambda r: r ** -exponent * math.exp(-r), profile.support_radius, 1.0)[0]
	return sphere_area(profile.n) * value


def holder_constant(n, alpha):
	"""C_4 = sqrt(omega * Gamma(2 alpha) / 2^(2 alpha)), the norm of e^(-|x|) |x|^(alpha - n/2)"""
	return math.sqrt(sphere_area(n) * math.gamma(2 * alpha) / 2 ** (2 * alpha))


def weighted_singular_energy(profile, alpha):
	"""Singular energy of the increments and the Cauchy-Schwarz bound |J| <= C_4 sqrt(energy)"""
	if not 0 < alpha < 1:
		raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
	energy, _ = singular_energy_integral(profile, alpha)
	c4 = holder_constant(profile.n, alpha)
	return SingularEnergyReport(energy, c4, j_functional(profile), c4 * math.sqrt(max(energy, 0.0)))


def delta_functional(profile, delta):
	"""omega * integral of (g(0) - g) / r^(1 + delta) dr, an unweighted variant of J"""
	if not 0 < delta < 2:
		raise ParameterError(f"delta must lie in (0, 2), got {delta}")
	check_origin(profile)
	g0 = profile.centre_value
	top = profile.integration_radius()

	def integrand(r):
		return (g0 - float(profile(r))) / r ** (1 + delta) if r > 0 else 0.0

	value, _ = _radial_quad(integrand, 0.0, top)
	outer = g0 - float(profile(top))
	value += outer * top ** (-delta) / delta
	return sphere_area(profile.n) * value


def embed_profile(profile, N, side):
	"""Sample the profile on a periodic box of the given side centred at the profile origin"""
	grid = make_grid(profile.n, N, side)
	return ScalarField(grid, profile(grid.centred_radius))


def box_resolution(side, points_per_unit):
	return max(64, 2 ** int(math.ceil(math.log2(side * points_per_unit))))


def weighted_grid_integral(values, grid):
	"""dx^n * sum over x != centre of values(x) e^(-|x|) / |x|^n"""
	r = grid.centred_radius
	mask = r > 0
	return float(np.sum(values[mask] * np.exp(-r[mask]) / r[mask] ** grid.n) * grid.cell_volume)


def periodization_error(values, grid):
	"""Weight mass outside the inscribed ball times the largest integrand value"""
	return sphere_area(grid.n) * float(np.max(np.abs(values))) * float(scipy.special.exp1(grid.L / 2))


def _box_setup(profile, side, N, points_per_unit):
	if profile.n != 2:
		raise ParameterError(f"Weighted inequality checks are implemented for n = 2, got n = {profile.n}")
	radius = profile.effective_support()
	side = side or max(8 * radius, 32.0)
	if side < 8 * radius:
		raise ParameterError(f"Box side {side:.4g} is smaller than 8 x support radius {radius:.4g}")
	N = N or box_resolution(side, points_per_unit)
	return side, N


def _report(lhs, lhs_coarse, rhs, rhs_error, values, grid):
	spread = periodization_error(values, grid)
	flagged = spread > PERIODIZATION_TOLERANCE * abs(lhs) and spread > 0
	if flagged:
		logger.warning(f"Periodization error {spread:.3e} exceeds {PERIODIZATION_TOLERANCE:g} of the left-hand side {lhs:.3e}")
	degenerate = rhs == 0
	return WeightedIntegralReport(
		lhs_value=lhs,
		rhs_value=rhs,
		ratio=0.0 if degenerate else lhs / rhs,
		quadrature_error_estimate=abs(lhs - lhs_coarse) + rhs_error + spread,
		degenerate=degenerate,
		periodization_flag=bool(flagged),
		periodization_error=spread,
	)


def weighted_nonlinear_check(profile, alpha, side=None, N=None, points_per_unit=8):
	"""Weighted nonlinear term against the singular energy of the increments (n = 2)

	The left-hand side integral of (Lambda^(2 alpha - 2) grad f . grad f) e^(-|x|) / |x|^n
	is computed spectrally on the box; the right-hand side integral of
	(f(0) - f)^2 / |x|^(n + 2 alpha) by radial quadrature with an analytic tail.
	"""
	if not 0 < alpha < 1:
		raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
	check_origin(profile)
	side, N = _box_setup(profile, side, N, points_per_unit)

	def lhs_at(points):
		f = embed_profile(profile, points, side)
		values = velocity(f, alpha).dot(gradient(f)).values
		return weighted_grid_integral(values, f.grid), values, f.grid

	lhs, values, grid = lhs_at(N)
	lhs_coarse, _, _ = lhs_at(N // 2)
	rhs, rhs_error = singular_energy_integral(profile, alpha)
	logger.debug(f"Nonlinear weighted check alpha={alpha}: lhs={lhs:.6g} rhs={rhs:.6g}")
	return _report(lhs, lhs_coarse, rhs, rhs_error, values, grid)


def log_weighted_integral(profile, gamma, panels):
	"""omega * integral of |g(0) - g| / r^(1 + gamma) ln(e + 1/r) dr on a graded mesh"""
	g0 = profile.centre_value
	top = profile.integration_radius()
	inner = composite_gauss(
		lambda r: np.abs(g0 - profile(r)) / r ** (1 + gamma) * np.log(math.e + 1 / r),
		graded_panels(top, panels),
	)
	outer = abs(g0 - float(profile(top)))
	tail = 0.0
	if outer > 0:
		tail, _ = scipy.integrate.quad(lambda r: r ** (-1 - gamma) * math.log(math.e + 1 / r), top, math.inf)
	return sphere_area(profile.n) * (inner + outer * tail)


def weighted_dissipation_check(profile, gamma, side=None, N=None, points_per_unit=8, panels=128):
	"""|weighted integral of Lambda^gamma f(0) - Lambda^gamma f| against the log-weighted increments (n = 2)"""
	if not 0 < gamma < 1:
		raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
	check_origin(profile)
	side, N = _box_setup(profile, side, N, points_per_unit)

	def lhs_at(points):
		f = embed_profile(profile, points, side)
		lam = fractional_laplacian(f, gamma).values
		values = lam[f.grid.centre_index] - lam
		return abs(weighted_grid_integral(values, f.grid)), values, f.grid

	lhs, values, grid = lhs_at(N)
	lhs_coarse, _, _ = lhs_at(N // 2)
	rhs = log_weighted_integral(profile, gamma, panels)
	rhs_error = abs(rhs - log_weighted_integral(profile, gamma, panels // 2))
	logger.debug(f"Dissipation weighted check gamma={gamma}: lhs={lhs:.6g} rhs={rhs:.6g}")
	return _report(lhs, lhs_coarse, rhs, rhs_error, values, grid)


def exp_integral_bound(rho):
	"""(integral from rho to infinity of e^(-r)/r dr, 2 ln(e + 1/rho))"""
	if not rho > 0:
		raise ParameterError(f"rho must be positive, got {rho}")
	if rho < 1:
		# r = e^u on (rho, 1) removes the logarithmic singularity
		inner, _ = scipy.integrate.quad(lambda u: math.exp(-math.exp(u)), math.log(rho), 0.0, **QUAD_OPTIONS)
		outer, _ = scipy.integrate.quad(lambda r: math.exp(-r) / r, 1.0, 61.0, **QUAD_OPTIONS)
		lhs = inner + outer
	else:
		lhs, _ = scipy.integrate.quad(lambda r: math.exp(-r) / r, rho, rho + 60.0, **QUAD_OPTIONS)
	return ExpIntegralBound(lhs, 2 * math.log(math.e + 1 / rho))


def riccati_envelope(J0, C7, C8, M, horizon=math.inf):
	"""Blow-up time of y' = C7 y^2 - C8 M^2, y(0) = J0, or None when there is none before horizon"""
	if not C7 > 0:
		raise ParameterError(f"C7 must be positive, got {C7}")
	if C8 < 0:
		raise ParameterError(f"C8 must be non-negative, got {C8}")
	if C8 == 0:
		if J0 <= 0:
			return None
		time = 1 / (C7 * J0)
	else:
		a = M * math.sqrt(C8 / C7)
		if J0 <= a:
			return None
		time = math.log((J0 + a) / (J0 - a)) / (2 * a * C7)
	return time if time <= horizon else None


def riccati_solution(t, J0, C7, C8, M):
	"""Closed-form solution of y' = C7 y^2 - C8 M^2 (infinite from the blow-up time on)"""
	t = np.asarray(t, dtype=float)
	if C8 == 0:
		with np.errstate(divide="ignore"):
			denominator = 1 - C7 * J0 * t
			return np.where(denominator > 0, J0 / np.where(denominator > 0, denominator, 1.0), np.inf)
	a = M * math.sqrt(C8 / C7)
	rate = a * C7
	if J0 == a:
		return np.full(t.shape, a)
	if abs(J0) < a:
		phase = -math.atanh(J0 / a)
		return -a * np.tanh(rate * t + phase)
	if J0 < -a:
		phase = math.atanh(-a / J0)
		return -a / np.tanh(rate * t + phase)
	blowup = riccati_envelope(J0, C7, C8, M)
	remaining = blowup - t
	with np.errstate(divide="ignore"):
		return np.where(remaining > 0, a / np.tanh(rate * np.where(remaining > 0, remaining, 1.0)), np.inf)


def fit_riccati(times, values):
	"""Least-squares fit of dJ/dt = c7 J^2 - k along a sampled trajectory"""
	times = np.asarray(times, dtype=float)
	values = np.asarray(values, dtype=float)
	if times.size < 3:
		raise ParameterError("A Riccati fit needs at least three samples")
	rates = np.gradient(values, times, edge_order=2)
	design = np.column_stack([values ** 2, -np.ones_like(values)])
	(c7, k), *_ = np.linalg.lstsq(design, rates, rcond=None)
	misfit = design @ np.array([c7, k]) - rates
	scale = float(np.max(np.abs(rates))) or 1.0
	return RiccatiFit(float(c7), float(k), float(np.max(np.abs(misfit)) / scale))


def extract_radial_profile(theta, tolerance=ASYMMETRY_GATE):
	"""Bin-averaged profile about the box centre of an approximately radial field"""
	asymmetry = asymmetry_norm(theta)
	if asymmetry >= tolerance:
		raise AsymmetryError(f"Field is not radial about the box centre (asymmetry {asymmetry:.3e} >= {tolerance:g})")
	grid = theta.grid
	r = grid.centred_radius.ravel()
	values = theta.values.ravel()
	inside = r <= grid.L / 2
	bins = np.rint(r[inside] / grid.dx).astype(int)
	counts = np.bincount(bins)
	used = counts > 0
	nodes = np.bincount(bins, weights=r[inside])[used] / counts[used]
	averages = np.bincount(bins, weights=values[inside])[used] / counts[used]
	significant = np.nonzero(np.abs(averages) >= SUPPORT_THRESHOLD)[0]
	support = math.inf
	if significant.size == 0:
		support = nodes[1]
	elif significant[-1] + 1 < nodes.size:
		support = nodes[significant[-1] + 1]
	return RadialProfile(grid.n, nodes, averages, support_radius=support)


def j_functional_grid(theta):
	"""J evaluated on the torus with minimum-image distances from the box centre"""
	grid = theta.grid
	centre = theta.values[grid.centre_index]
	return weighted_grid_integral(centre - theta.values, grid)


def j_gradient_bound(theta):
	"""|J| <= omega ((1 - 1/e) ||grad theta|| + 2 E_1(1) ||theta||)"""
	grid = theta.grid
	j_value = j_functional_grid(theta)
	bound = sphere_area(grid.n) * (
		gradient(theta).sup_norm() * (1 - math.exp(-1)) + 2 * theta.sup_norm() * float(scipy.special.exp1(1.0))
	)
	return GradientBoundReport(j_value, bound, abs(j_value) / bound if bound > 0 else 0.0)


def centre_velocity_ratio(theta, alpha):
	"""|u(centre)| / ||u||_sup, close to 0 for radial data"""
	u = velocity(theta, alpha)
	scale = u.sup_norm()
	if scale == 0:
		return 0.0
	return float(u.magnitude()[theta.grid.centre_index] / scale)
