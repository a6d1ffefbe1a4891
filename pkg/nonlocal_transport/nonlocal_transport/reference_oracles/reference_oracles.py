"""Slow independent reference implementations used by the test suite.

Every O(N^(2n)) routine checks an OracleBudget before doing any work.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from nonlocal_transport.exceptions import OracleBudgetExceeded, ParameterError
from nonlocal_transport.nonlocal_transport.nonlocal_operators.quadrature import textbook_constant
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import ScalarField, VectorField

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.5772156649015329
INNER_DENSITY = 4


def default_tolerances():
	return {
		"dft_direct": 1e-10,
		"idft_direct": 1e-10,
		"fractional_laplacian_direct": 1e-10,
		"d_gamma_direct": 2e-2,
		"holder_dense": 0.0,
		"oss_dense": 0.0,
		"rk4_integrate": 1e-8,
		"e1_series": 1e-12,
	}


@dataclass(frozen=True)
class OracleBudget:
	"""Cap on the grid size N^n (and on the work of the D_gamma oracle)"""

	max_points: int = 4096
	max_work: int = 2 ** 24
	tolerances: dict = field(default_factory=default_tolerances)

	def check(self, grid, work=None):
		if grid.size > self.max_points:
			raise OracleBudgetExceeded(f"Grid with {grid.size} points exceeds the oracle budget of {self.max_points}")
		if work is not None and work > self.max_work:
			raise OracleBudgetExceeded(f"Oracle work {work} exceeds the budget of {self.max_work}")


DEFAULT_BUDGET = OracleBudget()


def grid_indices(grid):
	return np.meshgrid(*([np.arange(grid.N)] * grid.n), indexing="ij")


def dft_direct(f, budget=DEFAULT_BUDGET):
	"""Direct-sum spectral coefficients, same normalization as the fast transform"""
	grid = f.grid
	budget.check(grid)
	indices = grid_indices(grid)
	scale = grid.L ** (grid.n / 2) / grid.size
	values = f.values
	coefficients = np.zeros(grid.shape, dtype=complex)
	for position in itertools.product(range(grid.N), repeat=grid.n):
		m = [int(grid.index_vector[a][position]) for a in range(grid.n)]
		phase = 2 * np.pi * (sum(mc * j for mc, j in zip(m, indices)) % grid.N) / grid.N
		coefficients[position] = scale * np.sum(values * np.exp(-1j * phase))
	return coefficients


def idft_direct(coefficients, grid, budget=DEFAULT_BUDGET):
	"""Direct-sum synthesis f_j = L^(-n/2) sum_m c_m exp(i k_m . x_j)"""
	budget.check(grid)
	coefficients = np.asarray(coefficients)
	values = np.zeros(grid.shape)
	wavenumbers = [grid.index_vector[a] for a in range(grid.n)]
	for position in itertools.product(range(grid.N), repeat=grid.n):
		phase = 2 * np.pi * (sum(m * j for m, j in zip(wavenumbers, position)) % grid.N) / grid.N
		values[position] = np.real(np.sum(coefficients * np.exp(1j * phase)))
	return ScalarField(grid, values / grid.L ** (grid.n / 2))


def fractional_laplacian_direct(f, s, budget=DEFAULT_BUDGET):
	"""Lambda^s f through the direct transforms"""
	grid = f.grid
	kmag = grid.kmag
	with np.errstate(divide="ignore"):
		multiplier = np.where(kmag == 0, 0.0 if s != 0 else 1.0, np.where(kmag == 0, 1.0, kmag) ** s)
	return idft_direct(dft_direct(f, budget) * multiplier, grid, budget)


def trig_values(f, points, derivative=()):
	"""Trigonometric interpolant (or a derivative of it) at an array of points, by direct sums"""
	grid = f.grid
	coefficients = f.spectrum.ravel()
	wavevector = [k.ravel() for k in grid.wavevector]
	factor = np.ones(coefficients.shape, dtype=complex)
	for axis in derivative:
		factor = factor * 1j * wavevector[axis]
		coefficients = np.where(grid.nyquist_mask(axis).ravel(), 0, coefficients)
	phase = sum(np.outer(p.ravel(), k) for p, k in zip(points, wavevector))
	values = np.real(np.exp(1j * phase) @ (coefficients * factor)) / grid.L ** (grid.n / 2)
	return values.reshape(np.shape(points[0]))


def d_gamma_direct(f, gamma, x, shells=2, density=1, budget=DEFAULT_BUDGET):
	"""Midpoint-rule D_gamma(f)(x) over the image shells, textbook constant, no tail

	The cell containing y = 0 uses the quadratic Taylor model on a 4x finer midpoint rule.
	"""
	grid = f.grid
	h = grid.dx / density
	M = grid.N * density
	budget.check(grid, work=M ** grid.n * grid.size)
	point = [int(i) * grid.dx for i in x]
	offsets = (np.arange(M) - M // 2) * h
	y = np.meshgrid(*([offsets] * grid.n), indexing="ij")
	centre = float(f.values[tuple(int(i) for i in x)])
	if density == 1:
		shifted = tuple((int(i) + np.rint(c / grid.dx).astype(int)) % grid.N for i, c in zip(x, y))
		values = f.values[shifted]
	else:
		values = trig_values(f, [p + c for p, c in zip(point, y)])
	squares = (centre - values) ** 2
	origin = sum(c ** 2 for c in y) == 0
	exponent = -(grid.n + gamma) / 2
	total = 0.0
	for k in itertools.product(range(-shells, shells + 1), repeat=grid.n):
		d2 = sum((c - grid.L * kc) ** 2 for c, kc in zip(y, k))
		if not any(k):
			d2 = np.where(origin, 1.0, d2)
			total += float(np.sum(np.where(origin, 0.0, squares * d2 ** exponent)))
		else:
			total += float(np.sum(squares * d2 ** exponent))
	total *= h ** grid.n
	grad = [float(trig_values(f, [np.array([p]) for p in point], (a,))[0]) for a in range(grid.n)]
	sub = ((np.arange(INNER_DENSITY) + 0.5) / INNER_DENSITY - 0.5) * h
	z = np.meshgrid(*([sub] * grid.n), indexing="ij")
	model = sum(g * c for g, c in zip(grad, z)) ** 2
	inner = float(np.sum(model * sum(c ** 2 for c in z) ** exponent)) * (h / INNER_DENSITY) ** grid.n
	return textbook_constant(grid.n, gamma) * (total + inner)


def fd_gradient(f, order=2):
	"""Centred periodic finite differences of order 2 or 4"""
	if order not in (2, 4):
		raise ParameterError(f"Finite-difference order must be 2 or 4, got {order}")
	grid = f.grid
	values = f.values
	components = []
	for axis in range(grid.n):
		forward = np.roll(values, -1, axis=axis)
		backward = np.roll(values, 1, axis=axis)
		if order == 2:
			derivative = (forward - backward) / (2 * grid.dx)
		else:
			forward2 = np.roll(values, -2, axis=axis)
			backward2 = np.roll(values, 2, axis=axis)
			derivative = (8 * (forward - backward) - (forward2 - backward2)) / (12 * grid.dx)
		components.append(ScalarField(grid, derivative))
	return VectorField(components)


def all_shifts(grid):
	"""Every nonzero minimum-image lattice offset"""
	half = grid.N // 2
	return [s for s in itertools.product(range(-half, half), repeat=grid.n) if any(s)]


def holder_dense(theta, beta, budget=DEFAULT_BUDGET):
	"""max over all pairs of grid points of |theta(x) - theta(y)| / |x - y|^beta (minimum image)"""
	grid = theta.grid
	budget.check(grid)
	axes = tuple(range(grid.n))
	best = 0.0
	for shift in all_shifts(grid):
		increment = np.roll(theta.values, tuple(-c for c in shift), axis=axes) - theta.values
		length = grid.dx * math.sqrt(sum(c * c for c in shift))
		best = max(best, float(np.max(np.abs(increment))) / length ** beta)
	return best


def oss_dense(theta, delta, radii, budget=DEFAULT_BUDGET):
	"""Largest radius R in ``radii`` with every pair closer than R oscillating by at most delta"""
	grid = theta.grid
	budget.check(grid)
	axes = tuple(range(grid.n))
	oscillation = []
	for shift in all_shifts(grid):
		increment = np.roll(theta.values, tuple(-c for c in shift), axis=axes) - theta.values
		oscillation.append((grid.dx * math.sqrt(sum(c * c for c in shift)), float(np.max(np.abs(increment)))))
	best = 0.0
	for radius in sorted(radii):
		worst = max((o for length, o in oscillation if length < radius), default=0.0)
		if worst <= delta:
			best = radius
		else:
			break
	return best


def rk4_integrate(rhs, y0, t_span, steps):
	"""Fixed-step classical Runge-Kutta; returns the times and states"""
	t0, t1 = t_span
	h = (t1 - t0) / steps
	times = t0 + h * np.arange(steps + 1)
	y = np.asarray(y0, dtype=float)
	states = [y]
	for t in times[:-1]:
		k1 = rhs(t, y)
		k2 = rhs(t + h / 2, y + h / 2 * k1)
		k3 = rhs(t + h / 2, y + h / 2 * k2)
		k4 = rhs(t + h, y + h * k3)
		y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
		states.append(y)
	return times, np.array(states)


def e1_series(x, max_terms=200):
	"""E_1(x) = -gamma_EM - ln x - sum_k (-x)^k / (k k!), for 0 < x <= 5"""
	if not 0 < x <= 5:
		raise ParameterError(f"The E_1 power series is used for 0 < x <= 5, got {x}")
	total = 0.0
	term = 1.0
	for k in range(1, max_terms + 1):
		term *= -x / k
		contribution = term / k
		total += contribution
		if abs(contribution) < 1e-17 * max(abs(total), 1e-300):
			break
	return -EULER_GAMMA - math.log(x) - total
