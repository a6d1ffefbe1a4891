"""Lattice quadrature for the singular-integral forms of Lambda^s and D_gamma.

The integral over R^n of a periodic integrand against |y|^(-n-s) is folded onto one
torus cell: each refined lattice point y of the centred cell carries the image weights
W_j(y) = sum over |k|_inf = j of |y - L k|^(-n-s), for shells j = 0..S. The remainder
beyond shell S uses the cell mean of the integrand times the kernel mass outside the
covered square. Near y = 0 the quadratic Taylor model, damped by exp(-|y|^2/eps^2), is
subtracted on the lattice and added back in closed form.
"""

import itertools
import logging
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.integrate
import scipy.special

from nonlocal_transport.exceptions import ParameterError, QuadratureDivergenceError
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import (
	ScalarField,
	gradient,
	interpolate,
	is_power_of_two,
	apply_multiplier,
)

logger = logging.getLogger(__name__)

CALIBRATION_HEADER = "# nonlocal_transport calibration v1"
CALIBRATION_ENV = "NONLOCAL_TRANSPORT_CALIBRATION"
INNER_CUTOFF_FRACTION = 0.9

_calibration_cache = {}


@dataclass(frozen=True)
class QuadratureParams:
	"""Image shells, inner cutoff and refinement of the lattice quadrature"""

	image_shells: int = 3
	inner_cutoff: Optional[float] = None
	samples_per_cell: int = 8

	def __post_init__(self):
		if int(self.image_shells) != self.image_shells or self.image_shells < 1:
			raise ParameterError(f"image_shells must be an integer >= 1, got {self.image_shells}")
		if not is_power_of_two(self.samples_per_cell):
			raise ParameterError(f"samples_per_cell must be a power of two, got {self.samples_per_cell}")
		if self.inner_cutoff is not None and not self.inner_cutoff > 0:
			raise ParameterError(f"inner_cutoff must be positive, got {self.inner_cutoff}")

	def cutoff_for(self, grid):
		"""Inner cutoff radius, checked against the cell diagonal of ``grid``"""
		diagonal = grid.dx * math.sqrt(grid.n)
		eps = self.inner_cutoff if self.inner_cutoff is not None else INNER_CUTOFF_FRACTION * diagonal
		if eps >= diagonal:
			raise ParameterError(f"inner_cutoff {eps:.4g} must be smaller than the cell diagonal {diagonal:.4g}")
		return eps

	def is_default(self):
		return self == QuadratureParams()


@dataclass
class QuadratureReport:
	"""Value of one lattice quadrature with its shell breakdown"""

	value: float
	truncation_error: float
	tail: float
	value_without_tail: float
	shell_contributions: list = field(default_factory=list)


@dataclass(frozen=True)
class CalibrationRecord:
	n: int
	gamma: float
	N: int
	L: float
	c_value: float
	residual: float

	@property
	def textbook(self):
		return textbook_constant(self.n, self.gamma)


def textbook_constant(n, s):
	"""s 2^(s-1) Gamma((n+s)/2) / (pi^(n/2) Gamma(1-s/2)), for logging and comparison only"""
	return s * 2 ** (s - 1) * math.gamma((n + s) / 2) / (math.pi ** (n / 2) * math.gamma(1 - s / 2))


def sphere_average_factor(n):
	"""omega_{n-1} / n, the sphere area divided by the dimension"""
	return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def outer_kernel_mass(n, s):
	"""Integral of |z|^(-n-s) outside the cube of half-side 1"""
	if n == 1:
		return 2.0 / s
	angular, _ = scipy.integrate.quad(lambda phi: math.cos(phi) ** s, 0.0, math.pi / 4)
	return 8.0 / s * angular


class ImageLattice:
	"""Refined lattice of one cell with image-shell weights for the kernel |y|^(-n-s)"""

	def __init__(self, grid, s, q):
		if not 0 < s < 2:
			raise ParameterError(f"Singular-integral order must lie in (0, 2), got {s}")
		self.grid = grid
		self.s = s
		self.q = q
		self.eps = q.cutoff_for(grid)
		self.p = q.samples_per_cell
		self.M = grid.N * self.p
		self.h = grid.dx / self.p
		self.cell_volume = self.h ** grid.n
		offsets = np.rint(np.fft.fftfreq(self.M, d=1.0 / self.M)) * self.h
		self.y = tuple(np.meshgrid(*([offsets] * grid.n), indexing="ij"))
		r2 = sum(c ** 2 for c in self.y)
		origin = r2 == 0
		safe_r2 = np.where(origin, 1.0, r2)
		exponent = -(grid.n + s) / 2
		self.shell_weights = []
		for shell in range(q.image_shells + 1):
			weight = np.zeros(r2.shape)
			for k in itertools.product(range(-shell, shell + 1), repeat=grid.n):
				if max(abs(c) for c in k) != shell:
					continue
				if shell == 0:
					weight = np.where(origin, 0.0, safe_r2 ** exponent)
					continue
				d2 = sum((c - grid.L * kc) ** 2 for c, kc in zip(self.y, k))
				weight = weight + d2 ** exponent
			self.shell_weights.append(weight)
		self.taylor_kernel = np.where(origin, 0.0, safe_r2 ** exponent * np.exp(-r2 / self.eps ** 2))
		self.taylor_integral = (
			sphere_average_factor(grid.n) * 0.5 * self.eps ** (2 - s) * math.gamma(1 - s / 2)
		)
		self.covered_half_side = grid.L * (q.image_shells + 0.5)
		self.tail_factor = self.covered_half_side ** (-s) * outer_kernel_mass(grid.n, s)
		logger.debug(
			f"Built image lattice n={grid.n} N={grid.N} s={s:.4g} M={self.M} shells={q.image_shells} eps={self.eps:.4g}"
		)

	def shell_sums(self, integrand, taylor_model, taylor_integral):
		"""Raw (unnormalized) shell contributions and tail for one integrand on the lattice"""
		shells = []
		for shell, weight in enumerate(self.shell_weights):
			total = float(np.sum(integrand * weight))
			if shell == 0:
				total -= float(np.sum(taylor_model * self.taylor_kernel))
				total = total * self.cell_volume + taylor_integral
			else:
				total *= self.cell_volume
			shells.append(total)
		tail = float(np.mean(integrand)) * self.tail_factor
		return shells, tail


@lru_cache(maxsize=8)
def image_lattice(grid, s, q):
	return ImageLattice(grid, s, q)


def build_report(constant, shells, tail, check_divergence=True):
	scaled = [constant * value for value in shells]
	if check_divergence and len(scaled) >= 2:
		last, previous = abs(scaled[-1]), abs(scaled[-2])
		if previous > 0 and last >= previous:
			raise QuadratureDivergenceError(
				f"Image shell contribution {last:.3e} did not decrease (previous {previous:.3e})", scaled
			)
	without_tail = float(sum(scaled))
	scaled_tail = constant * tail
	return QuadratureReport(
		value=without_tail + scaled_tail,
		truncation_error=abs(scaled[-1]),
		tail=scaled_tail,
		value_without_tail=without_tail,
		shell_contributions=scaled,
	)


class LatticeEvaluator:
	"""Evaluates Lambda^s f and D_s f at grid points of one field"""

	def __init__(self, f, s, q=None):
		self.f = f
		self.grid = f.grid
		self.s = s
		self.q = q or QuadratureParams()
		self.lattice = image_lattice(f.grid, s, self.q)
		self.fine = interpolate(f, self.q.samples_per_cell).values
		self._gradient = None
		self._laplacian = None
		self.constant = calibrated_constant(f.grid, s, self.q)

	def increments(self, x):
		"""f(x) - f(x + y) over the refined lattice of offsets y"""
		p = self.q.samples_per_cell
		start = tuple(int(i) * p for i in x)
		shifted = np.roll(self.fine, shift=tuple(-i for i in start), axis=tuple(range(self.grid.n)))
		return self.fine[start] - shifted

	@property
	def gradient(self):
		if self._gradient is None:
			self._gradient = [c.values for c in gradient(self.f)]
		return self._gradient

	@property
	def laplacian(self):
		if self._laplacian is None:
			self._laplacian = apply_multiplier(self.f, -self.grid.kmag ** 2).values
		return self._laplacian

	def d_gamma(self, x, check_divergence=True):
		"""c * sum over images of the integral of |f(x) - f(x+y)|^2 / |y - L k|^(n+s)"""
		x = tuple(int(i) for i in x)
		diff = self.increments(x)
		grad = [g[x] for g in self.gradient]
		projection = sum(a * c for a, c in zip(grad, self.lattice.y))
		closed_form = sum(a * a for a in grad) * self.lattice.taylor_integral
		shells, tail = self.lattice.shell_sums(diff ** 2, projection ** 2, closed_form)
		return build_report(self.constant, shells, tail, check_divergence)

	def fractional_laplacian(self, x, check_divergence=False):
		"""c * principal value of the integral of (f(x) - f(x+y)) / |y|^(n+s)"""
		x = tuple(int(i) for i in x)
		diff = self.increments(x)
		fine_grid_hessian = self._hessian_form(x)
		closed_form = -0.5 * self.laplacian[x] * self.lattice.taylor_integral
		shells, tail = self.lattice.shell_sums(diff, fine_grid_hessian, closed_form)
		return build_report(self.constant, shells, tail, check_divergence)

	def _hessian_form(self, x):
		"""-1/2 y^T H y for the Hessian H of f at x"""
		f = self.f
		form = np.zeros(self.lattice.y[0].shape)
		for a in range(self.grid.n):
			for b in range(self.grid.n):
				entry = apply_multiplier(f, -self.grid.wavevector[a] * self.grid.wavevector[b]).values[x]
				form = form + entry * self.lattice.y[a] * self.lattice.y[b]
		return -0.5 * form


def calibration_modes(grid):
	"""Low eigenmodes used to pin the singular-integral constant"""
	limit = max(1, grid.N // 4)
	if grid.n == 1:
		candidates = [(m,) for m in (1, 2, 3, 4, 6, 8, 12, 16)]
	else:
		candidates = [(1, 0), (1, 1), (2, 0), (2, 1), (3, 0), (3, 2), (4, 0), (4, 4), (6, 3), (8, 0)]
	return [m for m in candidates if max(abs(c) for c in m) <= limit]


def raw_eigenmode_value(lattice, m):
	"""Unnormalized lattice value of Lambda^s cos(k.x) at x = 0"""
	grid = lattice.grid
	k = [2 * math.pi * c / grid.L for c in m]
	phase = sum(kc * c for kc, c in zip(k, lattice.y))
	diff = 1.0 - np.cos(phase)
	taylor_model = 0.5 * phase ** 2
	k2 = sum(kc * kc for kc in k)
	shells, tail = lattice.shell_sums(diff, taylor_model, 0.5 * k2 * lattice.taylor_integral)
	return sum(shells) + tail, math.sqrt(k2) ** lattice.s


def calibrate_constant(grid, s, q=None):
	"""Least-squares constant making lattice and Fourier forms of Lambda^s agree on eigenmodes"""
	q = q or QuadratureParams()
	lattice = image_lattice(grid, s, q)
	pairs = [raw_eigenmode_value(lattice, m) for m in calibration_modes(grid)]
	raw = np.array([p[0] for p in pairs])
	exact = np.array([p[1] for p in pairs])
	c_value = float(np.sum(raw * exact) / np.sum(raw * raw))
	residual = float(np.sqrt(np.sum((c_value * raw - exact) ** 2) / np.sum(exact ** 2)))
	record = CalibrationRecord(grid.n, float(s), grid.N, float(grid.L), c_value, residual)
	logger.info(
		f"Calibrated constant n={grid.n} s={s:.4g} N={grid.N}: c={c_value:.10g} "
		f"(textbook {record.textbook:.10g}, residual {residual:.3e})"
	)
	return record


def calibration_key(n, s, N, L):
	return (int(n), round(float(s), 12), int(N), round(float(L), 12))


def calibration_path():
	return os.environ.get(CALIBRATION_ENV) or None


def load_calibrations(path):
	"""Read a calibration store; a missing file is an empty store"""
	records = {}
	if not path or not os.path.exists(path):
		return records
	with open(path) as handle:
		header = handle.readline().strip()
		if header != CALIBRATION_HEADER:
			logger.warning(f"Ignoring calibration store {path} with unknown header {header!r}")
			return records
		for line in handle:
			line = line.strip()
			if not line or line.startswith("#"):
				continue
			n, s, N, L, c_value, residual = line.split()
			record = CalibrationRecord(int(n), float(s), int(N), float(L), float(c_value), float(residual))
			records[calibration_key(record.n, record.gamma, record.N, record.L)] = record
	return records


def save_calibrations(path, records):
	"""Write records sorted by (n, s, N, L), one per line"""
	directory = os.path.dirname(os.path.abspath(path))
	os.makedirs(directory, exist_ok=True)
	with open(path, "w") as handle:
		handle.write(CALIBRATION_HEADER + "\n")
		handle.write("# n gamma N L c_value residual\n")
		for key in sorted(records):
			r = records[key]
			handle.write(f"{r.n} {r.gamma!r} {r.N} {r.L!r} {r.c_value!r} {r.residual!r}\n")


def store_calibration(record, path=None):
	path = path or calibration_path()
	if not path:
		return
	records = load_calibrations(path)
	records[calibration_key(record.n, record.gamma, record.N, record.L)] = record
	save_calibrations(path, records)


def calibrated_constant(grid, s, q=None):
	"""Constant for (grid, s, q) from memory, the persistent store, or a fresh calibration"""
	q = q or QuadratureParams()
	key = calibration_key(grid.n, s, grid.N, grid.L)
	memory_key = key + (q,)
	if memory_key in _calibration_cache:
		return _calibration_cache[memory_key].c_value
	path = calibration_path()
	if q.is_default() and path:
		record = load_calibrations(path).get(key)
		if record is not None:
			_calibration_cache[memory_key] = record
			return record.c_value
	record = calibrate_constant(grid, s, q)
	_calibration_cache[memory_key] = record
	if q.is_default() and path:
		store_calibration(record, path)
	return record.c_value


def clear_calibration_cache():
	_calibration_cache.clear()
	image_lattice.cache_clear()
