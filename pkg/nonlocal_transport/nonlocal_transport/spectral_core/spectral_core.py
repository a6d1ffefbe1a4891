"""Periodic grid geometry, spectral transforms, Fourier multipliers and dealiasing.

Spectral coefficients use the normalization

	c_m = fftn(f) * L**(n/2) / N**n

so that the field is f(x) = L**(-n/2) * sum_m c_m exp(i k_m . x) independently of N,
and Parseval reads sum |c_m|**2 = dx**n * sum f**2.
"""

import logging
import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from nonlocal_transport.exceptions import GridError, MultiplierError

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (1, 2)
MIN_POINTS = 8
NEWTON_ITERATIONS = 12
ACTIVE_MODE_TOLERANCE = 1e-13
WORKERS_ENV = "NONLOCAL_TRANSPORT_WORKERS"


def fft_workers():
	"""Worker count for scipy.fft (1 keeps results bit-reproducible)"""
	try:
		return max(1, int(os.environ.get(WORKERS_ENV, "1")))
	except ValueError:
		return 1


def is_power_of_two(value):
	return isinstance(value, (int, np.integer)) and value > 0 and (value & (value - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
	"""Uniform grid on the torus [0, L)^n"""

	n: int
	N: int
	L: float = 2 * math.pi

	def __post_init__(self):
		self.validate()

	def validate(self):
		"""Validate grid geometry"""
		self.validate_dimension()
		self.validate_points()
		self.validate_period()

	def validate_dimension(self):
		if self.n not in SUPPORTED_DIMENSIONS:
			raise GridError(f"Dimension must be one of {SUPPORTED_DIMENSIONS}, got {self.n}")

	def validate_points(self):
		if not is_power_of_two(self.N) or self.N < MIN_POINTS:
			raise GridError(f"Points per dimension must be a power of two >= {MIN_POINTS}, got {self.N}")

	def validate_period(self):
		if not (np.isfinite(self.L) and self.L > 0):
			raise GridError(f"Period must be positive and finite, got {self.L}")

	@property
	def dx(self):
		return self.L / self.N

	@property
	def shape(self):
		return (self.N,) * self.n

	@property
	def size(self):
		return self.N ** self.n

	@property
	def cell_volume(self):
		return self.dx ** self.n

	@property
	def diameter(self):
		"""Largest distance between two points of the torus"""
		return self.L * math.sqrt(self.n) / 2

	@property
	def centre_index(self):
		return (self.N // 2,) * self.n

	@cached_property
	def wavenumbers(self):
		"""Integer wavenumber indices in FFT order"""
		return np.rint(scipy.fft.fftfreq(self.N, d=1.0 / self.N)).astype(int)

	@cached_property
	def index_vector(self):
		"""Integer wavenumber index arrays, one per axis, broadcast to the grid shape"""
		return tuple(np.meshgrid(*([self.wavenumbers] * self.n), indexing="ij"))

	@cached_property
	def wavevector(self):
		"""Angular wavevector arrays k = m * 2 pi / L"""
		scale = 2 * math.pi / self.L
		return tuple(m * scale for m in self.index_vector)

	@cached_property
	def kmag(self):
		return np.sqrt(sum(k ** 2 for k in self.wavevector))

	@cached_property
	def dealias_mask(self):
		"""2/3-rule mask keeping modes with every |m_i| <= N/3"""
		mask = np.ones(self.shape, dtype=bool)
		for m in self.index_vector:
			mask &= np.abs(m) <= self.N / 3
		return mask

	@cached_property
	def coordinates(self):
		axis = np.arange(self.N) * self.dx
		return tuple(np.meshgrid(*([axis] * self.n), indexing="ij"))

	@cached_property
	def centred_coordinates(self):
		"""Offsets from the box centre (index N/2), all within [-L/2, L/2)"""
		axis = (np.arange(self.N) - self.N // 2) * self.dx
		return tuple(np.meshgrid(*([axis] * self.n), indexing="ij"))

	@cached_property
	def centred_radius(self):
		return np.sqrt(sum(x ** 2 for x in self.centred_coordinates))

	def nyquist_mask(self, axis):
		return self.index_vector[axis] == -(self.N // 2)

	def refined(self, factor):
		return TorusGrid(self.n, self.N * factor, self.L)


def make_grid(n, N, L=2 * math.pi):
	"""Build a validated torus grid"""
	grid = TorusGrid(int(n), int(N) if float(N).is_integer() else N, float(L))
	logger.debug(f"Created torus grid n={grid.n} N={grid.N} L={grid.L:.6g}")
	return grid


def to_spectral(values, grid):
	return scipy.fft.fftn(values, workers=fft_workers()) * (grid.L ** (grid.n / 2) / grid.size)


def to_physical(coefficients, grid):
	return scipy.fft.ifftn(coefficients * (grid.size / grid.L ** (grid.n / 2)), workers=fft_workers()).real


class ScalarField:
	"""Real field on a torus grid with a lazily cached spectrum"""

	def __init__(self, grid, values, spectrum=None):
		self.grid = grid
		self.values = values
		if spectrum is not None:
			self._spectrum = np.asarray(spectrum, dtype=complex)
			self._spectrum_valid = True

	@classmethod
	def from_function(cls, grid, function):
		"""Sample ``function(*coordinates)`` on the grid"""
		return cls(grid, np.broadcast_to(function(*grid.coordinates), grid.shape))

	@classmethod
	def zeros(cls, grid):
		return cls(grid, np.zeros(grid.shape))

	@property
	def values(self):
		return self._values

	@values.setter
	def values(self, values):
		values = np.array(values, dtype=float)
		if values.shape != self.grid.shape:
			if values.size != self.grid.size:
				raise GridError(f"Field with {values.size} values does not fit grid of shape {self.grid.shape}")
			values = values.reshape(self.grid.shape)
		values.flags.writeable = False
		self._values = values
		self._spectrum = None
		self._spectrum_valid = False

	@property
	def spectrum(self):
		if not self._spectrum_valid:
			self._spectrum = to_spectral(self._values, self.grid)
			self._spectrum_valid = True
		return self._spectrum

	@property
	def spectrum_valid(self):
		return self._spectrum_valid

	def is_finite(self):
		return bool(np.all(np.isfinite(self._values)))

	def sup_norm(self):
		return float(np.max(np.abs(self._values)))

	def copy(self):
		return ScalarField(self.grid, self._values, self._spectrum if self._spectrum_valid else None)

	def check_grid(self, other):
		if other.grid != self.grid:
			raise GridError("Fields live on different grids")

	def __add__(self, other):
		if isinstance(other, ScalarField):
			self.check_grid(other)
			return ScalarField(self.grid, self._values + other.values)
		return ScalarField(self.grid, self._values + other)

	__radd__ = __add__

	def __sub__(self, other):
		if isinstance(other, ScalarField):
			self.check_grid(other)
			return ScalarField(self.grid, self._values - other.values)
		return ScalarField(self.grid, self._values - other)

	def __rsub__(self, other):
		return ScalarField(self.grid, other - self._values)

	def __mul__(self, other):
		if isinstance(other, ScalarField):
			self.check_grid(other)
			return ScalarField(self.grid, self._values * other.values)
		return ScalarField(self.grid, self._values * other)

	__rmul__ = __mul__

	def __neg__(self):
		return ScalarField(self.grid, -self._values)

	def __repr__(self):
		return f"ScalarField(n={self.grid.n}, N={self.grid.N}, L={self.grid.L:.6g})"


class VectorField:
	"""n scalar components on a shared grid"""

	def __init__(self, components):
		components = tuple(components)
		if not components:
			raise GridError("A vector field needs at least one component")
		grid = components[0].grid
		for component in components[1:]:
			if component.grid != grid:
				raise GridError("All vector components must share one grid")
		self.components = components
		self.grid = grid

	def __len__(self):
		return len(self.components)

	def __iter__(self):
		return iter(self.components)

	def __getitem__(self, index):
		return self.components[index]

	def magnitude(self):
		return np.sqrt(sum(c.values ** 2 for c in self.components))

	def sup_norm(self):
		return float(np.max(self.magnitude()))

	def dot(self, other):
		return ScalarField(self.grid, sum(a.values * b.values for a, b in zip(self.components, other.components)))


def multiplier_values(grid, m):
	"""Evaluate a multiplier given as callable(*wavevector), array or scalar"""
	if callable(m):
		with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
			values = m(*grid.wavevector)
	else:
		values = m
	return np.broadcast_to(np.asarray(values), grid.shape)


def apply_multiplier(f, m):
	"""Multiply the spectrum of ``f`` by ``m(k)`` and return the physical-space result"""
	values = multiplier_values(f.grid, m)
	coefficients = f.spectrum
	bad = ~np.isfinite(values)
	if np.any(bad):
		magnitude = np.abs(coefficients)
		# Modes at rounding level of the largest coefficient count as inactive
		active = magnitude > ACTIVE_MODE_TOLERANCE * np.max(magnitude)
		if np.any(bad & active):
			raise MultiplierError(f"Multiplier is non-finite at {int(np.sum(bad & active))} active mode(s)")
		values = np.where(bad, 0, values)
	result = to_physical(coefficients * values, f.grid)
	if not np.all(np.isfinite(result)):
		raise MultiplierError("Multiplier produced non-finite physical values")
	return ScalarField(f.grid, result)


def dealias(f):
	"""2/3-rule projection; the returned field keeps the projected spectrum cached"""
	projected = f.spectrum * f.grid.dealias_mask
	return ScalarField(f.grid, to_physical(projected, f.grid), spectrum=projected)


def derivative_multiplier(grid, axis):
	"""i k_axis with the Nyquist mode of that axis removed"""
	return np.where(grid.nyquist_mask(axis), 0, 1j * grid.wavevector[axis])


def gradient(f):
	return VectorField(apply_multiplier(f, derivative_multiplier(f.grid, axis)) for axis in range(f.grid.n))


def divergence(v):
	total = np.zeros(v.grid.shape)
	for axis, component in enumerate(v.components):
		total = total + apply_multiplier(component, derivative_multiplier(v.grid, axis)).values
	return ScalarField(v.grid, total)


def pad_spectrum(coefficients, factor):
	"""Zero-pad a coefficient array by ``factor`` per axis, splitting Nyquist modes"""
	padded = np.asarray(coefficients, dtype=complex)
	if factor == 1:
		return padded.copy()
	ndim = padded.ndim
	for axis in range(ndim):
		N = padded.shape[axis]
		M = N * factor
		half = N // 2
		shape = list(padded.shape)
		shape[axis] = M
		out = np.zeros(shape, dtype=complex)
		src = [slice(None)] * ndim
		dst = [slice(None)] * ndim
		src[axis] = slice(0, half)
		dst[axis] = slice(0, half)
		out[tuple(dst)] = padded[tuple(src)]
		src[axis] = slice(half + 1, N)
		dst[axis] = slice(M - half + 1, M)
		out[tuple(dst)] = padded[tuple(src)]
		src[axis] = slice(half, half + 1)
		nyquist = 0.5 * padded[tuple(src)]
		dst[axis] = slice(half, half + 1)
		out[tuple(dst)] = nyquist
		dst[axis] = slice(M - half, M - half + 1)
		out[tuple(dst)] = nyquist
		padded = out
	return padded


def interpolate(f, factor):
	"""Trigonometric interpolant of ``f`` sampled on a grid refined by ``factor``"""
	if not is_power_of_two(factor):
		raise GridError(f"Refinement factor must be a power of two, got {factor}")
	if factor == 1:
		return f.copy()
	fine = f.grid.refined(factor)
	coefficients = pad_spectrum(f.spectrum, factor)
	return ScalarField(fine, to_physical(coefficients, fine), spectrum=coefficients)


def restrict(f, factor):
	"""Sample a refined field back at the nodes of the grid it was refined from"""
	coarse = TorusGrid(f.grid.n, f.grid.N // factor, f.grid.L)
	return ScalarField(coarse, f.values[(slice(None, None, factor),) * f.grid.n])


def product(f, g):
	"""Exact product of the trigonometric interpolants of f and g, on the 2x grid"""
	f.check_grid(g)
	return interpolate(f, 2) * interpolate(g, 2)


def evaluate_at(f, point, derivative=()):
	"""Evaluate the interpolant (or a mixed derivative) at an arbitrary point"""
	grid = f.grid
	coefficients = f.spectrum.copy()
	for axis in range(grid.n):
		# Odd derivatives drop the unpaired Nyquist mode
		if derivative.count(axis) % 2 == 1:
			coefficients = np.where(grid.nyquist_mask(axis), 0, coefficients)
	factor = np.ones(grid.shape, dtype=complex)
	for axis in derivative:
		factor = factor * (1j * grid.wavevector[axis])
	phase = sum(k * x for k, x in zip(grid.wavevector, point))
	return float(np.real(np.sum(coefficients * factor * np.exp(1j * phase))) / grid.L ** (grid.n / 2))


def _polish_extremum(f, index, sign):
	"""Newton iteration on grad f = 0 starting at a grid node"""
	grid = f.grid
	point = np.array([i * grid.dx for i in index], dtype=float)
	start = point.copy()
	best = sign * float(f.values[index])
	best_point = point.copy()
	for _ in range(NEWTON_ITERATIONS):
		grad = np.array([evaluate_at(f, point, (a,)) for a in range(grid.n)])
		hessian = np.array([[evaluate_at(f, point, (a, b)) for b in range(grid.n)] for a in range(grid.n)])
		# Minimum-norm step; flat directions of the Hessian are left alone
		step = np.linalg.lstsq(hessian, grad, rcond=None)[0]
		candidate = point - step
		if np.max(np.abs(candidate - start)) > grid.dx:
			break
		point = candidate
		value = sign * evaluate_at(f, point)
		if value > best:
			best = value
			best_point = point.copy()
		if np.max(np.abs(step)) < 1e-14 * grid.L:
			break
	return sign * best, best_point


def refined_extrema(f):
	"""(max, min) of the trigonometric interpolant, never inside the grid range"""
	values = f.values
	if np.ptp(values) == 0:
		return float(values.flat[0]), float(values.flat[0])
	imax = np.unravel_index(int(np.argmax(values)), values.shape)
	imin = np.unravel_index(int(np.argmin(values)), values.shape)
	top, _ = _polish_extremum(f, imax, 1.0)
	bottom, _ = _polish_extremum(f, imin, -1.0)
	return max(top, float(values[imax])), min(bottom, float(values[imin]))


# Square symmetry group about the box centre

def reflect(f, axis):
	"""Reflection x_axis -> -x_axis about the box centre"""
	index = (-np.arange(f.grid.N)) % f.grid.N
	return ScalarField(f.grid, np.take(f.values, index, axis=axis))


def transpose(f):
	return ScalarField(f.grid, f.values.T)


def quarter_turn(f):
	"""Rotation by 90 degrees about the box centre"""
	if f.grid.n == 1:
		return reflect(f, 0)
	return reflect(transpose(f), 0)


def symmetry_images(f):
	"""All images of f under the symmetry group of the cube (interval or square)"""
	if f.grid.n == 1:
		return [f, reflect(f, 0)]
	images = []
	for base in (f, transpose(f)):
		for flips in ((), (0,), (1,), (0, 1)):
			image = base
			for axis in flips:
				image = reflect(image, axis)
			images.append(image)
	return images


def symmetrize(f):
	images = symmetry_images(f)
	return ScalarField(f.grid, sum(image.values for image in images) / len(images))


def asymmetry_norm(f):
	"""||f - symmetrize(f)||_sup relative to ||f||_sup (0 for the zero field)"""
	scale = f.sup_norm()
	if scale == 0:
		return 0.0
	return float(np.max(np.abs(f.values - symmetrize(f).values)) / scale)


# Deterministic shift lattices for increment-based estimators

AXIS_DIRECTIONS = {
	1: ((1,), (-1,)),
	2: ((1, 0), (0, 1), (1, 1), (1, -1), (-1, 0), (0, -1), (-1, -1), (-1, 1)),
}


def dyadic_shifts(grid):
	"""Integer offsets along the axis and diagonal directions with magnitudes 1, 2, 4, ..., N/2"""
	shifts = []
	magnitude = 1
	while magnitude <= grid.N // 2:
		for direction in AXIS_DIRECTIONS[grid.n]:
			shifts.append(tuple(magnitude * c for c in direction))
		magnitude *= 2
	return shifts


def shift_length(grid, shift):
	return grid.dx * math.sqrt(sum(c * c for c in shift))


def shift_difference(f, shift):
	"""delta_h f(x) = f(x + h) - f(x) for an integer lattice offset h"""
	axes = tuple(range(f.grid.n))
	return np.roll(f.values, tuple(-c for c in shift), axis=axes) - f.values
