"""Initial-condition families. Every generator is an analytic function of position, so
the same parameters sampled on a refined grid describe the same continuum data.
"""

import logging
import math

import numpy as np

from nonlocal_transport.exceptions import ParameterError
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import ScalarField

logger = logging.getLogger(__name__)


def validate_width(width, grid):
	"""Positive and no narrower than one grid spacing"""
	if not width > 0:
		raise ParameterError(f"width must be positive, got {width}")
	if width < grid.dx:
		raise ParameterError(f"width {width:g} is below the grid spacing {grid.dx:g}; refine the grid or widen the profile")


def gaussian_bump(grid, amplitude=1.0, width=0.5, offset=0.0, **_):
	"""offset + amplitude exp(-r^2 / (2 width^2)) about the box centre"""
	validate_width(width, grid)
	r = grid.centred_radius
	return ScalarField(grid, offset + amplitude * np.exp(-r ** 2 / (2 * width ** 2)))


def radial_bump(grid, amplitude=1.0, width=0.5, offset=0.0, **_):
	"""offset + amplitude exp(1 - 1/(1 - (r/width)^2)), compactly supported in r < width"""
	validate_width(width, grid)
	if width >= grid.L / 2:
		raise ParameterError(f"radial-bump width {width} does not fit in a box of side {grid.L:g}")
	s2 = (grid.centred_radius / width) ** 2
	inside = s2 < 1
	with np.errstate(divide="ignore", over="ignore"):
		bump = np.exp(1 - 1 / np.where(inside, 1 - s2, 1.0))
	return ScalarField(grid, offset + amplitude * np.where(inside, bump, 0.0))


def multi_mode(grid, amplitude=1.0, offset=0.0, modes=4, seed=0, **_):
	"""offset + amplitude times a seeded sum of Fourier modes up to ``modes``, scaled to unit sup"""
	if modes < 1:
		raise ParameterError(f"modes must be at least 1, got {modes}")
	rng = np.random.default_rng(seed)
	scale = 2 * math.pi / grid.L
	if grid.n == 1:
		wavevectors = [(a,) for a in range(1, modes + 1)]
	else:
		wavevectors = [(a, b) for a in range(0, modes + 1) for b in range(-modes, modes + 1) if (a, b) > (0, 0)]
	total = np.zeros(grid.shape)
	for m in wavevectors:
		weight = math.exp(-sum(c * c for c in m) / modes)
		phase = sum(c * scale * x for c, x in zip(m, grid.coordinates))
		cos_coefficient, sin_coefficient = rng.normal(size=2)
		total = total + weight * (cos_coefficient * np.cos(phase) + sin_coefficient * np.sin(phase))
	peak = float(np.max(np.abs(total)))
	if peak > 0:
		total = total / peak
	return ScalarField(grid, offset + amplitude * total)


def tanh_front(grid, amplitude=1.0, width=0.5, offset=0.0, **_):
	"""offset + amplitude tanh(sin(2 pi x_1 / L) / width): two fronts of thickness ~ width"""
	validate_width(width, grid)
	x = grid.coordinates[0]
	return ScalarField(grid, offset + amplitude * np.tanh(np.sin(2 * math.pi * x / grid.L) / width))


def cosine(grid, amplitude=1.0, offset=0.0, mode=1, **_):
	x = grid.coordinates[0]
	return ScalarField(grid, offset + amplitude * np.cos(2 * math.pi * mode * x / grid.L))
