import math

import numpy as np
import pytest
from hypothesis import settings

from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import ScalarField, make_grid

settings.register_profile("default", max_examples=25, deadline=None)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile("default")


def smooth_random_field(grid, seed=0, kmax=4, offset=0.0):
	"""Band-limited random field with Gaussian spectral decay"""
	rng = np.random.default_rng(seed)
	values = np.full(grid.shape, float(offset))
	scale = 2 * math.pi / grid.L
	modes = range(0, kmax + 1)
	if grid.n == 1:
		wavevectors = [(m,) for m in modes if m > 0]
	else:
		wavevectors = [(a, b) for a in modes for b in range(-kmax, kmax + 1) if (a, b) > (0, 0)]
	for m in wavevectors:
		weight = math.exp(-sum(c * c for c in m) / 8.0)
		phase = sum(c * scale * x for c, x in zip(m, grid.coordinates))
		values = values + weight * (rng.normal() * np.cos(phase) + rng.normal() * np.sin(phase))
	return ScalarField(grid, values)


@pytest.fixture
def grid2d():
	return make_grid(2, 64)


@pytest.fixture
def grid1d():
	return make_grid(1, 64)


@pytest.fixture
def small_grid2d():
	return make_grid(2, 32)


@pytest.fixture
def smooth_field():
	return smooth_random_field
