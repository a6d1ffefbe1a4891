import math

import numpy as np
import pytest
import scipy.special

from nonlocal_transport.exceptions import AsymmetryError, ParameterError, ProfileError
from nonlocal_transport.nonlocal_transport.blowup_lab.blowup_lab import (
	RadialProfile,
	centre_velocity_ratio,
	delta_functional,
	exp_integral_bound,
	extract_radial_profile,
	fit_riccati,
	j_functional,
	j_functional_composite,
	j_functional_grid,
	j_gradient_bound,
	q_functional,
	riccati_envelope,
	riccati_solution,
	weighted_dissipation_check,
	weighted_nonlinear_check,
	weighted_singular_energy,
)
from nonlocal_transport.nonlocal_transport.blowup_lab.corpus import (
	BumpMixture,
	evaluate_corpus,
	fit_nonlinear_constants,
	max_ratio_drift,
	random_radial_corpus,
	summarize_corpus,
	zero_profile,
)
from nonlocal_transport.nonlocal_transport.reference_oracles.reference_oracles import e1_series, rk4_integrate
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import ScalarField, make_grid, quarter_turn


def gaussian(r):
	return np.exp(-np.asarray(r) ** 2)


def quartic_bump(r):
	r = np.asarray(r, dtype=float)
	return np.where(r < 1, (1 - r ** 2) ** 2, 0.0)


@pytest.fixture
def gaussian_profile():
	return RadialProfile.from_function(2, gaussian)


@pytest.fixture
def bump_profile():
	return RadialProfile.from_function(2, quartic_bump, support_radius=1.0)


@pytest.fixture
def radial_grid():
	return make_grid(2, 128, 16.0)


class TestRadialProfile:
	def test_nodes_must_start_at_zero(self):
		with pytest.raises(ProfileError):
			RadialProfile(2, [0.1, 0.2, 0.3, 0.4], [1.0, 1.0, 1.0, 1.0])

	def test_nodes_must_increase(self):
		with pytest.raises(ProfileError):
			RadialProfile(2, [0.0, 0.2, 0.2, 0.4], [1.0, 1.0, 1.0, 1.0])

	def test_values_must_be_finite(self):
		with pytest.raises(ProfileError):
			RadialProfile(2, [0.0, 0.1, 0.2, 0.3], [1.0, np.nan, 1.0, 1.0])

	def test_sparse_nodes_rejected(self):
		with pytest.raises(ProfileError):
			RadialProfile(2, [0.0, 0.1, 0.2, 0.3], [1.0, 0.0, 1.0, 0.0])

	def test_zero_beyond_support(self, bump_profile):
		assert float(bump_profile(1.5)) == 0.0
		assert bump_profile.centre_value == 1.0

	def test_spline_reproduces_nodes(self):
		nodes = np.linspace(0, 4, 81)
		profile = RadialProfile(2, nodes, gaussian(nodes))
		assert np.max(np.abs(profile(nodes) - gaussian(nodes))) <= 1e-14


class TestJFunctional:
	def test_constant_profile(self):
		profile = RadialProfile.from_function(2, lambda r: np.full(np.shape(r), 3.0))
		assert j_functional(profile) == 0.0

	def test_gaussian_two_quadratures_agree(self, gaussian_profile):
		adaptive = j_functional(gaussian_profile)
		composite = j_functional_composite(gaussian_profile, panels=256)
		assert adaptive > 0
		assert composite == pytest.approx(adaptive, rel=1e-8)

	def test_sign_flip(self, gaussian_profile):
		assert j_functional(gaussian_profile.scaled(-1.0)) == pytest.approx(-j_functional(gaussian_profile), rel=1e-14)

	def test_compact_support_tail(self, bump_profile):
		# g = 0 beyond r = 1, so the tail is g(0) E_1(1) in closed form
		inner = j_functional_composite(bump_profile, panels=256)
		assert j_functional(bump_profile) == pytest.approx(inner, rel=1e-8)
		assert j_functional(bump_profile) > 2 * math.pi * float(scipy.special.exp1(1.0))

	def test_discontinuous_origin_rejected(self):
		spike = lambda r: np.where(np.asarray(r) == 0, 1.0, 0.0)
		with pytest.raises(ProfileError):
			j_functional(RadialProfile.from_function(2, spike))

	def test_grid_evaluation_close_to_radial_quadrature(self, radial_grid, gaussian_profile):
		theta = ScalarField(radial_grid, gaussian(radial_grid.centred_radius))
		assert j_functional_grid(theta) == pytest.approx(j_functional(gaussian_profile), rel=3e-2)

	def test_gradient_bound(self, radial_grid):
		theta = ScalarField(radial_grid, gaussian(radial_grid.centred_radius))
		report = j_gradient_bound(theta)
		assert 0 < report.ratio <= 1
		assert report.j_value > 0


class TestAuxiliaryFunctionals:
	def test_singular_energy_bounds_j(self, gaussian_profile, bump_profile):
		for profile in (gaussian_profile, bump_profile):
			for alpha in (0.3, 0.5, 0.8):
				report = weighted_singular_energy(profile, alpha)
				assert report.energy > 0
				assert report.holds

	def test_holder_constant_value(self, gaussian_profile):
		report = weighted_singular_energy(gaussian_profile, 0.5)
		assert report.c4 == pytest.approx(math.sqrt(2 * math.pi / 2))

	def test_q_below_energy(self, gaussian_profile):
		energy = weighted_singular_energy(gaussian_profile, 0.4).energy
		assert 0 < q_functional(gaussian_profile, 0.4) < energy

	def test_delta_functional(self, gaussian_profile):
		assert delta_functional(gaussian_profile, 0.3) > 0
		assert delta_functional(gaussian_profile.scaled(2.0), 0.3) == pytest.approx(2 * delta_functional(gaussian_profile, 0.3))
		with pytest.raises(ParameterError):
			delta_functional(gaussian_profile, 2.5)


class TestWeightedChecks:
	def test_zero_profile_is_degenerate(self):
		report = weighted_nonlinear_check(zero_profile(), 0.5)
		assert report.lhs_value == 0
		assert report.rhs_value == 0
		assert report.degenerate
		assert report.ratio == 0

	def test_bump_nonlinear(self, bump_profile):
		report = weighted_nonlinear_check(bump_profile, 0.5)
		assert report.rhs_value > 0
		assert np.isfinite(report.ratio)
		assert report.quadrature_error_estimate >= 0

	def test_nonlinear_ratio_scale_invariant(self, bump_profile):
		base = weighted_nonlinear_check(bump_profile, 0.3)
		scaled = weighted_nonlinear_check(bump_profile.scaled(3.0), 0.3)
		assert scaled.lhs_value == pytest.approx(9 * base.lhs_value, rel=1e-10)
		assert scaled.ratio == pytest.approx(base.ratio, rel=1e-10)

	def test_constant_dissipation(self):
		profile = RadialProfile.from_function(2, lambda r: np.full(np.shape(r), 2.0))
		report = weighted_dissipation_check(profile, 0.5)
		assert report.lhs_value == pytest.approx(0.0, abs=1e-12)
		assert report.rhs_value == 0
		assert report.ratio == 0

	def test_gaussian_dissipation(self, gaussian_profile):
		report = weighted_dissipation_check(gaussian_profile, 0.5)
		assert report.rhs_value > 0
		assert 0 < report.ratio < math.inf
		assert not report.periodization_flag

	def test_dissipation_ratio_scale_invariant(self, gaussian_profile):
		base = weighted_dissipation_check(gaussian_profile, 0.6)
		scaled = weighted_dissipation_check(gaussian_profile.scaled(0.25), 0.6)
		assert scaled.ratio == pytest.approx(base.ratio, rel=1e-10)

	@pytest.mark.parametrize("gamma", [0.0, 1.0, 1.4])
	def test_dissipation_order_window(self, gaussian_profile, gamma):
		with pytest.raises(ParameterError):
			weighted_dissipation_check(gaussian_profile, gamma)

	def test_three_dimensional_profile_rejected(self):
		with pytest.raises(ParameterError):
			weighted_nonlinear_check(RadialProfile.from_function(3, gaussian), 0.5)


class TestExpIntegralBound:
	def test_unit_radius(self):
		lhs, rhs = exp_integral_bound(1.0)
		assert lhs == pytest.approx(0.21938393439552, abs=1e-10)
		assert rhs == pytest.approx(2 * math.log(math.e + 1))

	def test_small_radius(self):
		bound = exp_integral_bound(0.01)
		assert bound.lhs == pytest.approx(e1_series(0.01), rel=1e-10)
		assert bound.lhs == pytest.approx(4.0379, abs=1e-3)
		assert bound.rhs == pytest.approx(2 * math.log(math.e + 100))

	def test_large_radius(self):
		bound = exp_integral_bound(1e4)
		assert bound.lhs < 1e-300
		assert bound.rhs == pytest.approx(2.0, abs=1e-3)
		assert bound.holds

	def test_log_sweep(self):
		for rho in np.logspace(-4, 4, 200):
			bound = exp_integral_bound(float(rho))
			assert bound.lhs <= bound.rhs
			assert bound.lhs == pytest.approx(float(scipy.special.exp1(rho)), rel=1e-9, abs=1e-300)

	def test_rejects_non_positive(self):
		with pytest.raises(ParameterError):
			exp_integral_bound(0.0)


class TestRiccati:
	def test_pure_riccati(self):
		assert riccati_envelope(2.0, 0.5, 0.0, 1.0) == pytest.approx(1.0)

	def test_equilibrium(self):
		M = 1.5
		assert riccati_envelope(M * math.sqrt(8.0 / 2.0), 2.0, 8.0, M) is None

	def test_below_equilibrium(self):
		assert riccati_envelope(1.0, 1.0, 4.0, 1.0) is None

	def test_horizon(self):
		assert riccati_envelope(5.0, 1.0, 4.0, 1.0, horizon=0.1) is None

	def test_closed_form_matches_rk4(self):
		J0, C7, C8, M = 5.0, 1.0, 4.0, 1.0
		blowup = riccati_envelope(J0, C7, C8, M)
		assert blowup == pytest.approx(math.log(7 / 3) / 4)
		t_end = 0.7 * blowup
		times, states = rk4_integrate(lambda t, y: C7 * y ** 2 - C8 * M ** 2, np.array([J0]), (0.0, t_end), 20000)
		closed = riccati_solution(times[-1], J0, C7, C8, M)
		assert float(closed) == pytest.approx(states[-1, 0], rel=1e-8)
		assert np.isinf(riccati_solution(blowup * 1.01, J0, C7, C8, M))

	@pytest.mark.parametrize("J0", [-5.0, -1.0, 0.5])
	def test_solution_branches_satisfy_ode(self, J0):
		C7, C8, M = 0.8, 2.0, 1.2
		t = np.array([0.2, 0.35])
		h = 1e-5
		derivative = (riccati_solution(t + h, J0, C7, C8, M) - riccati_solution(t - h, J0, C7, C8, M)) / (2 * h)
		y = riccati_solution(t, J0, C7, C8, M)
		assert np.allclose(derivative, C7 * y ** 2 - C8 * M ** 2, rtol=1e-6, atol=1e-8)
		assert float(riccati_solution(0.0, J0, C7, C8, M)) == pytest.approx(J0)

	def test_fit_recovers_coefficients(self):
		J0, C7, C8, M = 5.0, 1.0, 4.0, 1.0
		times = np.linspace(0.0, 0.1, 301)
		fit = fit_riccati(times, riccati_solution(times, J0, C7, C8, M))
		assert fit.c7 == pytest.approx(C7, rel=1e-3)
		assert fit.k == pytest.approx(C8 * M ** 2, abs=5e-2)
		assert fit.blowup_time(J0, M) == pytest.approx(riccati_envelope(J0, C7, C8, M), rel=1e-2)


class TestRadialExtraction:
	def test_gaussian_round_trip(self, radial_grid):
		theta = ScalarField(radial_grid, gaussian(radial_grid.centred_radius))
		profile = extract_radial_profile(theta)
		assert profile.r_nodes[0] == 0.0
		assert np.max(np.abs(profile.values - gaussian(profile.r_nodes))) <= 1e-2
		assert math.isfinite(profile.support_radius)

	def test_constant_field(self, radial_grid):
		theta = ScalarField(radial_grid, np.full(radial_grid.shape, 0.5))
		profile = extract_radial_profile(theta)
		assert np.allclose(profile.values, 0.5, rtol=0, atol=1e-15)
		assert profile.support_radius == math.inf

	def test_rotation_invariance(self, radial_grid):
		theta = ScalarField(radial_grid, gaussian(radial_grid.centred_radius))
		first = extract_radial_profile(theta)
		second = extract_radial_profile(quarter_turn(theta))
		assert np.allclose(first.values, second.values, rtol=0, atol=1e-14)

	def test_off_centre_field_rejected(self, radial_grid):
		x, y = radial_grid.centred_coordinates
		theta = ScalarField(radial_grid, np.exp(-((x - 1.0) ** 2 + y ** 2)))
		with pytest.raises(AsymmetryError):
			extract_radial_profile(theta)

	def test_centre_velocity_vanishes(self, radial_grid):
		theta = ScalarField(radial_grid, gaussian(radial_grid.centred_radius))
		assert centre_velocity_ratio(theta, 0.5) < 1e-6


class TestCorpus:
	def test_seeded_corpus_is_reproducible(self):
		first = random_radial_corpus(5, seed=11)
		second = random_radial_corpus(5, seed=11)
		assert [p.function for p in first] == [p.function for p in second]
		assert all(isinstance(p.function, BumpMixture) for p in first)

	def test_single_profile_sweep(self):
		profiles = random_radial_corpus(1, seed=3)
		frame = evaluate_corpus(profiles, alphas=[0.5], gammas=[0.4])
		assert len(frame) == 2
		assert list(frame["check"]) == ["nonlinear", "dissipation"]
		assert np.all(np.isfinite(frame["ratio"]))

	def test_degenerate_rows_excluded(self):
		profiles = random_radial_corpus(2, seed=5) + [zero_profile()]
		frame = evaluate_corpus(profiles, alphas=[0.3], gammas=[0.2])
		assert int(frame["degenerate"].sum()) == 2
		summary = summarize_corpus(frame)
		assert summary["nonlinear:0.3"]["degenerate"] == 1
		assert summary["dissipation:0.2"]["max_ratio"] > 0

	def test_fitted_constants_close_every_gap(self):
		frame = evaluate_corpus(random_radial_corpus(6, seed=9), alphas=[0.3, 0.5])
		constants = fit_nonlinear_constants(frame)
		assert constants.c_prime > 0
		assert constants.c_double_prime >= 0
		assert constants.violations == 0

	@pytest.mark.slow
	def test_dissipation_ratio_bounded_on_large_corpus(self):
		frame = evaluate_corpus(random_radial_corpus(200, seed=2024), gammas=[0.2, 0.4, 0.6, 0.8], workers=4)
		valid = frame[~frame["degenerate"]]
		assert np.all(np.isfinite(valid["ratio"]))
		assert max_ratio_drift(frame) < 0.1

	@pytest.mark.slow
	def test_nonlinear_constants_stable_under_doubling(self):
		frame = evaluate_corpus(random_radial_corpus(200, seed=2024), alphas=[0.3, 0.5], workers=4)
		full = fit_nonlinear_constants(frame)
		half = fit_nonlinear_constants(frame[frame["profile_id"] < 100])
		assert full.violations == 0
		assert half.violations == 0
		assert abs(full.c_prime - half.c_prime) < 0.1 * full.c_prime
