from nonlocal_transport.nonlocal_transport.blowup_lab.blowup_lab import (
	RadialProfile,
	WeightedIntegralReport,
	centre_velocity_ratio,
	delta_functional,
	exp_integral_bound,
	extract_radial_profile,
	fit_riccati,
	j_functional,
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
	evaluate_corpus,
	fit_nonlinear_constants,
	random_radial_corpus,
	summarize_corpus,
)
