from nonlocal_transport.nonlocal_transport.nonlocal_operators.nonlocal_operators import (
	ModelParams,
	Regime,
	classify_regime,
	d_gamma_quadrature,
	d_gamma_quadrature_report,
	d_gamma_spectral,
	d_gamma_vector,
	divergence_residual,
	finite_difference_lower_bound_ratio,
	fractional_laplacian,
	fractional_laplacian_quadrature,
	nonlinear_lower_bound_ratio,
	pointwise_identity_residual,
	velocity,
	velocity_gradient_sup,
)
from nonlocal_transport.nonlocal_transport.nonlocal_operators.quadrature import (
	CalibrationRecord,
	QuadratureParams,
	calibrate_constant,
	calibrated_constant,
	textbook_constant,
)
