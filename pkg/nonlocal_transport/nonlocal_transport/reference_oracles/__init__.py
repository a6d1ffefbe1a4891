from nonlocal_transport.nonlocal_transport.reference_oracles.reference_oracles import (
	DEFAULT_BUDGET,
	OracleBudget,
	d_gamma_direct,
	dft_direct,
	e1_series,
	fd_gradient,
	fractional_laplacian_direct,
	holder_dense,
	idft_direct,
	oss_dense,
	rk4_integrate,
)
