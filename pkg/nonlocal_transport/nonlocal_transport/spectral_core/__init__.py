from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import (
	ScalarField,
	TorusGrid,
	VectorField,
	apply_multiplier,
	asymmetry_norm,
	dealias,
	divergence,
	dyadic_shifts,
	evaluate_at,
	gradient,
	interpolate,
	make_grid,
	product,
	quarter_turn,
	refined_extrema,
	restrict,
	shift_difference,
	shift_length,
	symmetrize,
)
