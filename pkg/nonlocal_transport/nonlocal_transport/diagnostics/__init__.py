from nonlocal_transport.nonlocal_transport.diagnostics.diagnostics import (
	DIAGNOSTICS_COLUMNS,
	DIAGNOSTICS_SCHEMA_VERSION,
	DiagnosticsRecord,
	DiagnosticsRecorder,
	DiagnosticsSettings,
	EventualRegularityParams,
	check_eventual_regularity,
	conditional_regularity_ratio,
	dyadic_shift_set,
	eta0_choice,
	eta_of_t,
	eta_vanishing_time,
	eventual_regularity_time,
	existence_time_scale,
	global_regularity_data_size,
	holder_seminorm,
	hs_growth_envelope,
	monotonicity_report,
	norms,
	oss_length,
	oss_stability,
	records_to_frame,
	vartheta_ceiling,
	vartheta_sup,
)
