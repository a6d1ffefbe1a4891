from nonlocal_transport.nonlocal_transport.integrator.integrator import (
	RunResult,
	ScalingReport,
	SelfConvergenceReport,
	SimState,
	StepPolicy,
	Termination,
	asymmetry_norm,
	cfl_dt,
	rescale_solution,
	run,
	run_with_snapshots,
	scaling_discrepancy,
	self_convergence,
	step,
	symmetrize,
)
