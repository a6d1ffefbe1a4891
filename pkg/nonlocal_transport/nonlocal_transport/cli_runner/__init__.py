from nonlocal_transport.nonlocal_transport.cli_runner.artifacts import (
	read_final_state,
	write_diagnostics_csv,
	write_final_state,
	write_run_artifacts,
)
from nonlocal_transport.nonlocal_transport.cli_runner.run_config import (
	InitialCondition,
	RunConfig,
	build_run_config,
	load_run_config,
)
