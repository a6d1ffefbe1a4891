"""Scenario presets, one per qualitative regime the solver is exercised in.

Each preset is a conf dictionary in the same shape as a parsed experiment file.
"""

SUBCRITICAL = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 1.5, "kappa": 1.0},
	"grid": {"N": 64, "L": "2pi"},
	"initial_condition": {"family": "gaussian-bump", "amplitude": 1.0, "width": 0.5, "offset": 0.0},
	"run": {"t_end": 5.0, "cadence": 10},
}

CRITICAL = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 1.0, "kappa": 1.0},
	"grid": {"N": 64, "L": "2pi"},
	"initial_condition": {"family": "multi-mode", "amplitude": 1.0, "offset": 1.0, "modes": 3, "seed": 0},
	"run": {"t_end": 5.0, "cadence": 10},
}

SUPERCRITICAL = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 0.8, "kappa": 1.0},
	"grid": {"N": 64, "L": "2pi"},
	"initial_condition": {"family": "gaussian-bump", "amplitude": 1.0, "width": 0.6, "offset": 0.0},
	"run": {"t_end": 2.0, "cadence": 10},
	"diagnostics": {"beta": 0.6, "eventual": 1},
}

BLOWUP_PROBE = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 0.2, "kappa": 0.01},
	"grid": {"N": 64, "L": "2pi"},
	"initial_condition": {"family": "radial-bump", "amplitude": 20.0, "width": 1.5},
	"stepper": {"grad_ceiling": 1e4},
	"run": {"t_end": 5.0, "cadence": 5},
	"diagnostics": {"track_j": 1},
	"blowup": {"run_control": 1, "control_amplitude": 0.01},
}

BLOWUP_CONTROL = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 0.2, "kappa": 0.01},
	"grid": {"N": 64, "L": "2pi"},
	"initial_condition": {"family": "radial-bump", "amplitude": 0.2, "width": 1.5},
	"stepper": {"grad_ceiling": 1e4},
	"run": {"t_end": 5.0, "cadence": 5},
	"diagnostics": {"track_j": 1},
}

OSS_FRONT = {
	"model": {"n": 2, "alpha": 0.5, "gamma": 1.0, "kappa": 1.0},
	"grid": {"N": 64, "L": "2pi"},
	"initial_condition": {"family": "tanh-front", "amplitude": 0.05, "width": 0.2},
	"run": {"t_end": 1.0, "cadence": 10},
	"diagnostics": {"delta": 0.1},
}
