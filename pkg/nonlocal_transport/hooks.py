from . import __version__ as app_version

app_name = "nonlocal_transport"
app_title = "Nonlocal Transport"
app_publisher = "Nonlocal Transport Developers"
app_description = "Pseudo-spectral simulator and verification harness for transport by nonlocal velocity with fractional dissipation"
app_license = "MIT"

# Installation
# ------------

before_install = "nonlocal_transport.nonlocal_transport.install.before_install.before_install"
after_install = "nonlocal_transport.nonlocal_transport.install.after_install.after_install"

# Command-line subcommands
# ------------------------

commands = {
	"simulate": "nonlocal_transport.nonlocal_transport.api.transport_api.cmd_simulate",
	"scaling-test": "nonlocal_transport.nonlocal_transport.api.transport_api.cmd_scaling_test",
	"inequality-lab": "nonlocal_transport.nonlocal_transport.api.transport_api.cmd_inequality_lab",
	"blowup-probe": "nonlocal_transport.nonlocal_transport.api.transport_api.cmd_blowup_probe",
	"diagnose": "nonlocal_transport.nonlocal_transport.api.transport_api.cmd_diagnose",
	"init": "nonlocal_transport.nonlocal_transport.api.transport_api.cmd_init",
}

# Initial-condition families
# --------------------------

initial_conditions = {
	"gaussian-bump": "nonlocal_transport.nonlocal_transport.cli_runner.initial_conditions.gaussian_bump",
	"multi-mode": "nonlocal_transport.nonlocal_transport.cli_runner.initial_conditions.multi_mode",
	"tanh-front": "nonlocal_transport.nonlocal_transport.cli_runner.initial_conditions.tanh_front",
	"radial-bump": "nonlocal_transport.nonlocal_transport.cli_runner.initial_conditions.radial_bump",
	"cosine": "nonlocal_transport.nonlocal_transport.cli_runner.initial_conditions.cosine",
}

# Scenario presets
# ----------------

scenario_presets = {
	"subcritical": "nonlocal_transport.nonlocal_transport.config.presets.SUBCRITICAL",
	"critical": "nonlocal_transport.nonlocal_transport.config.presets.CRITICAL",
	"supercritical": "nonlocal_transport.nonlocal_transport.config.presets.SUPERCRITICAL",
	"blowup-probe": "nonlocal_transport.nonlocal_transport.config.presets.BLOWUP_PROBE",
	"blowup-control": "nonlocal_transport.nonlocal_transport.config.presets.BLOWUP_CONTROL",
	"oss-front": "nonlocal_transport.nonlocal_transport.config.presets.OSS_FRONT",
}
