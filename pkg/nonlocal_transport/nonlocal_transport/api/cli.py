import argparse
import json
import logging
import sys

from nonlocal_transport import __version__
from nonlocal_transport.utils import get_hooks, resolve_hook

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def add_config_arguments(parser):
	source = parser.add_mutually_exclusive_group(required=True)
	source.add_argument("--config", dest="config_path", help="Experiment file (INI sections)")
	source.add_argument("--preset", choices=sorted(get_hooks("scenario_presets")), help="Built-in scenario")
	parser.add_argument("--out", help="Output directory (overrides [output] directory)")
	parser.add_argument("--seed", type=int, help="Initial-condition seed (overrides [initial_condition] seed)")


def build_parser():
	common = argparse.ArgumentParser(add_help=False)
	common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="Log warnings only and hide progress bars")

	parser = argparse.ArgumentParser(
		prog="nonlocal-transport",
		description="Simulate and verify transport by a nonlocal velocity with fractional dissipation",
		parents=[common],
	)
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	subparsers = parser.add_subparsers(dest="command", required=True)

	simulate = subparsers.add_parser("simulate", parents=[common], help="Run one experiment")
	add_config_arguments(simulate)

	scaling = subparsers.add_parser("scaling-test", parents=[common], help="Check the dilation symmetry")
	add_config_arguments(scaling)
	scaling.add_argument("--lambda", dest="lam", type=int, default=2, help="Integer dilation factor dividing N")

	lab = subparsers.add_parser("inequality-lab", parents=[common], help="Sweep the weighted inequalities over a radial corpus")
	lab.add_argument("--corpus-size", type=int, default=20)
	lab.add_argument("--seed", type=int, default=0)
	lab.add_argument("--alpha", dest="alphas", type=float, nargs="+", default=[0.5])
	lab.add_argument("--gamma", dest="gammas", type=float, nargs="+", default=[0.25, 0.5])
	lab.add_argument("--workers", type=int, default=1)
	lab.add_argument("--include-zero", action="store_true", help="Append the zero profile to the corpus")
	lab.add_argument("--out", default="output")

	probe = subparsers.add_parser("blowup-probe", parents=[common], help="Track J on radial data")
	add_config_arguments(probe)

	diagnose = subparsers.add_parser("diagnose", parents=[common], help="Diagnostics of a final_state.bin dump")
	diagnose.add_argument("--state", dest="state_path", required=True)
	source = diagnose.add_mutually_exclusive_group()
	source.add_argument("--config", dest="config_path")
	source.add_argument("--preset", choices=sorted(get_hooks("scenario_presets")))
	diagnose.add_argument("--out")

	init = subparsers.add_parser("init", parents=[common], help="Write preset files and calibrate quadrature constants")
	init.add_argument("--out", default="presets")
	init.add_argument("--no-calibrate", dest="calibrate", action="store_false")
	init.add_argument("--calibration", dest="calibration_path")
	return parser


def main(argv=None):
	"""Entry point; returns the process exit code"""
	args = build_parser().parse_args(argv)
	quiet = getattr(args, "quiet", False)
	logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format=LOG_FORMAT)
	kwargs = {k: v for k, v in vars(args).items() if k not in ("command", "quiet")}
	kwargs["quiet"] = quiet
	command = resolve_hook("commands", args.command)
	result = command(**kwargs)
	if not quiet or result["status"] != "success":
		print(json.dumps({"status": result["status"], "exit_code": result["exit_code"], "message": result.get("message")}))
	return result["exit_code"]


def run_cli():
	sys.exit(main())


if __name__ == "__main__":
	run_cli()
