import logging
import os

from nonlocal_transport.nonlocal_transport.config.transport_config import write_conf_file
from nonlocal_transport.nonlocal_transport.nonlocal_operators.quadrature import (
	calibrate_constant,
	calibration_path as default_calibration_path,
	store_calibration,
)
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import make_grid
from nonlocal_transport.utils import get_attr, get_hooks

logger = logging.getLogger(__name__)

CALIBRATION_FILE = "calibration.txt"


def after_install(directory="presets", calibrate=True, calibration_path=None):
	"""Write the preset experiment files and calibrate the quadrature constants for their grids"""
	os.makedirs(directory, exist_ok=True)

	presets = create_preset_files(directory)

	calibrations = []
	if calibrate:
		calibration_path = calibration_path or default_calibration_path() or os.path.join(directory, CALIBRATION_FILE)
		calibrations = calibrate_preset_grids(calibration_path)

	logger.info(f"Provisioned {len(presets)} presets and {len(calibrations)} calibrations")
	return {"presets": presets, "calibrations": calibrations, "calibration_path": calibration_path if calibrate else None}


def create_preset_files(directory):
	"""One <name>.ini file per registered scenario preset"""
	paths = []
	for name, dotted_path in sorted(get_hooks("scenario_presets").items()):
		path = os.path.join(directory, f"{name}.ini")
		write_conf_file(get_attr(dotted_path), path)
		paths.append(path)
	return paths


def preset_operator_orders():
	"""(n, N, L, gamma) for every preset grid and dissipation order"""
	from nonlocal_transport.nonlocal_transport.config.transport_config import TransportConfig

	orders = set()
	for dotted_path in get_hooks("scenario_presets").values():
		conf = get_attr(dotted_path)
		model = TransportConfig.get_model_settings(conf)
		grid = TransportConfig.get_grid_settings(conf)
		orders.add((model["n"], grid["N"], grid["L"], model["gamma"]))
	return sorted(orders)


def calibrate_preset_grids(path):
	"""Calibrate and store the lattice constant for each preset (grid, gamma)"""
	records = []
	for n, N, L, gamma in preset_operator_orders():
		record = calibrate_constant(make_grid(n, N, L), gamma)
		store_calibration(record, path)
		records.append({"n": n, "N": N, "L": L, "gamma": gamma, "c_value": record.c_value, "residual": record.residual})
	return records
