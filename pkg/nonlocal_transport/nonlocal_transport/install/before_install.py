import importlib
import logging
import os
import platform

from nonlocal_transport.exceptions import TransportError
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import WORKERS_ENV

logger = logging.getLogger(__name__)

REQUIRED_PACKAGES = ["numpy", "scipy", "pandas", "tqdm"]
MINIMUM_PYTHON = (3, 8)


def before_install():
	"""Pre-installation checks"""

	# Check Python dependencies
	check_python_dependencies()

	# Check interpreter and FFT settings
	check_system_requirements()

	logger.info("Pre-installation checks completed successfully")


def check_python_dependencies():
	"""Check if required Python packages are importable"""
	missing_packages = []

	for package in REQUIRED_PACKAGES:
		try:
			importlib.import_module(package)
		except ImportError:
			missing_packages.append(package)

	if missing_packages:
		raise TransportError(
			f"Missing required Python packages: {', '.join(missing_packages)}. "
			f"Please install them using: pip install {' '.join(missing_packages)}"
		)

	logger.info("Python dependencies check passed")


def check_system_requirements():
	"""Check interpreter version and the FFT worker setting"""
	version = tuple(int(part) for part in platform.python_version_tuple()[:2])
	if version < MINIMUM_PYTHON:
		raise TransportError(f"Python {platform.python_version()} is too old; {'.'.join(map(str, MINIMUM_PYTHON))} or newer is required")

	workers = os.environ.get(WORKERS_ENV, "1")
	if workers != "1":
		logger.warning(f"{WORKERS_ENV}={workers}: multi-threaded FFTs may break byte-identical reruns")

	logger.info("System requirements check completed")
