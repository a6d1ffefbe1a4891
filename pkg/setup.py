from setuptools import setup, find_packages

with open("requirements.txt") as f:
	install_requires = f.read().strip().split("\n")

with open("requirements-dev.txt") as f:
	tests_require = f.read().strip().split("\n")

# get version from __version__ variable in nonlocal_transport/__init__.py
from nonlocal_transport import __version__ as version

setup(
	name="nonlocal_transport",
	version=version,
	description="Pseudo-spectral simulator and verification harness for transport by nonlocal velocity with fractional dissipation",
	author="Nonlocal Transport Developers",
	packages=find_packages(),
	package_data={"nonlocal_transport.nonlocal_transport.config": ["run_config.json"]},
	zip_safe=False,
	include_package_data=True,
	install_requires=install_requires,
	extras_require={"test": tests_require},
	entry_points={"console_scripts": ["nonlocal-transport=nonlocal_transport.nonlocal_transport.api.cli:run_cli"]},
)
