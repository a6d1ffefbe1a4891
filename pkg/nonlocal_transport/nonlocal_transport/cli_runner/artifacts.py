"""Run artifacts: diagnostics CSV, the binary final-state dump and JSON summaries.

Every artifact is written to a temporary file in the destination directory and moved
into place, so a failed command never leaves a partial file behind. Commands that write
several artifacts stage them all first and move them in one pass at the end, so a
failure while writing leaves the previous set untouched.

final_state.bin layout (little-endian):
	8 bytes  magic b"NLTSTATE"
	u32 n, u32 N, f64 L, f64 t
	N^n f64 values in row-major order

JSON artifacts are strict: non-finite numbers are written as null.
"""

import json
import logging
import math
import os
import tempfile
from contextlib import contextmanager

import numpy as np

from nonlocal_transport.exceptions import ArtifactError
from nonlocal_transport.nonlocal_transport.diagnostics.diagnostics import DIAGNOSTICS_COLUMNS, DIAGNOSTICS_SCHEMA_VERSION
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import ScalarField, make_grid

logger = logging.getLogger(__name__)

STATE_MAGIC = b"NLTSTATE"
HEADER_DTYPE = np.dtype([("n", "<u4"), ("N", "<u4"), ("L", "<f8"), ("t", "<f8")])
FLOAT_FORMAT = "%.17g"
DIAGNOSTICS_FILE = "diagnostics.csv"
FINAL_STATE_FILE = "final_state.bin"
SUMMARY_FILE = "run_summary.json"


def prepare_output_dir(directory):
	os.makedirs(directory, exist_ok=True)
	return directory


def default_file_mode():
	"""0666 masked by the process umask, the mode open() would have created"""
	mask = os.umask(0)
	os.umask(mask)
	return 0o666 & ~mask


class ArtifactStaging:
	"""Finished temporary files waiting to be moved over their destinations together"""

	def __init__(self):
		self.pending = []

	def stage(self, temporary, path):
		self.pending.append((temporary, path))

	def commit(self):
		while self.pending:
			temporary, path = self.pending.pop(0)
			os.replace(temporary, path)

	def discard(self):
		for temporary, _ in self.pending:
			if os.path.exists(temporary):
				os.remove(temporary)
		self.pending = []


@contextmanager
def staged_artifacts():
	"""Collect atomic writes and publish them only when the whole block succeeds"""
	staging = ArtifactStaging()
	try:
		yield staging
		staging.commit()
	except BaseException:
		staging.discard()
		raise


@contextmanager
def atomic_writer(path, mode="w", staging=None):
	"""Open a temporary sibling of ``path`` and move it into place on success

	With ``staging`` the finished file is handed over instead of replaced immediately.
	"""
	directory = os.path.dirname(os.path.abspath(path))
	handle, temporary = tempfile.mkstemp(dir=directory, prefix=".partial-")
	try:
		with os.fdopen(handle, mode, **({} if "b" in mode else {"newline": ""})) as stream:
			yield stream
		# mkstemp creates 0600 files
		os.chmod(temporary, default_file_mode())
		if staging is None:
			os.replace(temporary, path)
		else:
			staging.stage(temporary, path)
	except BaseException:
		if os.path.exists(temporary):
			os.remove(temporary)
		raise


def write_frame_csv(frame, path, comments=(), staging=None):
	"""CSV with '.' decimals, LF line endings and round-trip float precision"""
	with atomic_writer(path, staging=staging) as stream:
		for comment in comments:
			stream.write(f"# {comment}\n")
		frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
	logger.debug(f"Wrote {len(frame)} rows to {path}")
	return path


def write_diagnostics_csv(frame, path, staging=None):
	missing = [c for c in DIAGNOSTICS_COLUMNS if c not in frame.columns]
	if missing:
		raise ArtifactError(f"Diagnostics frame lacks columns {missing}")
	return write_frame_csv(frame[DIAGNOSTICS_COLUMNS], path, staging=staging)


def write_final_state(theta, t, path, staging=None):
	grid = theta.grid
	header = np.array([(grid.n, grid.N, grid.L, t)], dtype=HEADER_DTYPE)
	with atomic_writer(path, "wb", staging=staging) as stream:
		stream.write(STATE_MAGIC)
		stream.write(header.tobytes())
		stream.write(np.ascontiguousarray(theta.values, dtype="<f8").tobytes())
	return path


def read_final_state(path):
	"""(ScalarField, t) from a final_state.bin dump"""
	with open(path, "rb") as stream:
		payload = stream.read()
	if payload[:len(STATE_MAGIC)] != STATE_MAGIC:
		raise ArtifactError(f"{path} is not a final-state dump (bad magic)")
	offset = len(STATE_MAGIC)
	if len(payload) < offset + HEADER_DTYPE.itemsize:
		raise ArtifactError(f"{path} is truncated inside the header")
	header = np.frombuffer(payload, dtype=HEADER_DTYPE, count=1, offset=offset)[0]
	n, N, L, t = int(header["n"]), int(header["N"]), float(header["L"]), float(header["t"])
	offset += HEADER_DTYPE.itemsize
	expected = N ** n * 8
	if len(payload) - offset != expected:
		raise ArtifactError(f"{path} holds {len(payload) - offset} value bytes, expected {expected}")
	try:
		grid = make_grid(n, N, L)
	except ValueError as e:
		raise ArtifactError(f"{path} has an invalid grid header: {str(e)}")
	values = np.frombuffer(payload, dtype="<f8", offset=offset).reshape(grid.shape)
	return ScalarField(grid, values), t


def write_json(data, path, staging=None):
	with atomic_writer(path, staging=staging) as stream:
		json.dump(json_safe(data), stream, indent=2, sort_keys=True, allow_nan=False)
		stream.write("\n")
	return path


def json_safe(value):
	"""Plain JSON data with numpy scalars unwrapped and NaN or infinities replaced by None"""
	if isinstance(value, dict):
		return {key: json_safe(item) for key, item in value.items()}
	if isinstance(value, (list, tuple)):
		return [json_safe(item) for item in value]
	if isinstance(value, np.ndarray):
		return json_safe(value.tolist())
	if isinstance(value, (np.bool_, np.integer)):
		return value.item()
	if isinstance(value, (float, np.floating)):
		value = float(value)
		return value if math.isfinite(value) else None
	return value


def run_summary(config, result, extra=None):
	"""Plain-data summary of a finished run"""
	summary = {
		"schema_version": DIAGNOSTICS_SCHEMA_VERSION,
		"regime": config.model.regime.value,
		"termination": result.reason.value,
		"steps": result.final_state.step_count,
		"final_time": result.final_state.t,
		"wall_time": result.wall_time,
		"config": config.to_dict(),
	}
	summary.update(extra or {})
	return summary


def write_run_artifacts(config, result, directory, extra=None, staging=None):
	"""diagnostics.csv plus, as configured, final_state.bin and run_summary.json

	The files replace an earlier run's set together; pass ``staging`` to publish them along
	with further artifacts of the same command.
	"""
	prepare_output_dir(directory)
	with staged_artifacts() if staging is None else _joined(staging) as batch:
		paths = {"diagnostics": write_diagnostics_csv(result.frame, os.path.join(directory, DIAGNOSTICS_FILE), batch)}
		if config.output.final_state:
			state = result.final_state
			paths["final_state"] = write_final_state(state.theta, state.t, os.path.join(directory, FINAL_STATE_FILE), batch)
		if config.output.summary:
			paths["summary"] = write_json(run_summary(config, result, extra), os.path.join(directory, SUMMARY_FILE), batch)
	logger.info(f"Wrote run artifacts to {directory}")
	return paths


@contextmanager
def _joined(staging):
	yield staging
