"""Time evolution of the transport equation

	d_t theta + u . grad theta + kappa Lambda^gamma theta = 0,   u = grad Lambda^(2 alpha - 2) theta

by an integrating-factor SSP-RK2 scheme: the dissipation is applied exactly per mode,
the advection term is treated explicitly and pseudo-spectrally.
"""

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from tqdm import tqdm

from nonlocal_transport.exceptions import BlowUpSuspected, GridError, ParameterError
from nonlocal_transport.nonlocal_transport.diagnostics.diagnostics import DiagnosticsRecorder, records_to_frame
from nonlocal_transport.nonlocal_transport.nonlocal_operators.nonlocal_operators import (
	fractional_laplacian_multiplier,
	velocity,
	velocity_multiplier,
)
from nonlocal_transport.nonlocal_transport.spectral_core.spectral_core import (
	ScalarField,
	asymmetry_norm,
	derivative_multiplier,
	restrict,
	symmetrize,
	to_physical,
	to_spectral,
)

logger = logging.getLogger(__name__)

VELOCITY_FLOOR = 1e-30
LANDING_TOLERANCE = 1e-13


@dataclass(frozen=True)
class StepPolicy:
	"""Time-step control and the blow-up detectors"""

	cfl_safety: float = 0.5
	dt_max: float = 1e-2
	dt_min: float = 1e-9
	advection_on: bool = True
	dealias_on: bool = True
	grad_ceiling: float = 1e8

	def __post_init__(self):
		self.validate()

	def validate(self):
		if not 0 < self.cfl_safety <= 1:
			raise ParameterError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
		if not 0 < self.dt_min < self.dt_max:
			raise ParameterError(f"Need 0 < dt_min < dt_max, got dt_min={self.dt_min} dt_max={self.dt_max}")
		if not self.grad_ceiling > 0:
			raise ParameterError(f"grad_ceiling must be positive, got {self.grad_ceiling}")


@dataclass(frozen=True)
class SimState:
	theta: ScalarField
	t: float = 0.0
	step_count: int = 0
	bkm_integral: float = 0.0
	grad_sup: Optional[float] = field(default=None, compare=False)


class Termination(str, enum.Enum):
	COMPLETED = "Completed"
	BLOW_UP = "BlowUp"
	DT_FLOOR = "DtFloor"


@dataclass
class RunResult:
	trajectory: list
	final_state: SimState
	reason: Termination
	snapshots: dict = field(default_factory=dict)
	wall_time: float = 0.0

	@property
	def frame(self):
		return records_to_frame(self.trajectory)


def cfl_dt(u, grid, policy):
	"""min(dt_max, cfl_safety dx / max(||u||_sup, 1e-30))"""
	speed = max(u.sup_norm(), VELOCITY_FLOOR)
	return min(policy.dt_max, policy.cfl_safety * grid.dx / speed)


class Stepper:
	"""Precomputed symbols for one (grid, model, policy) combination"""

	def __init__(self, grid, params, policy):
		self.grid = grid
		self.params = params
		self.policy = policy
		self.symbol = params.kappa * fractional_laplacian_multiplier(grid, params.gamma)
		self.derivatives = [derivative_multiplier(grid, axis) for axis in range(grid.n)]
		self.velocities = [velocity_multiplier(grid, params.alpha, axis) for axis in range(grid.n)]
		self.mask = grid.dealias_mask if policy.dealias_on else None
		self._factor = (None, None)

	def factor(self, dt):
		"""exp(-kappa |k|^gamma dt), or None when there is no dissipation"""
		if self.params.kappa == 0:
			return None
		cached_dt, cached = self._factor
		if cached_dt != dt:
			cached = np.exp(-self.symbol * dt)
			self._factor = (dt, cached)
		return cached

	def tendency(self, coefficients):
		"""Spectrum of -u . grad theta, or None with advection switched off"""
		if not self.policy.advection_on:
			return None
		if self.mask is not None:
			coefficients = coefficients * self.mask
		advection = np.zeros(self.grid.shape)
		for velocity_symbol, derivative_symbol in zip(self.velocities, self.derivatives):
			u = to_physical(velocity_symbol * coefficients, self.grid)
			slope = to_physical(derivative_symbol * coefficients, self.grid)
			advection = advection + u * slope
		result = -to_spectral(advection, self.grid)
		if self.mask is not None:
			result = result * self.mask
		return result

	def gradient_sup(self, coefficients):
		squares = sum(to_physical(d * coefficients, self.grid) ** 2 for d in self.derivatives)
		return float(np.sqrt(np.max(squares)))

	def advance(self, coefficients, dt):
		"""One integrating-factor SSP-RK2 step in spectral space"""
		E = self.factor(dt)
		decay = (lambda c: c) if E is None else (lambda c: E * c)
		first = self.tendency(coefficients)
		if first is None:
			return decay(coefficients)
		stage = decay(coefficients + dt * first)
		return 0.5 * decay(coefficients) + 0.5 * (stage + dt * self.tendency(stage))


@lru_cache(maxsize=8)
def get_stepper(grid, params, policy):
	return Stepper(grid, params, policy)


def step(state, params, policy, dt):
	"""Advance ``state`` by dt; raises BlowUpSuspected when the result left the resolved regime"""
	if not dt > 0:
		raise ParameterError(f"Time step must be positive, got {dt}")
	grid = state.theta.grid
	stepper = get_stepper(grid, params, policy)
	coefficients = state.theta.spectrum
	grad_now = state.grad_sup if state.grad_sup is not None else stepper.gradient_sup(coefficients)
	values = to_physical(stepper.advance(coefficients, dt), grid)
	t_new = state.t + dt
	if not np.all(np.isfinite(values)):
		raise BlowUpSuspected(f"Non-finite values at t={t_new:.6g}", t=t_new)
	theta = ScalarField(grid, values)
	grad_new = stepper.gradient_sup(theta.spectrum)
	if not grad_new <= policy.grad_ceiling:
		raise BlowUpSuspected(f"sup |grad theta| = {grad_new:.6g} exceeds the ceiling at t={t_new:.6g}", t=t_new, grad_sup=grad_new)
	return SimState(theta, t_new, state.step_count + 1, state.bkm_integral + dt * grad_now, grad_new)


def _landed(t, target):
	return abs(target - t) <= LANDING_TOLERANCE * abs(target)


def _next_target(t, t_end, targets):
	upcoming = [s for s in targets if s > t and not _landed(t, s)]
	return min([t_end] + upcoming)


def run(config, observer=None, progress=False, theta0=None, snapshot_times=(), t_end=None):
	"""Integrate ``config`` until t_end, a blow-up detector fires, or the dt floor is hit

	``config`` provides model, grid, stepper, diagnostics, cadence, t_end and initial_field().
	Snapshot times are landed on exactly and their states returned in ``snapshots``.
	"""
	started = time.perf_counter()
	theta = theta0 if theta0 is not None else config.initial_field()
	t_end = config.t_end if t_end is None else t_end
	params = config.model
	policy = config.stepper
	state = SimState(theta)
	targets = sorted(float(s) for s in snapshot_times if 0 <= s <= t_end)
	snapshots = {0.0: theta} if targets and targets[0] == 0 else {}
	if t_end <= 0:
		return RunResult([], state, Termination.COMPLETED, snapshots, time.perf_counter() - started)
	grid = theta.grid
	recorder = DiagnosticsRecorder(config.diagnostics, params, grid)
	cadence = max(1, int(getattr(config, "cadence", 1)))
	trajectory = []

	def emit(current, dt_used):
		record = recorder.record(current, dt_used)
		trajectory.append(record)
		if observer is not None:
			observer(record)

	emit(state, 0.0)
	recorded_step = 0
	reason = Termination.COMPLETED
	dt_used = 0.0
	logger.info(f"Starting run: {params.regime.value} n={grid.n} N={grid.N} T_end={t_end:g}")
	with tqdm(total=t_end, disable=not progress, desc="simulate", unit="t") as bar:
		while t_end - state.t > LANDING_TOLERANCE * t_end:
			if policy.advection_on:
				dt = cfl_dt(velocity(state.theta, params.alpha), grid, policy)
			else:
				dt = policy.dt_max
			if dt < policy.dt_min:
				reason = Termination.DT_FLOOR
				logger.info(f"Time step {dt:.3g} fell below the floor at t={state.t:.6g}")
				break
			target = _next_target(state.t, t_end, targets)
			landing = dt >= target - state.t
			dt = min(dt, target - state.t)
			try:
				new_state = step(state, params, policy, dt)
			except BlowUpSuspected as e:
				reason = Termination.BLOW_UP
				logger.info(f"Blow-up suspected: {str(e)}")
				break
			if landing:
				new_state = replace(new_state, t=target)
			for s in targets:
				if s not in snapshots and _landed(new_state.t, s):
					snapshots[s] = new_state.theta
			bar.update(new_state.t - state.t)
			state = new_state
			dt_used = dt
			if state.step_count % cadence == 0:
				emit(state, dt_used)
				recorded_step = state.step_count
	if recorded_step != state.step_count:
		emit(state, dt_used)
	wall_time = time.perf_counter() - started
	logger.info(f"Run finished: {reason.value} at t={state.t:.6g} after {state.step_count} steps ({wall_time:.2f}s)")
	return RunResult(trajectory, state, reason, snapshots, wall_time)


def run_with_snapshots(config, times, **kwargs):
	"""run() landing exactly on ``times`` and returning the states there"""
	return run(config, snapshot_times=times, **kwargs)


def rescale_solution(theta, lam, alpha, gamma):
	"""lambda^(gamma - 2 alpha) theta(lambda x) on the same grid"""
	grid = theta.grid
	if not isinstance(lam, (int, np.integer)) or lam < 1:
		raise ParameterError(f"The dilation factor must be a positive integer, got {lam}")
	if grid.N % lam != 0:
		raise GridError(f"The dilation factor {lam} does not divide N={grid.N}")
	index = (lam * np.arange(grid.N)) % grid.N
	values = theta.values[np.ix_(*([index] * grid.n))]
	return ScalarField(grid, float(lam) ** (gamma - 2 * alpha) * values)


def relative_discrepancy(a, b):
	scale = max(a.sup_norm(), b.sup_norm())
	if scale == 0:
		return 0.0
	return float(np.max(np.abs(a.values - b.values)) / scale)


@dataclass
class ScalingReport:
	lam: int
	discrepancy: float
	times: list
	base: RunResult
	rescaled: RunResult


def scaling_discrepancy(config, lam, times=None):
	"""max over sample times of |theta_lambda(t) - lambda^a theta(lambda x, lambda^gamma t)| / sup

	The base problem runs to lambda^gamma T_end, the rescaled one to T_end.
	"""
	params = config.model
	theta0 = config.initial_field()
	rescaled0 = rescale_solution(theta0, lam, params.alpha, params.gamma)
	times = list(times) if times is not None else list(np.linspace(0, config.t_end, 5)[1:])
	stretch = float(lam) ** params.gamma
	base = run(config, theta0=theta0, snapshot_times=[stretch * t for t in times], t_end=stretch * config.t_end)
	rescaled = run(config, theta0=rescaled0, snapshot_times=times)
	worst = 0.0
	compared = 0
	for t in times:
		if stretch * t in base.snapshots and t in rescaled.snapshots:
			expected = rescale_solution(base.snapshots[stretch * t], lam, params.alpha, params.gamma)
			worst = max(worst, relative_discrepancy(rescaled.snapshots[t], expected))
			compared += 1
	if compared == 0:
		worst = math.inf
	logger.info(f"Scaling discrepancy for lambda={lam}: {worst:.3e} over {compared} sample time(s)")
	return ScalingReport(lam, worst, times, base, rescaled)


@dataclass
class SelfConvergenceReport:
	discrepancy: float
	coarse: RunResult
	fine: RunResult


def self_convergence(config, factor=2):
	"""Final-state difference between runs at N and factor N, on the coarse nodes"""
	coarse = run(config)
	fine = run(config.refined(factor))
	if coarse.final_state.t != fine.final_state.t:
		logger.warning(f"Self-convergence runs stopped at different times ({coarse.final_state.t:g}, {fine.final_state.t:g})")
	discrepancy = relative_discrepancy(coarse.final_state.theta, restrict(fine.final_state.theta, factor))
	return SelfConvergenceReport(discrepancy, coarse, fine)


__all__ = [
	"RunResult",
	"SimState",
	"StepPolicy",
	"Termination",
	"cfl_dt",
	"rescale_solution",
	"run",
	"run_with_snapshots",
	"scaling_discrepancy",
	"self_convergence",
	"step",
	"symmetrize",
	"asymmetry_norm",
]
