"""Seeded corpora of smooth compactly supported radial profiles and the sweeps over them."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from nonlocal_transport.nonlocal_transport.blowup_lab.blowup_lab import (
	RadialProfile,
	weighted_dissipation_check,
	weighted_nonlinear_check,
)

logger = logging.getLogger(__name__)

CORPUS_COLUMNS = [
	"profile_id",
	"check",
	"parameter",
	"lhs",
	"rhs",
	"ratio",
	"error_estimate",
	"sup_norm",
	"degenerate",
	"periodization_flag",
]
FIT_MARGIN = 1.01


@dataclass(frozen=True)
class BumpMixture:
	"""Sum of smooth bumps a_i exp(1 - 1/(1 - (r/R_i)^2)) supported in r < R_i"""

	amplitudes: tuple
	radii: tuple

	@property
	def support_radius(self):
		return max(self.radii) if self.radii else 1.0

	def __call__(self, r):
		r = np.asarray(r, dtype=float)
		total = np.zeros(r.shape)
		for amplitude, radius in zip(self.amplitudes, self.radii):
			s2 = (r / radius) ** 2
			inside = s2 < 1
			with np.errstate(divide="ignore", over="ignore"):
				bump = np.exp(1 - 1 / np.where(inside, 1 - s2, 1.0))
			total = total + amplitude * np.where(inside, bump, 0.0)
		return total


class NonlinearBoundConstants(NamedTuple):
	"""Empirical constants with lhs + c_double_prime ||f||^2 >= c_prime rhs on the corpus"""

	c_prime: float
	c_double_prime: float
	violations: int


def random_radial_corpus(size, seed, n=2, max_terms=3):
	"""``size`` seeded bump-mixture profiles with supports between 0.8 and 3"""
	if size < 1:
		raise ValueError(f"Corpus size must be at least 1, got {size}")
	rng = np.random.default_rng(seed)
	profiles = []
	for _ in range(size):
		terms = int(rng.integers(1, max_terms + 1))
		amplitudes = tuple(float(a) for a in rng.uniform(-1.0, 1.0, terms))
		radii = tuple(float(r) for r in rng.uniform(0.8, 3.0, terms))
		mixture = BumpMixture(amplitudes, radii)
		profiles.append(RadialProfile.from_function(n, mixture, support_radius=mixture.support_radius))
	logger.info(f"Generated radial corpus of {size} profiles (seed {seed})")
	return profiles


def zero_profile(n=2):
	return RadialProfile.from_function(n, BumpMixture((), ()), support_radius=1.0)


def _evaluate_item(item):
	profile_id, profile, check, parameter = item
	if check == "nonlinear":
		report = weighted_nonlinear_check(profile, parameter)
	else:
		report = weighted_dissipation_check(profile, parameter)
	return {
		"profile_id": profile_id,
		"check": check,
		"parameter": parameter,
		"lhs": report.lhs_value,
		"rhs": report.rhs_value,
		"ratio": report.ratio,
		"error_estimate": report.quadrature_error_estimate,
		"sup_norm": profile.sup_norm(),
		"degenerate": report.degenerate,
		"periodization_flag": report.periodization_flag,
	}


def evaluate_corpus(profiles, alphas=(), gammas=(), workers=1, progress=False):
	"""One row per (profile, parameter) for both weighted checks, in deterministic order"""
	items = [(i, p, "nonlinear", float(a)) for a in alphas for i, p in enumerate(profiles)]
	items += [(i, p, "dissipation", float(g)) for g in gammas for i, p in enumerate(profiles)]
	if workers > 1:
		with ProcessPoolExecutor(max_workers=workers) as executor:
			rows = list(tqdm(executor.map(_evaluate_item, items, chunksize=4), total=len(items), disable=not progress))
	else:
		rows = [_evaluate_item(item) for item in tqdm(items, disable=not progress, desc="corpus")]
	return pd.DataFrame(rows, columns=CORPUS_COLUMNS)


def fit_nonlinear_constants(frame):
	"""C' = half the median positive ratio; C'' the smallest shift closing every gap, padded"""
	rows = frame[(frame["check"] == "nonlinear") & ~frame["degenerate"]]
	ratios = rows["ratio"].to_numpy()
	positive = ratios[ratios > 0]
	c_prime = 0.5 * float(np.median(positive)) if positive.size else 0.0
	gaps = c_prime * rows["rhs"].to_numpy() - rows["lhs"].to_numpy()
	sup2 = rows["sup_norm"].to_numpy() ** 2
	needed = np.where(sup2 > 0, np.maximum(gaps, 0.0) / np.where(sup2 > 0, sup2, 1.0), 0.0)
	c_double_prime = FIT_MARGIN * float(np.max(needed)) if needed.size else 0.0
	slack = rows["lhs"].to_numpy() + c_double_prime * sup2 - c_prime * rows["rhs"].to_numpy()
	violations = int(np.sum(slack < 0))
	logger.info(f"Fitted empirical constants C'={c_prime:.6g} C''={c_double_prime:.6g} ({violations} violations)")
	return NonlinearBoundConstants(c_prime, c_double_prime, violations)


def max_ratio_drift(frame, check="dissipation"):
	"""Relative change of the maximum ratio between the first half of the corpus and all of it"""
	rows = frame[(frame["check"] == check) & ~frame["degenerate"]]
	if rows.empty:
		return 0.0
	half = rows["profile_id"].max() // 2 + 1
	full = float(rows["ratio"].max())
	first = float(rows[rows["profile_id"] < half]["ratio"].max())
	if full == 0 or math.isnan(first):
		return 0.0
	return abs(full - first) / abs(full)


def summarize_corpus(frame):
	"""Per-check maxima and counts, with degenerate rows left out of the statistics"""
	summary = {}
	for (check, parameter), rows in frame.groupby(["check", "parameter"], sort=True):
		valid = rows[~rows["degenerate"]]
		summary[f"{check}:{parameter:g}"] = {
			"rows": int(len(rows)),
			"degenerate": int(rows["degenerate"].sum()),
			"flagged": int(rows["periodization_flag"].sum()),
			"max_ratio": float(valid["ratio"].max()) if not valid.empty else None,
			"min_ratio": float(valid["ratio"].min()) if not valid.empty else None,
		}
	summary["dissipation_drift"] = max_ratio_drift(frame, "dissipation")
	if (frame["check"] == "nonlinear").any():
		summary["nonlinear_constants"] = fit_nonlinear_constants(frame)._asdict()
	return summary
