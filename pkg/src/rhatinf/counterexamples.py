"""Constructions where rank-based diagnostics stay silent.

Two generalized Pareto distributions can share both their mean and their
mean above the median while remaining different distributions.  Chains
drawn one-per-spec from such a pair defeat diagnostics built on pooled
ranks, yet the quantile supremum still separates them; the solver here
produces matched pairs and ``demo_false_negative`` measures the detection
rates side by side.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import statdist
from .chains import ChainSet, _seed_seq
from .diagnostics import rank_rhat, rhat_infinity, trad_split_rhat
from .statdist import DistributionSpec, gpd
from .thresholds import DEFAULT_SEED, ThresholdSpec, mc_null_quantile
from ._parallel import tmap

__all__ = ["GpdPair", "f_xi", "solve_counterexample", "demo_false_negative"]

_XI_MARGIN = 1e-6
_LOG2 = math.log(2.0)


def f_xi(xi):
    """(2^xi - 1)/(xi(1-xi)), continued through xi = 0 where the value is log 2.

    This is the gap between a generalized Pareto's mean above its median and
    its overall mean, in units of sigma.
    """
    xi = float(xi)
    if xi >= 1.0 - _XI_MARGIN:
        raise ValueError("requires xi < 1 (the mean diverges at xi = 1)")
    if abs(xi) < 1e-8:
        return _LOG2 + xi * (_LOG2 + 0.5 * _LOG2 * _LOG2)
    return (2.0 ** xi - 1.0) / (xi * (1.0 - xi))


def _gpd_mean(spec):
    p = spec.params
    return p["mu"] + p["sigma"] / (1.0 - p["xi"])


def _gpd_mean_over_median(spec):
    # E[X | X > median] = mean + sigma * f(xi): the excess above any level t
    # is again generalized Pareto with scale sigma + xi*(t - mu).
    p = spec.params
    return _gpd_mean(spec) + p["sigma"] * f_xi(p["xi"])


@dataclass(frozen=True)
class GpdPair:
    """Two generalized Pareto laws with equal mean and equal mean-over-median."""

    spec1: DistributionSpec
    spec2: DistributionSpec
    lam: float

    def __post_init__(self):
        for spec in (self.spec1, self.spec2):
            if spec.family != "gpd":
                raise ValueError("both specs must be generalized Pareto")
            if spec.params["xi"] >= 1.0 - _XI_MARGIN:
                raise ValueError("requires xi < 1 (finite means)")
        if not abs(_gpd_mean(self.spec1) - _gpd_mean(self.spec2)) <= 1e-10:
            raise ValueError("means do not match")
        gap = _gpd_mean_over_median(self.spec1) - _gpd_mean_over_median(self.spec2)
        if not abs(gap) <= 1e-10:
            raise ValueError("means over the median do not match")

    @property
    def mean(self):
        return _gpd_mean(self.spec1)

    @property
    def mean_over_median(self):
        return _gpd_mean_over_median(self.spec1)


def solve_counterexample(xi1, xi2, sigma1, mu1):
    """Second generalized Pareto matching gpd(mu1, sigma1, xi1) on both moments.

    With lam = f(xi1)/f(xi2): sigma2 = lam*sigma1 equalizes the mean-over-
    median gaps, then mu2 = mu1 - sigma1*(lam/(1-xi2) - 1/(1-xi1)) equalizes
    the means.
    """
    xi1, xi2, sigma1, mu1 = float(xi1), float(xi2), float(sigma1), float(mu1)
    if xi1 == xi2:
        raise ValueError("xi1 and xi2 must differ (equal shapes give the same law)")
    if sigma1 <= 0.0:
        raise ValueError("sigma1 must be positive")
    lam = f_xi(xi1) / f_xi(xi2)
    if lam <= 0.0:
        raise ValueError("f(xi1)/f(xi2) must be positive for a valid scale")
    sigma2 = lam * sigma1
    mu2 = mu1 - sigma1 * (lam / (1.0 - xi2) - 1.0 / (1.0 - xi1))
    return GpdPair(gpd(mu1, sigma1, xi1), gpd(mu2, sigma2, xi2), lam)


def _pair_specs(pair):
    if isinstance(pair, GpdPair):
        return pair.spec1, pair.spec2
    spec1, spec2 = pair
    return spec1, spec2


def _detection_rep(args):
    spec1, spec2, m, n, seed, rep = args
    draws = np.empty((m, n))
    for j in range(m):
        rng = np.random.default_rng(_seed_seq(seed, rep, j))
        spec = spec1 if j < m - 1 else spec2
        draws[j] = statdist.quantile(spec, rng.random(n))
    cs = ChainSet(draws)
    return (
        trad_split_rhat(cs),
        rank_rhat(cs)[2],
        rhat_infinity(cs)[0],
    )


def demo_false_negative(pair, m=4, n=200, reps=500, seed=DEFAULT_SEED):
    """Detection rates of split, rank and quantile-supremum statistics.

    Each replication draws m-1 chains from the first spec and one from the
    second.  Split and rank statistics are compared against the customary
    1.01; the supremum against a simulated null quantile calibrated to the
    same m and total draw count (alpha = 0.05, 500 null replications).
    Returns the per-replication values and the exceedance fractions without
    casting a verdict.
    """
    if m < 2:
        raise ValueError("at least two chains required")
    spec1, spec2 = _pair_specs(pair)
    threshold = mc_null_quantile(
        ThresholdSpec(m=m, alpha=0.05, target_ess=float(m * n), reps=500,
                      seed=_seed_seq(seed, 1))
    )
    rows = tmap(
        _detection_rep,
        [(spec1, spec2, m, n, _seed_seq(seed, 0), rep) for rep in range(reps)],
    )
    split_vals = np.array([r[0] for r in rows])
    rank_vals = np.array([r[1] for r in rows])
    rinf_vals = np.array([r[2] for r in rows])
    return {
        "m": m,
        "n": n,
        "reps": reps,
        "threshold_rhat_inf": float(threshold),
        "split_rhat": split_vals,
        "rank_rhat": rank_vals,
        "rhat_inf": rinf_vals,
        "detect_split_rhat": float(np.mean(split_vals > 1.01)),
        "detect_rank_rhat": float(np.mean(rank_vals > 1.01)),
        "detect_rhat_inf": float(np.mean(rinf_vals > threshold)),
    }
