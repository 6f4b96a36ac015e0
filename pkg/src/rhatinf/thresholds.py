"""Cutoffs and p-values for the supremum diagnostic.

Two routes: an asymptotic one (the pointwise statistic, scaled by the local
effective sample size, is chi-square with m-1 degrees of freedom) and a
Monte Carlo one for the supremum, whose null distribution does not depend on
the chains' common law and is therefore simulated once with uniform chains.
A table of sorted null samples for common chain counts ships with the
package; anything off that grid is simulated on demand.
"""

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ._parallel import tmap
from .chains import ChainSet, _seed_seq
from .diagnostics import rhat_infinity
from .statdist import chi_square_quantile, gamma_p

__all__ = [
    "DEFAULT_SEED",
    "ThresholdSpec",
    "r_lim",
    "type1_error",
    "null_rinf_samples",
    "mc_null_quantile",
    "mc_pvalue",
    "mv_thresholds",
    "build_cache",
]

DEFAULT_SEED = 1234

_CACHE_MS = (2, 3, 4, 8, 10, 20)
_CACHE_ESS = 400.0
_CACHE_REPS = 2000
_CACHE_FILE = "null_rinf.npz"


@dataclass(frozen=True)
class ThresholdSpec:
    """Configuration of a Monte Carlo null calibration."""

    m: int
    d: int = 1
    alpha: float = 0.05
    target_ess: float = 400.0
    reps: int = 2000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("at least two chains required")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.reps < 100:
            raise ValueError("quantile estimation needs at least 100 replications")
        if self.target_ess <= 0.0:
            raise ValueError("target_ess must be positive")


def r_lim(m, alpha, ess):
    """Asymptotic pointwise cutoff sqrt(1 + q/ess), q the chi-square(m-1) quantile."""
    return math.sqrt(1.0 + chi_square_quantile(m - 1, 1.0 - alpha) / ess)


def type1_error(m, r_lim, ess):
    """False-alarm probability of the pointwise cutoff ``r_lim`` at a given ESS."""
    if r_lim < 1.0:
        raise ValueError("r_lim must be at least 1")
    return 1.0 - gamma_p(0.5 * (m - 1), 0.5 * ess * (r_lim * r_lim - 1.0))


def _null_rep(m, n, seed, rep):
    u = np.random.default_rng(_seed_seq(seed, rep)).random((m, n))
    return rhat_infinity(ChainSet(u))[0]


def null_rinf_samples(m, target_ess=400.0, reps=2000, seed=DEFAULT_SEED):
    """Sorted supremum-statistic samples under the null (m i.i.d. uniform chains).

    Chain length is round(target_ess / m): independent draws make the
    effective sample size equal to the draw count.  Each replication uses
    its own seed substream, so the result is reproducible and independent of
    any parallel scheduling.
    """
    n = int(round(target_ess / m))
    if n < 4:
        raise ValueError("target_ess too small: chains would have fewer than 4 draws")
    vals = np.array(tmap(lambda r: _null_rep(m, n, seed, r), range(reps)))
    vals.sort()
    return vals


def _load_cache():
    if _load_cache.cache is None:
        table = {}
        try:
            path = resources.files("rhatinf").joinpath("data").joinpath(_CACHE_FILE)
            with np.load(path.open("rb")) as z:
                ess, reps, seed = z["meta"]
                if ess == _CACHE_ESS and int(reps) == _CACHE_REPS and int(seed) == DEFAULT_SEED:
                    table = {m: z[f"m{m}"].copy() for m in _CACHE_MS if f"m{m}" in z}
        except (FileNotFoundError, KeyError):
            table = {}
        _load_cache.cache = table
    return _load_cache.cache


_load_cache.cache = None


def _samples_for(spec, recompute=False):
    cached = None if recompute else _load_cache().get(spec.m)
    if (
        cached is not None
        and spec.target_ess == _CACHE_ESS
        and spec.reps == _CACHE_REPS
        and spec.seed == DEFAULT_SEED
    ):
        return cached
    return null_rinf_samples(spec.m, spec.target_ess, spec.reps, spec.seed)


def _empirical_quantile(sorted_vals, level):
    """Lower inverse-CDF quantile (no interpolation)."""
    k = math.ceil(level * sorted_vals.size)
    k = min(max(k, 1), sorted_vals.size)
    return float(sorted_vals[k - 1])


def mc_null_quantile(spec, recompute=False):
    """(1-alpha) empirical quantile of the null supremum statistic.

    ``recompute`` forces a fresh simulation even when the packaged null
    table covers this configuration.
    """
    if spec.d != 1:
        raise ValueError("univariate quantile requires d=1; see mv_thresholds")
    return _empirical_quantile(_samples_for(spec, recompute), 1.0 - spec.alpha)


def mc_pvalue(observed, spec):
    """Add-one Monte Carlo tail probability of an observed supremum."""
    if observed < 1.0:
        raise ValueError("the supremum statistic is never below 1")
    samples = _samples_for(spec)
    exceed = int(np.count_nonzero(samples >= observed))
    return (1.0 + exceed) / (samples.size + 1.0)


def mv_thresholds(m, d, alpha, target_ess=400.0, reps=2000, seed=DEFAULT_SEED,
                  recompute=False):
    """Margin and dependence cutoffs for the two-step multivariate check.

    Both reuse the univariate null: the margin cutoff takes the quantile at
    level (alpha/2)/d (one test per coordinate), the dependence cutoff at
    level (alpha/2)/2^(d-1) (one test per canonical direction of the
    supremum-over-directions statistic).
    """
    if d < 2:
        raise ValueError("multivariate thresholds require d >= 2")
    spec = ThresholdSpec(m=m, alpha=alpha, target_ess=target_ess, reps=reps, seed=seed)
    samples = _samples_for(spec, recompute)
    margin = _empirical_quantile(samples, 1.0 - 0.5 * alpha / d)
    copula = _empirical_quantile(samples, 1.0 - 0.5 * alpha / 2 ** (d - 1))
    return margin, copula


def build_cache(path):
    """Regenerate the shipped null-sample table and write it to ``path``."""
    arrays = {
        f"m{m}": null_rinf_samples(m, _CACHE_ESS, _CACHE_REPS, DEFAULT_SEED)
        for m in _CACHE_MS
    }
    arrays["meta"] = np.array([_CACHE_ESS, _CACHE_REPS, DEFAULT_SEED], dtype=float)
    np.savez_compressed(path, **arrays)
    return path
