"""Replication harness for the built-in experiment designs.

Six designs exercise the diagnostics from easy to adversarial:

1. three uniform chains on (-0.75, 0.75) and one on (-1, 1); m=4, n=200
2. three Pareto(0.8, 1) chains and one Pareto(0.8, 1.5); m=4, n=200
3. three Exp(1) chains and one uniform on (1-2log2, 1+2log2) — equal mean
   and mean-over-median, silent for rank statistics; m=4, n=200
4. two bivariate Gaussian chains, identity vs. 0.9-correlation — identical
   margins, different dependence; m=2, n=200
5. two d-variate Gaussian chains, identity vs. a fresh random unit-diagonal
   covariance every replication; m=2, n=200
6. four Gaussian AR(1) chains, rho=0.5, innovation scales (1, 1, 1, 2);
   m=4, n=500

Each replication draws fresh chains from an independent seed substream and
records the classical split statistic, the rank statistic and the quantile
supremum (per-margin suprema and the directional maximum for the
multivariate designs).
"""

import math
from dataclasses import dataclass

from .chains import _seed_seq, generate_ar1, generate_iid, generate_mvn, random_unitdiag_covariance
from .diagnostics import rank_rhat, rhat_infinity, trad_split_rhat
from .multivariate import rhat_max_infinity
from .statdist import exponential, pareto, uniform
from .thresholds import DEFAULT_SEED
from ._parallel import tmap

__all__ = ["EXAMPLE_IDS", "DEFAULT_REPS", "SimulationResult", "run_experiment", "run_custom"]

EXAMPLE_IDS = (1, 2, 3, 4, 5, 6)
DEFAULT_REPS = {1: 500, 2: 500, 3: 500, 4: 100, 5: 200, 6: 50}

_LOG2 = math.log(2.0)


def _example_chainset(example, rep, seed, d):
    sub = _seed_seq(seed, rep)
    if example == 1:
        specs = [uniform(-0.75, 0.75)] * 3 + [uniform(-1.0, 1.0)]
        return generate_iid(specs, 200, sub)
    if example == 2:
        specs = [pareto(0.8, 1.0)] * 3 + [pareto(0.8, 1.5)]
        return generate_iid(specs, 200, sub)
    if example == 3:
        specs = [exponential(1.0)] * 3 + [uniform(1.0 - 2.0 * _LOG2, 1.0 + 2.0 * _LOG2)]
        return generate_iid(specs, 200, sub)
    if example == 4:
        covs = [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.9], [0.9, 1.0]]]
        return generate_mvn(covs, 200, sub)
    if example == 5:
        eye = [[1.0 if i == j else 0.0 for j in range(d)] for i in range(d)]
        cov = random_unitdiag_covariance(d, _seed_seq(seed, rep, 1))
        return generate_mvn([eye, cov], 200, sub)
    if example == 6:
        return generate_ar1(0.5, (1.0, 1.0, 1.0, 2.0), 500, sub)
    raise ValueError(f"unknown example {example!r}; choose from {EXAMPLE_IDS}")


def _univariate_stats(cs):
    return {
        "split_rhat": trad_split_rhat(cs),
        "rank_rhat": rank_rhat(cs)[2],
        "rhat_inf": rhat_infinity(cs)[0],
    }


def _multivariate_stats(cs):
    out = {}
    for p in range(cs.d):
        out[f"rhat_inf_margin{p + 1}"] = rhat_infinity(cs.coordinate(p))[0]
    out["rhat_inf_max"] = rhat_max_infinity(cs)[0]
    return out


@dataclass
class SimulationResult:
    """Per-replication statistic values of one simulated experiment."""

    name: str
    reps: int
    seed: int
    stat_names: tuple
    values: dict

    def to_rows(self):
        """Long-format rows (rep, stat, value), replication-major."""
        return [
            (rep, stat, float(self.values[stat][rep]))
            for rep in range(self.reps)
            for stat in self.stat_names
        ]

    def fraction_above(self, stat, cutoff):
        vals = self.values[stat]
        return sum(1 for v in vals if v > cutoff) / len(vals)


def _collect(name, reps, seed, make_cs, stats_fn):
    dicts = tmap(lambda rep: stats_fn(make_cs(rep)), range(reps))
    stat_names = tuple(dicts[0])
    values = {s: [row[s] for row in dicts] for s in stat_names}
    return SimulationResult(name=name, reps=reps, seed=seed,
                            stat_names=stat_names, values=values)


def run_experiment(example, reps=None, seed=DEFAULT_SEED, d=2):
    """Run one built-in design; ``d`` only applies to example 5."""
    example = int(example)
    if example not in EXAMPLE_IDS:
        raise ValueError(f"unknown example {example!r}; choose from {EXAMPLE_IDS}")
    if example == 5 and d < 2:
        raise ValueError("example 5 needs d >= 2")
    if reps is None:
        reps = DEFAULT_REPS[example]
    stats_fn = _multivariate_stats if example in (4, 5) else _univariate_stats
    return _collect(
        f"example{example}",
        reps,
        seed,
        lambda rep: _example_chainset(example, rep, seed, d),
        stats_fn,
    )


def run_custom(specs, n, reps, seed=DEFAULT_SEED):
    """Replications of univariate i.i.d. chains, one distribution per chain."""
    specs = list(specs)
    return _collect(
        "custom",
        reps,
        seed,
        lambda rep: generate_iid(specs, n, _seed_seq(seed, rep)),
        _univariate_stats,
    )
