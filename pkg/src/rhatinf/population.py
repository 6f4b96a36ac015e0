"""Population-level oracles for the localized diagnostic.

Given the chains' true CDFs the localized statistic has an explicit form,
and for three benchmark families (scaled uniforms, Pareto with a shared
shape, and a uniform/Laplace pair) the supremum has a closed expression.
Everything else is maximized numerically on a quantile-spaced grid with
golden-section refinement around the best grid point.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import statdist
from .statdist import DistributionSpec

__all__ = [
    "PopulationModel",
    "population_local_r",
    "population_r_infinity",
    "uniform_r",
    "uniform_r_infinity",
    "pareto_r",
    "pareto_r_infinity",
    "laplace_uniform_r",
    "laplace_uniform_r_infinity",
]


@dataclass(frozen=True)
class PopulationModel:
    """The chains' stationary distributions, one spec per chain."""

    chain_dists: tuple

    def __post_init__(self):
        dists = tuple(self.chain_dists)
        if len(dists) < 2:
            raise ValueError("at least two chains required")
        if not all(isinstance(s, DistributionSpec) for s in dists):
            raise TypeError("chain_dists must hold DistributionSpec values")
        object.__setattr__(self, "chain_dists", dists)

    @property
    def m(self):
        return len(self.chain_dists)


def _as_model(model):
    if isinstance(model, PopulationModel):
        return model
    return PopulationModel(tuple(model))


def population_local_r(model, x):
    """Exact localized statistic from analytic CDFs (scalar or array x).

    Points where all CDFs are degenerate and equal extend to 1 by
    continuity; degenerate-but-unequal points (a gap between supports)
    evaluate to +inf, the true limit of the statistic there.
    """
    model = _as_model(model)
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    xs = np.atleast_1d(xs)
    freqs = np.stack([statdist.cdf(s, xs) for s in model.chain_dists])
    between = np.var(freqs, axis=0)
    within = np.mean(freqs * (1.0 - freqs), axis=0)
    out = np.ones_like(within)
    ok = within > 0.0
    out[ok] = np.sqrt(1.0 + between[ok] / within[ok])
    out[(~ok) & (between > 0.0)] = np.inf
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# closed forms


def uniform_r(x, sigma, sigma_m, m):
    """Localized statistic for m-1 chains U(-sigma, sigma) plus one U(-sigma_m, sigma_m)."""
    _check_uniform(sigma, sigma_m, m)
    if sigma == sigma_m:
        return 1.0
    ax = abs(float(x))
    if ax >= sigma_m:
        return 1.0
    if ax >= sigma:
        return math.sqrt(1.0 + (m - 1.0) / m * (1.0 - 2.0 / (1.0 + sigma_m / ax)))
    if ax == 0.0:
        return 1.0
    num = (1.0 / sigma - 1.0 / sigma_m) ** 2
    den = m * m / ((m - 1.0) * ax * ax) - m * (
        1.0 / sigma ** 2 + 1.0 / ((m - 1.0) * sigma_m ** 2)
    )
    return math.sqrt(1.0 + num / den)


def uniform_r_infinity(sigma, sigma_m, m):
    """Supremum of :func:`uniform_r`, attained at x = +-sigma."""
    _check_uniform(sigma, sigma_m, m)
    return math.sqrt(1.0 + (m - 1.0) / m * (1.0 - 2.0 / (1.0 + sigma_m / sigma)))


def _check_uniform(sigma, sigma_m, m):
    if not 0.0 < sigma <= sigma_m:
        raise ValueError("requires 0 < sigma <= sigma_m")
    if m < 2:
        raise ValueError("at least two chains required")


def pareto_r(x, alpha, eta, eta_m, m):
    """Localized statistic for m-1 chains Pareto(alpha, eta) plus one Pareto(alpha, eta_m)."""
    _check_pareto(alpha, eta, eta_m, m)
    x = float(x)
    if x <= eta or eta == eta_m:
        return 1.0
    if x <= eta_m:
        return math.sqrt(1.0 + ((x / eta) ** alpha - 1.0) / m)
    a, am = eta ** alpha, eta_m ** alpha
    num = (a - am) ** 2 / m
    den = (a + am / (m - 1.0)) * x ** alpha - (a * a + am * am / (m - 1.0))
    return math.sqrt(1.0 + num / den)


def pareto_r_infinity(alpha, eta, eta_m, m):
    """Supremum of :func:`pareto_r`, attained at x = eta_m."""
    _check_pareto(alpha, eta, eta_m, m)
    return math.sqrt(1.0 + ((eta_m / eta) ** alpha - 1.0) / m)


def _check_pareto(alpha, eta, eta_m, m):
    if alpha <= 0.0:
        raise ValueError("requires alpha > 0")
    if not 0.0 < eta <= eta_m:
        raise ValueError("requires 0 < eta <= eta_m")
    if m < 2:
        raise ValueError("at least two chains required")


def laplace_uniform_r(xnorm):
    """Two-chain statistic for U(-2, 2) against Laplace(0, 1), at x in Laplace-scale units.

    The pair is scale-free: a uniform chain on (-2s, 2s) against a Laplace
    chain of scale s evaluates to ``laplace_uniform_r(x / s)``.
    """
    ax = abs(float(xnorm))
    e = math.exp(-ax)
    if ax >= 2.0:
        return math.sqrt(1.0 + e / (2.0 * (2.0 - e)))
    num = 0.5 * (0.5 * ax - 1.0 + e) ** 2
    den = 1.0 - 0.25 * ax * ax + e * (2.0 - e)
    return math.sqrt(1.0 + num / den)


def laplace_uniform_r_infinity():
    """Supremum of :func:`laplace_uniform_r`, attained at the uniform endpoint |x| = 2."""
    return math.sqrt(1.0 + 1.0 / (2.0 * (2.0 * math.e ** 2 - 1.0)))


# ---------------------------------------------------------------------------
# generic maximization


def population_r_infinity(model, method="auto"):
    """Supremum of the localized statistic and its location.

    ``method="analytic"`` requires the model to match one of the closed
    forms; ``method="grid+refine"`` forces the numeric path: the statistic
    is evaluated on 10^4 mixture-quantile-spaced points and the best point
    is polished by golden-section search (the refined value is kept only if
    it improves on the grid value, since the statistic need not be unimodal
    globally).  ``"auto"`` dispatches to a closed form when one applies.
    """
    model = _as_model(model)
    if method not in ("auto", "analytic", "grid+refine"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "analytic"):
        hit = _closed_form(model)
        if hit is not None:
            return hit
        if method == "analytic":
            raise ValueError("no closed form known for this model")
    return _grid_r_infinity(model)


def _closed_form(model):
    specs = model.chain_dists
    m = model.m
    fams = [s.family for s in specs]
    if all(f == "uniform" for f in fams):
        centres = [0.5 * (s.params["a"] + s.params["b"]) for s in specs]
        if not _all_close(centres):
            return None
        halves = [0.5 * (s.params["b"] - s.params["a"]) for s in specs]
        split = _deviant_split(halves)
        if split is None:
            return None
        sigma, sigma_m = split
        if sigma_m < sigma:
            return None
        c = centres[0]
        return uniform_r_infinity(sigma, sigma_m, m), c - sigma
    if all(f == "pareto" for f in fams):
        alphas = [s.params["alpha"] for s in specs]
        if not _all_close(alphas):
            return None
        etas = [s.params["eta"] for s in specs]
        split = _deviant_split(etas)
        if split is None:
            return None
        eta, eta_m = split
        if eta_m < eta:
            return None
        return pareto_r_infinity(alphas[0], eta, eta_m, m), eta_m
    if m == 2 and sorted(fams) == ["laplace", "uniform"]:
        uni = specs[fams.index("uniform")]
        lap = specs[fams.index("laplace")]
        c = 0.5 * (uni.params["a"] + uni.params["b"])
        w = 0.5 * (uni.params["b"] - uni.params["a"])
        if not math.isclose(c, lap.params["mu"], rel_tol=1e-12, abs_tol=1e-12):
            return None
        if not math.isclose(w, 2.0 * lap.params["b"], rel_tol=1e-12, abs_tol=1e-12):
            return None
        return laplace_uniform_r_infinity(), c - w
    return None


def _all_close(vals):
    return all(math.isclose(v, vals[0], rel_tol=1e-12, abs_tol=1e-12) for v in vals)


def _deviant_split(vals):
    """Split (m-1 equal values, one deviant) -> (common, deviant); None otherwise."""
    if _all_close(vals):
        return vals[0], vals[0]
    if len(vals) == 2:
        # Both orderings are valid splits; the closed forms assume the wider
        # chain is the deviant, and with one chain each the roles commute.
        return min(vals), max(vals)
    for i, v in enumerate(vals):
        rest = vals[:i] + vals[i + 1 :]
        if _all_close(rest) and not math.isclose(v, rest[0], rel_tol=1e-12, abs_tol=1e-12):
            return rest[0], v
    return None


_GRID_LEVELS = 10_000


def _grid_r_infinity(model):
    specs = model.chain_dists
    supports = [statdist.support(s) for s in specs]
    common_lo = max(lo for lo, _ in supports)
    common_hi = min(hi for _, hi in supports)
    if not common_lo < common_hi:
        raise ValueError("R-infinity infinite/undefined: chain supports do not overlap")
    ps = np.linspace(1e-8, 1.0 - 1e-8, _GRID_LEVELS)
    qs = np.stack([statdist.quantile(s, ps) for s in specs])
    xs = _mixture_quantile(specs, ps, qs.min(axis=0), qs.max(axis=0))
    xs = np.unique(xs)
    vals = population_local_r(model, xs)
    finite = np.isfinite(vals)
    if not finite.all():
        if not finite.any():
            raise ValueError("R-infinity infinite/undefined: chain supports do not overlap")
        warnings.warn(
            "chain supports overlap only partially; reporting the supremum over the overlap",
            RuntimeWarning,
            stacklevel=2,
        )
        vals = np.where(finite, vals, -np.inf)
    i = int(np.argmax(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, xs.size - 1)])
    if hi > lo:
        x_ref, v_ref = _golden_max(lambda t: population_local_r(model, t), lo, hi)
        if np.isfinite(v_ref) and v_ref > best_v:
            best_x, best_v = x_ref, v_ref
    return best_v, best_x


def _mixture_quantile(specs, ps, lo, hi):
    """Solve mean_j F_j(x) = p for each p by monotone bisection."""
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        mix = np.mean([statdist.cdf(s, mid) for s in specs], axis=0)
        take_hi = mix >= ps
        hi = np.where(take_hi, mid, hi)
        lo = np.where(take_hi, lo, mid)
        if float(np.max(hi - lo)) <= 1e-12 * max(1.0, float(np.max(np.abs(mid)))):
            break
    return 0.5 * (lo + hi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_max(f, a, b, xtol=1e-10):
    """Golden-section maximization of a unimodal scalar function on [a, b]."""
    h = b - a
    c, d = a + _INVPHI2 * h, a + _INVPHI * h
    fc, fd = f(c), f(d)
    while h > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)
