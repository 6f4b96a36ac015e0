"""Orthant-indicator diagnostics for d-variate chains and copula-level bounds.

The univariate statistic generalizes by replacing 1{theta <= x} with a
directional orthant indicator (each coordinate compared either <= or >=).
Scanning both the thresholds and the 2^(d-1) canonical directions yields a
dependence-sensitive supremum; closed-form bounds for specific copula pairs
put its population value in context.

Diagnosis runs in two steps: the univariate supremum per margin (Bonferroni
over d tests at half the error budget), then the directional supremum for
the dependence structure (Bonferroni over the canonical directions at the
other half).
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .diagnostics import rhat_infinity
from .thresholds import DEFAULT_SEED, mv_thresholds

__all__ = [
    "Direction",
    "canonical_directions",
    "all_directions",
    "MvReport",
    "mv_local_rhat",
    "mv_rhat_infinity",
    "rhat_max_infinity",
    "two_step_diagnosis",
    "RULE_OF_THUMB_THRESHOLDS",
    "rule_of_thumb_thresholds",
    "frechet_r_infinity_bound",
    "pairwise_bound",
    "plod_bound",
    "nlod_bound",
    "Copula",
    "independence_copula",
    "upper_frechet_copula",
    "lower_frechet_bound",
    "gaussian_copula",
    "copula_population_r_infinity",
]


@dataclass(frozen=True)
class Direction:
    """Comparison signs of an orthant indicator, one of 'le'/'ge' per coordinate."""

    signs: tuple

    def __post_init__(self):
        signs = tuple(self.signs)
        if not signs or any(s not in ("le", "ge") for s in signs):
            raise ValueError("signs must be a nonempty tuple over {'le', 'ge'}")
        object.__setattr__(self, "signs", signs)

    @property
    def d(self):
        return len(self.signs)

    def flip(self, p):
        """Direction with coordinate ``p`` (0-based) reversed."""
        signs = list(self.signs)
        signs[p] = "ge" if signs[p] == "le" else "le"
        return Direction(tuple(signs))


def canonical_directions(d):
    """The 2^(d-1) directions with the first coordinate fixed to 'le'."""
    return [
        Direction(("le",) + rest)
        for rest in itertools.product(("le", "ge"), repeat=d - 1)
    ]


def all_directions(d):
    """All 2^d orthant directions."""
    return [Direction(s) for s in itertools.product(("le", "ge"), repeat=d)]


def _rhat_field(freq_stack):
    between = np.var(freq_stack, axis=0)
    within = np.mean(freq_stack * (1.0 - freq_stack), axis=0)
    out = np.ones_like(within)
    ok = within > 0.0
    out[ok] = np.sqrt(1.0 + between[ok] / within[ok])
    bad = (~ok) & (between > 0.0)
    out[bad] = np.inf
    return out, bool(np.any(bad))


def mv_local_rhat(cs, x, direction):
    """Scale-reduction statistic of the orthant indicator at threshold vector x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (cs.d,) or direction.d != cs.d:
        raise ValueError("threshold vector and direction must have length d")
    ind = np.ones((cs.m, cs.n), dtype=bool)
    for p, s in enumerate(direction.signs):
        col = cs.draws[:, :, p]
        ind &= (col <= x[p]) if s == "le" else (col >= x[p])
    freqs = ind.mean(axis=1)
    value, bad = _rhat_field(freqs[:, np.newaxis])
    if bad:
        warnings.warn(f"disjoint supports at x={x.tolist()}", RuntimeWarning, stacklevel=2)
    return float(value[0])


def _axis_grids(cs, grid):
    """Per-coordinate threshold grids.

    Defaults to the unique pooled values per coordinate, subsampled to keep
    the full lattice within a total budget (10^6 points unless ``grid`` is
    an integer budget; a list of arrays fixes the grids directly).  The
    subsampled index set is symmetric (k and N-1-k together) so that
    negating a coordinate maps the grid onto itself exactly.
    """
    if isinstance(grid, (list, tuple)):
        if len(grid) != cs.d:
            raise ValueError("expected one grid per coordinate")
        return [np.unique(np.asarray(g, dtype=float)) for g in grid]
    budget = 10 ** 6 if grid is None else int(grid)
    if budget < 2 ** cs.d:
        raise ValueError("grid budget too small")
    per_axis = max(2, int(round(budget ** (1.0 / cs.d))))
    while (per_axis + 1) ** cs.d <= budget:
        per_axis += 1
    while per_axis ** cs.d > budget and per_axis > 2:
        per_axis -= 1
    grids = []
    for p in range(cs.d):
        vals = np.unique(cs.draws[:, :, p])
        if vals.size <= per_axis:
            grids.append(vals)
            continue
        base = max(2, per_axis // 2)
        idx = np.round(np.linspace(0, vals.size - 1, base)).astype(int)
        idx = np.unique(np.concatenate([idx, vals.size - 1 - idx]))
        grids.append(vals[idx])
    return grids


def _orthant_freqs(cs, grids, direction):
    """Per-chain orthant frequencies on the full threshold lattice.

    For every chain the draws are binned once per coordinate; prefix sums
    give counts of draws <= v, suffix sums counts of draws >= v, per the
    direction's sign on that axis.  Counting stays in integers, so results
    are exact and independent of evaluation order.
    """
    shape = tuple(len(g) + 1 for g in grids)
    total = int(np.prod(shape))
    freqs = np.empty((cs.m,) + tuple(len(g) for g in grids))
    for j in range(cs.m):
        flat = np.zeros(cs.n, dtype=np.int64)
        for p, g in enumerate(grids):
            side = "left" if direction.signs[p] == "le" else "right"
            digit = np.searchsorted(g, cs.draws[j, :, p], side=side)
            flat = flat * shape[p] + digit
        counts = np.bincount(flat, minlength=total).reshape(shape)
        for p, s in enumerate(direction.signs):
            if s == "le":
                counts = np.cumsum(counts, axis=p)
            else:
                counts = np.flip(np.cumsum(np.flip(counts, axis=p), axis=p), axis=p)
        sl = tuple(
            slice(0, len(g)) if s == "le" else slice(1, len(g) + 1)
            for g, s in zip(grids, direction.signs)
        )
        freqs[j] = counts[sl] / cs.n
    return freqs


def mv_rhat_infinity(cs, direction=None, grid=None):
    """Supremum of the directional statistic over the threshold lattice.

    For d >= 2 the lattice subsampling makes this a lower bound of the
    supremum over all of R^d; for d = 1 with the full default grid it is
    exact.
    """
    if direction is None:
        direction = Direction(("le",) * cs.d)
    if direction.d != cs.d:
        raise ValueError("direction length must equal d")
    grids = _axis_grids(cs, grid)
    freqs = _orthant_freqs(cs, grids, direction)
    values, bad = _rhat_field(freqs)
    if bad:
        warnings.warn("disjoint supports on the threshold lattice", RuntimeWarning, stacklevel=2)
    return float(values.max())


def rhat_max_infinity(cs, grid=None, full_directions=False, d_cap=12):
    """Largest directional supremum and the direction attaining it.

    Scans the 2^(d-1) canonical directions (first coordinate 'le'), or all
    2^d when ``full_directions`` is set.  Ties resolve to the first
    direction in enumeration order.
    """
    if cs.d > d_cap:
        raise ValueError(
            f"d={cs.d} exceeds the direction cap ({d_cap}); for high-dimensional "
            "targets diagnose a scalar summary series (e.g. the log-posterior) "
            "with the univariate tools instead"
        )
    dirs = all_directions(cs.d) if full_directions else canonical_directions(cs.d)
    grids = _axis_grids(cs, grid)
    best_value, best_dir = -math.inf, None
    bad_any = False
    for direction in dirs:
        freqs = _orthant_freqs(cs, grids, direction)
        values, bad = _rhat_field(freqs)
        bad_any = bad_any or bad
        value = float(values.max())
        if value > best_value:
            best_value, best_dir = value, direction
    if bad_any:
        warnings.warn("disjoint supports on the threshold lattice", RuntimeWarning, stacklevel=2)
    return best_value, best_dir


RULE_OF_THUMB_THRESHOLDS = {4: (1.03, 1.03), 8: (1.04, 1.05)}


def rule_of_thumb_thresholds(m):
    """Preset (margin, dependence) cutoffs at the 5% level for m in {4, 8}."""
    try:
        return RULE_OF_THUMB_THRESHOLDS[m]
    except KeyError:
        raise ValueError(f"no preset for m={m}; compute cutoffs with mv_thresholds") from None


@dataclass
class MvReport:
    """Two-step multivariate diagnosis: margins first, dependence second."""

    margin_rhat_inf: list
    margin_threshold: float
    copula_rhat_max_inf: float
    copula_threshold: float
    best_direction: Optional[Direction]
    stage1_verdict: str
    stage2_verdict: str
    verdict: str

    def __post_init__(self):
        both = self.stage1_verdict == "converged" and self.stage2_verdict == "converged"
        if (self.verdict == "converged") != both:
            raise ValueError("overall verdict must require both stages to pass")

    def to_dict(self):
        return {
            "margin_rhat_inf": [float(v) for v in self.margin_rhat_inf],
            "margin_threshold": self.margin_threshold,
            "copula_rhat_max_inf": self.copula_rhat_max_inf,
            "copula_threshold": self.copula_threshold,
            "best_direction": None if self.best_direction is None else list(self.best_direction.signs),
            "stage1_verdict": self.stage1_verdict,
            "stage2_verdict": self.stage2_verdict,
            "verdict": self.verdict,
        }


def two_step_diagnosis(cs, alpha=0.05, thresholds=None, grid=None,
                       target_ess=400.0, reps=2000, seed=DEFAULT_SEED):
    """Margins-then-dependence convergence check for a d-variate ChainSet.

    Half the error budget goes to the margins (Bonferroni over the d
    univariate suprema), half to the dependence check (the directional
    supremum against its Bonferroni cutoff).  ``thresholds`` overrides the
    simulated pair (margin_lim, copula_lim); the presets in
    ``RULE_OF_THUMB_THRESHOLDS`` are common manual choices.
    """
    if cs.d < 2:
        raise ValueError("two-step diagnosis requires d >= 2")
    if thresholds is None:
        margin_lim, copula_lim = mv_thresholds(
            cs.m, cs.d, alpha, target_ess=target_ess, reps=reps, seed=seed
        )
    else:
        margin_lim, copula_lim = thresholds
    margins = [rhat_infinity(cs.coordinate(p))[0] for p in range(cs.d)]
    copula_stat, best_dir = rhat_max_infinity(cs, grid=grid)
    stage1 = "converged" if all(r < margin_lim for r in margins) else "not_converged"
    stage2 = "converged" if copula_stat < copula_lim else "not_converged"
    overall = "converged" if (stage1 == "converged" and stage2 == "converged") else "not_converged"
    return MvReport(
        margin_rhat_inf=margins,
        margin_threshold=float(margin_lim),
        copula_rhat_max_inf=float(copula_stat),
        copula_threshold=float(copula_lim),
        best_direction=best_dir,
        stage1_verdict=stage1,
        stage2_verdict=stage2,
        verdict=overall,
    )


# ---------------------------------------------------------------------------
# population bounds for copula pairs (two chains)


def frechet_r_infinity_bound(d):
    """Largest possible supremum for any two d-variate copulas: sqrt((d+1)/2)."""
    if d < 1:
        raise ValueError("d must be at least 1")
    return math.sqrt((d + 1.0) / 2.0)


def pairwise_bound(m, d):
    """Bound for m chains from pairwise copula distances: sqrt(1+(m-1)(d-1)/2)."""
    if m < 2 or d < 1:
        raise ValueError("requires m >= 2 and d >= 1")
    return math.sqrt(1.0 + (m - 1.0) * (d - 1.0) / 2.0)


def _plod_root_poly(d, u):
    return (
        -2.0 * (d - 1.0) * u ** (2 * d - 1)
        + d * u ** (2 * d - 2)
        - 2.0 * (d - 1.0) * u ** d
        + 3.0 * (d - 1.0) * u ** (d - 1)
        - 1.0
    )


def _diag_gap(d, u):
    num = (u ** d - u) ** 2
    den = u ** d * (1.0 - u ** d) + u * (1.0 - u)
    return num / den


def plod_bound(d):
    """Supremum bound for two positively lower-orthant-dependent copulas.

    d = 2 has the closed value sqrt(1/2 + 1/sqrt(3)); larger d maximizes the
    diagonal gap functional, whose unique interior stationary point is the
    sign change of a fixed polynomial, bracketed and bisected here.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if d == 2:
        return math.sqrt(0.5 + 1.0 / math.sqrt(3.0))
    us = np.linspace(1e-6, 1.0 - 1e-6, 4097)
    gs = _plod_root_poly(d, us)
    idx = np.nonzero((gs[:-1] < 0.0) & (gs[1:] >= 0.0))[0]
    if idx.size == 0:
        raise RuntimeError("root bracketing failed")
    lo, hi = float(us[idx[0]]), float(us[idx[0] + 1])
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _plod_root_poly(d, mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    u_star = 0.5 * (lo + hi)
    return math.sqrt(1.0 + 0.5 * _diag_gap(d, u_star))


def nlod_bound(d):
    """Supremum bound for two negatively lower-orthant-dependent copulas.

    Exactly sqrt(1 + 0.5/((1-1/d)^(-d) - 1)); the inner power is computed in
    log form so the d -> infinity limit sqrt(1 + 1/(2(e-1))) is reached
    without overflow or cancellation.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    ratio = math.exp(-d * math.log1p(-1.0 / d))
    return math.sqrt(1.0 + 0.5 / (ratio - 1.0))


# ---------------------------------------------------------------------------
# copula evaluators and the generic two-copula maximizer


@dataclass(frozen=True)
class Copula:
    """A d-variate copula evaluator; ``fn`` maps (..., d) arrays to values."""

    kind: str
    d: int
    fn: Callable = field(compare=False)

    def __call__(self, u):
        return self.fn(np.asarray(u, dtype=float))


def independence_copula(d):
    """Product copula: C(u) = prod(u)."""
    return Copula("pi", d, lambda u: np.prod(u, axis=-1))


def upper_frechet_copula(d):
    """Comonotone copula, the pointwise upper bound: C(u) = min(u)."""
    return Copula("m", d, lambda u: np.min(u, axis=-1))


def lower_frechet_bound(d):
    """Pointwise lower bound max(sum(u)-d+1, 0); a proper copula only for d=2."""
    return Copula("w", d, lambda u: np.maximum(np.sum(u, axis=-1) - (d - 1.0), 0.0))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _binormal_correlation_integral(a, b, rho):
    """Integral over r in [0, rho] of the standard binormal density at (a, b).

    Panel-doubling Gauss-Legendre; converges to 1e-9 for |rho| < 1 because
    the integrand is smooth in r.
    """
    panels = 1
    prev = None
    while panels <= 256:
        edges = np.linspace(0.0, rho, panels + 1)
        total = 0.0
        for i in range(panels):
            half = 0.5 * (edges[i + 1] - edges[i])
            mid = 0.5 * (edges[i + 1] + edges[i])
            rs = mid + half * _GL_NODES
            r = rs.reshape((-1,) + (1,) * a.ndim)
            s2 = 1.0 - r * r
            dens = np.exp(-(a * a - 2.0 * r * a * b + b * b) / (2.0 * s2))
            dens /= 2.0 * math.pi * np.sqrt(s2)
            total = total + np.tensordot(half * _GL_WEIGHTS, dens, axes=(0, 0))
        if prev is not None and float(np.max(np.abs(total - prev))) < 1e-9:
            return total
        prev = total
        panels *= 2
    raise RuntimeError("binormal integral accuracy not reached")


def gaussian_copula(rho):
    """Bivariate Gaussian copula evaluated by integrating the density in rho.

    Uses C_rho(u, v) = u*v + int_0^rho phi2(a, b; r) dr with a, b the normal
    scores of u, v — the derivative of the binormal CDF in its correlation
    is the binormal density, so the independence copula anchors the
    integral.
    """
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie in (-1, 1)")

    def fn(u):
        from .statdist import std_normal_quantile

        u = np.clip(u, 1e-15, 1.0 - 1e-15)
        base = np.prod(u, axis=-1)
        if rho == 0.0:
            return base
        a = std_normal_quantile(u[..., 0])
        b = std_normal_quantile(u[..., 1])
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return base + _binormal_correlation_integral(a, b, rho)

    return Copula("gauss", 2, fn)


def _pair_r_values(c1_vals, c2_vals):
    between = (c1_vals - c2_vals) ** 2
    within = 2.0 * (c1_vals * (1.0 - c1_vals) + c2_vals * (1.0 - c2_vals))
    out = np.ones_like(within)
    ok = within > 0.0
    out[ok] = np.sqrt(1.0 + between[ok] / within[ok])
    out[(~ok) & (between > 0.0)] = np.inf
    return out

_DIAGONAL_KINDS = {frozenset(("pi", "m")), frozenset(("w", "m")), frozenset(("pi", "w"))}


def copula_population_r_infinity(c1, c2, d=None, grid_n=None):
    """Population supremum of the two-chain statistic for a copula pair.

    Lattice maximum over (0,1)^d; for the built-in bound pairs (product,
    comonotone, lower-bound) the maximizer lies on the diagonal, which is
    additionally scanned and polished by golden-section search.
    """
    if isinstance(c1, Copula) and isinstance(c2, Copula):
        if c1.d != c2.d:
            raise ValueError("copulas must share one dimension")
        d = c1.d
    elif d is None:
        raise ValueError("d is required for plain-callable copulas")
    eps = 1e-6
    if grid_n is None:
        grid_n = max(5, int(round(200_000 ** (1.0 / d))))
    axis = np.linspace(eps, 1.0 - eps, grid_n)
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    best = float(np.max(_pair_r_values(np.asarray(c1(mesh), dtype=float),
                                       np.asarray(c2(mesh), dtype=float))))
    kinds = {getattr(c1, "kind", "custom"), getattr(c2, "kind", "custom")}
    if frozenset(kinds) in _DIAGONAL_KINDS:
        def diag(t):
            point = np.full(d, t)
            v1 = float(np.asarray(c1(point), dtype=float))
            v2 = float(np.asarray(c2(point), dtype=float))
            return float(_pair_r_values(np.array([v1]), np.array([v2]))[0])

        ts = np.linspace(eps, 1.0 - eps, 4097)
        vals = np.array([diag(t) for t in ts])
        i = int(np.argmax(vals))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
        from .population import _golden_max

        _, refined = _golden_max(diag, float(lo), float(hi), xtol=1e-12)
        best = max(best, float(vals[i]), refined)
    return best
