"""Quantile-localized scale-reduction diagnostics for univariate chains.

The central statistic compares the chains' empirical CDFs at a point x: it
is the classic between/within variance ratio applied to the indicator draws
1{theta <= x}.  Scanning x over the pooled order statistics and taking the
supremum gives a single scalar that is distribution-free under the null
hypothesis that all chains share one continuous stationary law.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chains import ChainSet, split_chains
from .statdist import std_normal_quantile

__all__ = [
    "LocalCurve",
    "DiagnosticReport",
    "local_rhat",
    "rhat_curve",
    "rhat_infinity",
    "local_ess",
    "trad_split_rhat",
    "rank_rhat",
    "diagnose",
]


def _rhat_from_chain_cdfs(freqs):
    """Scale-reduction values from per-chain CDF evaluations.

    ``freqs`` has shape (m, ...); the result drops the chain axis.  Points
    where every chain is degenerate (all CDF values in {0,1}) extend to 1
    when the chains agree and to +inf when they do not (disjoint supports).
    """
    between = np.var(freqs, axis=0)
    within = np.mean(freqs * (1.0 - freqs), axis=0)
    out = np.ones_like(within)
    ok = within > 0.0
    out[ok] = np.sqrt(1.0 + between[ok] / within[ok])
    bad = (~ok) & (between > 0.0)
    if np.any(bad):
        out[bad] = np.inf
    return out, bad


def local_rhat(cs, x):
    """Localized scale-reduction statistic at threshold ``x``.

    Equals the original between/within variance diagnostic computed on the
    indicator draws 1{theta <= x}.  Returns 1.0 when every chain's empirical
    CDF is degenerate and equal at x; returns +inf (with a warning) when the
    degenerate CDFs disagree, which means the chains' supports are disjoint
    around x.
    """
    freqs = (cs.series <= x).mean(axis=1)
    value, bad = _rhat_from_chain_cdfs(freqs[:, np.newaxis])
    if bad[0]:
        warnings.warn(f"disjoint supports at x={x}", RuntimeWarning, stacklevel=2)
    return float(value[0])


def _resolve_grid(series, grid):
    pooled = np.unique(series)
    default = pooled[:-1] if pooled.size > 1 else pooled
    if grid is None or (isinstance(grid, str) and grid == "all"):
        xs = default
    elif isinstance(grid, (int, np.integer)):
        if grid < 1:
            raise ValueError("stride must be a positive integer")
        xs = default[:: int(grid)]
    else:
        xs = np.unique(np.asarray(grid, dtype=float))
    if xs.size == 0:
        raise ValueError("empty grid")
    return xs


@dataclass
class LocalCurve:
    """The diagnostic as a function of the threshold x.

    ``ess`` is optional; when present it aligns with ``xs`` and holds NaN at
    points where the indicator series is constant.
    """

    xs: np.ndarray
    rhat: np.ndarray
    ess: Optional[np.ndarray] = None

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.rhat = np.asarray(self.rhat, dtype=float)
        if self.xs.ndim != 1 or self.xs.shape != self.rhat.shape:
            raise ValueError("xs and rhat must be 1-D arrays of equal length")
        if np.any(np.diff(self.xs) <= 0.0):
            raise ValueError("xs must be strictly increasing")
        if np.any(self.rhat < 1.0):
            raise ValueError("rhat values below 1 are impossible")
        if self.ess is not None:
            self.ess = np.asarray(self.ess, dtype=float)
            if self.ess.shape != self.xs.shape:
                raise ValueError("ess must align with xs")

    def __len__(self):
        return self.xs.size

    def argmax(self):
        """Index of the largest rhat; ties resolve to the smallest x."""
        return int(np.argmax(self.rhat))

    def to_csv(self, fh):
        fh.write("x,rhat,ess\n")
        for i in range(len(self)):
            e = ""
            if self.ess is not None and math.isfinite(self.ess[i]):
                e = repr(float(self.ess[i]))
            fh.write(f"{float(self.xs[i])!r},{float(self.rhat[i])!r},{e}\n")


def rhat_curve(cs, grid=None, with_ess=False):
    """Evaluate the localized statistic over a grid of thresholds.

    ``grid`` is ``None`` (every pooled order statistic except the global
    maximum, where the statistic is trivially 1), an integer stride k (every
    k-th of those points), or an explicit array of thresholds.
    """
    series = cs.series
    xs = _resolve_grid(series, grid)
    sorted_chains = np.sort(series, axis=1)
    freqs = np.empty((cs.m, xs.size))
    for j in range(cs.m):
        freqs[j] = np.searchsorted(sorted_chains[j], xs, side="right")
    freqs /= cs.n
    rhat, bad = _rhat_from_chain_cdfs(freqs)
    if np.any(bad):
        warnings.warn(
            f"disjoint supports at {int(bad.sum())} grid point(s)",
            RuntimeWarning,
            stacklevel=2,
        )
    ess = None
    if with_ess:
        ess = np.full(xs.size, np.nan)
        for i, x in enumerate(xs):
            try:
                ess[i] = local_ess(cs, x)
            except ValueError:
                pass
    return LocalCurve(xs, rhat, ess)


def rhat_infinity(cs, grid=None):
    """Supremum of the localized statistic and its location.

    Returns ``(value, argmax_x)``; ties are broken by the smallest x.
    """
    curve = rhat_curve(cs, grid)
    i = curve.argmax()
    return float(curve.rhat[i]), float(curve.xs[i])


# ---------------------------------------------------------------------------
# effective sample size of the indicator series


def _autocov(mat):
    """Per-row FFT autocovariances of a (m, n) matrix, biased by 1/n."""
    n = mat.shape[1]
    centred = mat - mat.mean(axis=1, keepdims=True)
    size = 1 << int(2 * n - 1).bit_length()
    freq = np.fft.rfft(centred, size, axis=1)
    acov = np.fft.irfft(freq * np.conj(freq), size, axis=1)[:, :n]
    return acov / n

def _tau_var_plus(mat):
    """Integrated autocorrelation time and pooled variance of a (m, n) series.

    The estimator averages per-chain autocovariances, adds the between-chain
    mean variance, and truncates the autocorrelation sum at the first
    non-positive even/odd pair, afterwards forcing the pair sums to be
    non-increasing.
    """
    m, n = mat.shape
    acov = _autocov(mat)
    mean_var = acov[:, 0].mean() * n / (n - 1.0)
    var_plus = mean_var * (n - 1.0) / n
    if m > 1:
        var_plus += mat.mean(axis=1).var(ddof=1)
    if var_plus <= 0.0:
        return None, 0.0
    mean_acov = acov.mean(axis=0)

    rho = np.zeros(n)
    rho_even = 1.0
    rho[0] = rho_even
    rho_odd = 1.0 - (mean_var - mean_acov[1]) / var_plus
    rho[1] = rho_odd
    t = 1
    while t < n - 3 and (rho_even + rho_odd) > 0.0:
        rho_even = 1.0 - (mean_var - mean_acov[t + 1]) / var_plus
        rho_odd = 1.0 - (mean_var - mean_acov[t + 2]) / var_plus
        if rho_even + rho_odd >= 0.0:
            rho[t + 1] = rho_even
            rho[t + 2] = rho_odd
        t += 2
    max_t = t - 2
    if rho_even > 0.0:
        rho[max_t + 1] = rho_even
    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = 0.5 * (rho[t - 1] + rho[t])
            rho[t + 2] = rho[t + 1]
        t += 2
    tau = -1.0 + 2.0 * rho[: max_t + 1].sum() + rho[max_t + 1]
    tau = max(tau, 1.0 / math.log10(m * n))
    return tau, var_plus


def local_ess(cs, x):
    """Effective sample size of the indicator series 1{theta <= x}.

    Scales the nominal draw count by the ratio of the indicator's binomial
    variance to its estimated long-run variance; i.i.d. chains give values
    close to m*n.  Raises when x lies outside the pooled sample range (the
    indicator is constant and carries no information).
    """
    ind = (cs.series <= x).astype(float)
    pooled = ind.mean()
    if pooled == 0.0 or pooled == 1.0:
        raise ValueError(f"degenerate quantile: all draws on one side of x={x}")
    tau, var_plus = _tau_var_plus(ind)
    if tau is None:
        raise ValueError(f"degenerate quantile: indicator variance is zero at x={x}")
    return cs.m * cs.n * pooled * (1.0 - pooled) / (tau * var_plus)


# ---------------------------------------------------------------------------
# classical whole-distribution diagnostics, for comparison columns


def _split_rhat(mat):
    """Between/within variance ratio of a (m, n) matrix after halving chains."""
    halves = split_chains(ChainSet(mat)).series
    nn = halves.shape[1]
    within = halves.var(axis=1, ddof=1).mean()
    if within == 0.0:
        return 1.0
    mean_spread = halves.mean(axis=1).var(ddof=1)
    var_hat = (nn - 1.0) / nn * within + mean_spread
    return float(np.sqrt(var_hat / within))


def trad_split_rhat(cs):
    """Classical split-chain scale reduction on the raw draws.

    Chains are halved first, so a trending chain shows up as a between-half
    mean gap.  Returns 1.0 by convention when the within variance vanishes.
    """
    return _split_rhat(cs.series)


def _average_ranks(flat):
    uniq, inverse, counts = np.unique(flat, return_inverse=True, return_counts=True)
    below = np.concatenate(([0.0], np.cumsum(counts)))[:-1]
    return (below + 0.5 * (counts + 1.0))[inverse]


def _rank_normalize(series):
    m, n = series.shape
    ranks = _average_ranks(series.ravel())
    z = std_normal_quantile((ranks - 0.375) / (m * n + 0.25))
    return z.reshape(m, n)


def rank_rhat(cs):
    """Rank-normalized split diagnostic: (bulk, tail, max of both).

    Bulk applies the split diagnostic to normal scores of the pooled ranks;
    tail does the same after folding the draws around the pooled median,
    which exposes scale differences that rank normalization alone hides.
    """
    series = cs.series
    bulk = _split_rhat(_rank_normalize(series))
    folded = np.abs(series - np.median(series))
    tail = _split_rhat(_rank_normalize(folded))
    return bulk, tail, max(bulk, tail)


# ---------------------------------------------------------------------------
# assembled report


@dataclass
class DiagnosticReport:
    """All scalar diagnostics for one univariate ChainSet."""

    rhat_inf: float
    argmax_x: float
    split_rhat: float
    rank_rhat_bulk: float
    rank_rhat_tail: float
    rank_rhat: float
    min_local_ess: float
    threshold_used: float
    p_value: Optional[float]
    verdict: str

    def __post_init__(self):
        if self.rank_rhat != max(self.rank_rhat_bulk, self.rank_rhat_tail):
            raise ValueError("rank_rhat must be the max of its bulk and tail parts")
        expected = "not_converged" if self.rhat_inf >= self.threshold_used else "converged"
        if self.verdict != expected:
            raise ValueError("verdict inconsistent with rhat_inf and threshold")

    def to_dict(self):
        return {
            "rhat_inf": self.rhat_inf,
            "argmax_x": self.argmax_x,
            "split_rhat": self.split_rhat,
            "rank_rhat_bulk": self.rank_rhat_bulk,
            "rank_rhat_tail": self.rank_rhat_tail,
            "rank_rhat": self.rank_rhat,
            "min_local_ess": self.min_local_ess,
            "threshold_used": self.threshold_used,
            "p_value": self.p_value,
            "verdict": self.verdict,
        }


def _min_ess_over_curve(cs, xs, cap=257):
    idx = np.unique(np.linspace(0, xs.size - 1, min(cap, xs.size)).round().astype(int))
    best = math.inf
    for i in idx:
        try:
            best = min(best, local_ess(cs, xs[i]))
        except ValueError:
            continue
    return best


def diagnose(cs, alpha=0.05, threshold=None, grid=None, mc_reps=2000, seed=None):
    """Full univariate convergence report.

    The cutoff is ``threshold`` when given, otherwise the simulated null
    quantile of the supremum statistic at level ``alpha`` for this chain
    count and a target effective sample size of m*n.  ``p_value`` is the
    Monte Carlo tail probability of the observed supremum under the null
    (omitted when ``mc_reps`` is 0).  The minimum local effective sample
    size is scanned over at most 257 quantile-spaced curve points.
    """
    if cs.d != 1:
        raise ValueError("diagnose handles d=1; use two_step_diagnosis for d>1")
    from . import thresholds as _thr

    if seed is None:
        seed = _thr.DEFAULT_SEED

    curve = rhat_curve(cs, grid)
    i = curve.argmax()
    rinf, arg = float(curve.rhat[i]), float(curve.xs[i])
    split = trad_split_rhat(cs)
    bulk, tail, rmax = rank_rhat(cs)
    min_ess = _min_ess_over_curve(cs, curve.xs)

    spec = _thr.ThresholdSpec(
        m=cs.m, alpha=alpha, target_ess=cs.m * cs.n,
        reps=mc_reps if mc_reps > 0 else 2000, seed=seed,
    )
    cutoff = threshold if threshold is not None else _thr.mc_null_quantile(spec)
    p_value = _thr.mc_pvalue(rinf, spec) if mc_reps > 0 else None
    verdict = "not_converged" if rinf >= cutoff else "converged"
    return DiagnosticReport(
        rhat_inf=rinf,
        argmax_x=arg,
        split_rhat=split,
        rank_rhat_bulk=bulk,
        rank_rhat_tail=tail,
        rank_rhat=rmax,
        min_local_ess=min_ess,
        threshold_used=float(cutoff),
        p_value=p_value,
        verdict=verdict,
    )
