"""Multi-chain sample container, CSV ingestion and synthetic generators.

A :class:`ChainSet` holds ``m`` chains of ``n`` iterations in ``d``
coordinates as an immutable float array.  Generators are deterministic in
their seed: every chain draws from its own substream, so neither the number
of chains nor any parallel scheduling can change the output.
"""

import csv
import math

import numpy as np

from . import statdist
from .statdist import std_normal_quantile

__all__ = [
    "ChainSet",
    "load_chains",
    "save_chains",
    "generate_iid",
    "generate_ar1",
    "generate_mvn",
    "random_unitdiag_covariance",
    "split_chains",
]


class ChainSet:
    """Immutable container of MCMC draws indexed (chain, iteration, coordinate).

    Parameters
    ----------
    draws : array-like
        Shape (m, n) or (m, n, d).  Every value must be finite.
    labels : sequence of str, optional
        Coordinate names, length d.
    """

    __slots__ = ("_draws", "labels")

    def __init__(self, draws, labels=None):
        arr = np.array(draws, dtype=float)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError("draws must have shape (m, n) or (m, n, d)")
        m, n, d = arr.shape
        if m < 2:
            raise ValueError("at least two chains required")
        if n < 2:
            raise ValueError("at least two iterations per chain required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("draws must be finite (no NaN or infinity)")
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != d:
                raise ValueError(f"expected {d} labels, got {len(labels)}")
        arr.flags.writeable = False
        self._draws = arr
        self.labels = labels

    @property
    def draws(self):
        return self._draws

    @property
    def m(self):
        return self._draws.shape[0]

    @property
    def n(self):
        return self._draws.shape[1]

    @property
    def d(self):
        return self._draws.shape[2]

    @property
    def series(self):
        """The (m, n) draw matrix of a univariate ChainSet."""
        if self.d != 1:
            raise ValueError("series is only defined for d = 1")
        return self._draws[:, :, 0]

    def coordinate(self, p):
        """Univariate ChainSet holding coordinate ``p`` (0-based)."""
        label = None if self.labels is None else (self.labels[p],)
        return ChainSet(self._draws[:, :, p], labels=label)

    def __repr__(self):
        return f"ChainSet(m={self.m}, n={self.n}, d={self.d})"


def _seed_seq(seed, *key):
    """Substream derived from ``seed`` (int or SeedSequence) and an index key."""
    if isinstance(seed, np.random.SeedSequence):
        base = tuple(seed.spawn_key)
        return np.random.SeedSequence(entropy=seed.entropy, spawn_key=base + key)
    return np.random.SeedSequence(entropy=int(seed), spawn_key=key)


def load_chains(path, layout="wide"):
    """Read a ChainSet from a CSV file.

    ``wide``: header ``chain_1,...,chain_m``, one row per iteration (d = 1).
    ``long``: header ``chain,iteration,p_1,...,p_d``, chain and iteration
    1-based; iterations keep file order within each chain.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if layout == "wide":
        return _parse_wide(header, body)
    if layout == "long":
        return _parse_long(header, body)
    raise ValueError(f"unknown layout {layout!r}")


def _cell(value, row, col):
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"non-numeric value {value!r} at row {row}, column {col}") from None


def _parse_wide(header, body):
    m = len(header)
    expected = [f"chain_{j + 1}" for j in range(m)]
    if header != expected:
        raise ValueError(f"wide layout expects header {expected}, got {header}")
    if m < 2:
        raise ValueError("at least two chains required")
    data = np.empty((len(body), m))
    for i, row in enumerate(body):
        if len(row) != m:
            raise ValueError(f"row {i + 2} has {len(row)} cells, expected {m}")
        for j, v in enumerate(row):
            data[i, j] = _cell(v, i + 2, j + 1)
    return ChainSet(data.T)


def _parse_long(header, body):
    if len(header) < 3 or header[:2] != ["chain", "iteration"]:
        raise ValueError("long layout expects header chain,iteration,p_1,...")
    d = len(header) - 2
    expected = [f"p_{k + 1}" for k in range(d)]
    if header[2:] != expected:
        raise ValueError(f"long layout expects coordinates {expected}, got {header[2:]}")
    per_chain = {}
    for i, row in enumerate(body):
        if len(row) != d + 2:
            raise ValueError(f"row {i + 2} has {len(row)} cells, expected {d + 2}")
        try:
            cid = int(row[0])
        except ValueError:
            raise ValueError(f"non-integer chain id {row[0]!r} at row {i + 2}") from None
        vals = [_cell(v, i + 2, k + 3) for k, v in enumerate(row[2:])]
        per_chain.setdefault(cid, []).append(vals)
    if len(per_chain) < 2:
        raise ValueError("at least two chains required")
    ids = sorted(per_chain)
    lengths = {cid: len(per_chain[cid]) for cid in ids}
    n = lengths[ids[0]]
    for cid in ids:
        if lengths[cid] != n:
            raise ValueError(
                f"ragged chains: chain {cid} has {lengths[cid]} iterations, expected {n}"
            )
    data = np.array([per_chain[cid] for cid in ids])
    return ChainSet(data)


def save_chains(path, cs, layout="wide"):
    """Write a ChainSet as CSV; floats use shortest round-trip formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if layout == "wide":
            if cs.d != 1:
                raise ValueError("wide layout requires d = 1")
            writer.writerow([f"chain_{j + 1}" for j in range(cs.m)])
            series = cs.series
            for i in range(cs.n):
                writer.writerow([repr(float(series[j, i])) for j in range(cs.m)])
        elif layout == "long":
            writer.writerow(["chain", "iteration"] + [f"p_{k + 1}" for k in range(cs.d)])
            for j in range(cs.m):
                for i in range(cs.n):
                    writer.writerow(
                        [j + 1, i + 1] + [repr(float(v)) for v in cs.draws[j, i]]
                    )
        else:
            raise ValueError(f"unknown layout {layout!r}")


def generate_iid(spec_per_chain, n, seed):
    """ChainSet of independent draws; chain j follows ``spec_per_chain[j]``."""
    specs = list(spec_per_chain)
    if len(specs) < 2:
        raise ValueError("at least two chains required")
    cols = []
    for j, spec in enumerate(specs):
        rng = np.random.default_rng(_seed_seq(seed, j))
        cols.append(statdist.quantile(spec, rng.random(n)))
    return ChainSet(np.stack(cols))


def generate_ar1(rho, sigmas, n, seed):
    """Gaussian AR(1) chains x[i+1] = rho*x[i] + e, e ~ N(0, sigma_j^2).

    Each chain starts from its stationary law N(0, sigma_j^2/(1-rho^2)); this
    initialization is a choice of this library (stationary start), stated
    here because it pins down the marginal law of every iteration.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    sigmas = [float(s) for s in sigmas]
    if any(s <= 0.0 for s in sigmas):
        raise ValueError("sigmas must be positive")
    if len(sigmas) < 2:
        raise ValueError("at least two chains required")
    out = np.empty((len(sigmas), n))
    scale0 = 1.0 / math.sqrt(1.0 - rho * rho)
    for j, sigma in enumerate(sigmas):
        rng = np.random.default_rng(_seed_seq(seed, j))
        z = std_normal_quantile(rng.random(n))
        x = out[j]
        x[0] = z[0] * sigma * scale0
        for i in range(1, n):
            x[i] = rho * x[i - 1] + sigma * z[i]
    return ChainSet(out)


def _cov_factor(cov, j):
    cov = np.asarray(cov, dtype=float)
    d = cov.shape[0]
    if cov.shape != (d, d) or not np.allclose(cov, cov.T, atol=1e-9):
        raise ValueError(f"covariance {j} is not symmetric")
    if not np.allclose(np.diag(cov), 1.0, atol=1e-9):
        raise ValueError(f"covariance {j} does not have unit diagonal")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    # Semi-definite matrices: clip tiny negative eigenvalues, reject real ones.
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-12 * max(1.0, w.max()):
        raise ValueError(f"covariance {j} is not positive semi-definite") from None
    return v * np.sqrt(np.clip(w, 0.0, None))


def generate_mvn(covs, n, seed):
    """ChainSet of i.i.d. d-variate centred Gaussians, one covariance per chain.

    Every covariance must be symmetric positive semi-definite with unit
    diagonal.
    """
    factors = [_cov_factor(c, j + 1) for j, c in enumerate(covs)]
    if len(factors) < 2:
        raise ValueError("at least two chains required")
    d = factors[0].shape[0]
    if any(f.shape[0] != d for f in factors):
        raise ValueError("covariance matrices must share one dimension")
    out = np.empty((len(factors), n, d))
    for j, fac in enumerate(factors):
        rng = np.random.default_rng(_seed_seq(seed, j))
        z = std_normal_quantile(rng.random((n, d)))
        out[j] = z @ fac.T
    return ChainSet(out)


def random_unitdiag_covariance(d, seed):
    """Random correlation-like matrix: Wishart(d, I) rescaled to unit diagonal."""
    if d < 2:
        raise ValueError("d must be at least 2")
    rng = np.random.default_rng(_seed_seq(seed, 0))
    g = std_normal_quantile(rng.random((d, d)))
    s = g @ g.T
    dg = np.diag(s).copy()
    c = s / np.sqrt(np.outer(dg, dg))
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


def split_chains(cs):
    """Halve every chain: (m, n, d) -> (2m, floor(n/2), d).

    The two halves of a chain appear consecutively; with odd n the final
    draw is dropped.
    """
    if cs.n < 4:
        raise ValueError("splitting requires n >= 4")
    half = cs.n // 2
    trimmed = cs.draws[:, : 2 * half, :]
    stacked = trimmed.reshape(cs.m, 2, half, cs.d).reshape(2 * cs.m, half, cs.d)
    return ChainSet(stacked, labels=cs.labels)
