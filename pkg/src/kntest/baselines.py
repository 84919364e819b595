"""Reference normality tests: Henze-Zirkler, energy distance, random projections.

HZ and energy distance work on whitened data and are calibrated by Monte
Carlo under the fitted Gaussian; after whitening their null law only depends
on ``(n, d)``, so the calibration simulates standard normal samples and
whitens them the same way.  The random-projection test compares projections
on Gaussian directions with the fitted normal cdf (Kolmogorov-Smirnov
distance) and keeps the largest distance.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special, stats
from scipy.spatial.distance import pdist

from . import parallel
from .errors import DegenerateDataError, InvalidArgumentError, NumericalError, UnsupportedConfigurationError
from .knt import p_value as _p_value
from .knt import quantile as _quantile
from .linalg import Dataset, GramContext

log = logging.getLogger(__name__)

WHITEN_TOL = 1e-10
MC_BUDGET = 2e10  # B * n^2 * d flops allowed for one calibration
ED_MC_DRAWS = 10**6
RP_MAX_REDRAWS = 100


@dataclass(frozen=True, eq=False)
class WhitenedSample:
    """Centred sample with identity empirical covariance on its retained subspace.

    ``values = (X - mean) @ transform``.
    """

    values: np.ndarray
    transform: np.ndarray
    mean: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


def whiten(X):
    """Centre and renormalise `X` with the (1/n) empirical covariance.

    Directions with variance below ``1e-10`` times the largest are dropped
    (pseudo-inverse whitening), reducing the output dimension.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 2:
        raise DegenerateDataError("whitening needs at least two observations")
    mean = X.mean(axis=0)
    Xc = X - mean
    S = Xc.T @ Xc / n
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    if w[-1] <= 0.0:
        raise DegenerateDataError("sample has zero variance in every direction")
    keep = w > WHITEN_TOL * w[-1]
    W = V[:, keep] / np.sqrt(w[keep])
    W = W[:, ::-1]  # leading directions first
    return WhitenedSample(Xc @ W, W, mean)


# ---------------------------------------------------------------------------
# Henze-Zirkler


def hz_beta(n, d):
    return 2.0**-0.5 * ((2 * d + 1) * n / 4.0) ** (1.0 / (d + 4))


def hz_statistic(Z, beta=None):
    """Weighted L2 distance between empirical and N(0, I) characteristic functions.

    The weight is the N(0, beta I) density.  Integrating the squared modulus
    term by term gives::

        (1/n^2) sum_ij exp(-beta |Z_i - Z_j|^2 / 2)
        - 2 (1 + beta)^(-d/2) (1/n) sum_i exp(-beta |Z_i|^2 / (2 (1 + beta)))
        + (1 + 2 beta)^(-d/2)
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    n, d = Z.shape
    b = hz_beta(n, d) if beta is None else beta
    sq = pdist(Z, "sqeuclidean")
    pair = (n + 2.0 * np.sum(np.exp(-0.5 * b * sq))) / n**2
    r2 = np.einsum("ij,ij->i", Z, Z)
    single = (1.0 + b) ** (-d / 2) * np.mean(np.exp(-0.5 * b * r2 / (1.0 + b)))
    return max(float(pair - 2.0 * single + (1.0 + 2.0 * b) ** (-d / 2)), 0.0)


# ---------------------------------------------------------------------------
# energy distance


def _chi_mean(d):
    """``E ||Z||`` for Z ~ N(0, I_d)."""
    return float(np.sqrt(2.0) * np.exp(special.gammaln((d + 1) / 2) - special.gammaln(d / 2)))


def ed_pair_expectation(d):
    """``E ||Z - Z'||`` for independent standard normals in dimension d."""
    return np.sqrt(2.0) * _chi_mean(d)


def _ed_point_mc(a, seed=0, draws=ED_MC_DRAWS):
    rng = parallel.substream(seed, parallel.MC_STREAM, 2**31)
    Z = rng.standard_normal((draws, a.size))
    return float(np.mean(np.linalg.norm(a[None, :] - Z, axis=1)))


def ed_point_expectation(a, seed=0):
    """``E ||a - Z||`` for Z ~ N(0, I_d): the mean of a noncentral chi variable.

    ``sqrt(2) Gamma((d+1)/2) / Gamma(d/2) * 1F1(-1/2; d/2; -|a|^2/2)``, with
    Kummer's transformation for large ``|a|``.  Falls back to Monte Carlo if
    the series does not give a finite value.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    d = a.size
    x = 0.5 * float(a @ a)
    if d == 1:
        t = abs(a[0])
        return float(t * (2.0 * stats.norm.cdf(t) - 1.0) + 2.0 * stats.norm.pdf(t))
    if x < 30.0:
        f = special.hyp1f1(-0.5, d / 2, -x)
    else:
        # 1F1(a; b; -x) = e^-x 1F1(b - a; b; x); asymptotic form beyond overflow
        f = np.exp(-x) * special.hyp1f1((d + 1) / 2, d / 2, x) if x < 600.0 else np.nan
        if not np.isfinite(f):
            f = np.nan
    val = _chi_mean(d) * f
    if not np.isfinite(val) or val <= 0.0:
        if x >= 600.0:
            # the noncentral chi mean for huge noncentrality
            return float(np.sqrt(2.0 * x + d - 1.0))
        log.warning("confluent series failed for |a|^2/2 = %.3g (d=%d); using Monte Carlo", x, d)
        return _ed_point_mc(a, seed)
    return float(val)


def ed_statistic(Z, seed=0):
    """Energy distance between the whitened sample and N(0, I)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    n, d = Z.shape
    point = np.mean([ed_point_expectation(z, seed) for z in Z])
    pair = 2.0 * np.sum(pdist(Z, "euclidean")) / n**2
    return float(2.0 * point - ed_pair_expectation(d) - pair)


# ---------------------------------------------------------------------------
# calibration and decisions


@dataclass
class BaselineReport:
    method: str
    statistic: float
    threshold: float
    p_value: float
    reject: bool
    alpha: float
    B: int
    seed: int
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "method": self.method,
            "statistic": float(self.statistic),
            "threshold": float(self.threshold),
            "p_value": float(self.p_value),
            "reject": bool(self.reject),
            "alpha": float(self.alpha),
            "B": int(self.B),
            "seed": int(self.seed),
            "details": self.details,
        }


_STATS = {"hz": lambda Z, seed: hz_statistic(Z), "ed": ed_statistic}


def _check_budget(n, d, B, budget):
    cost = float(B) * n * n * d
    if cost > budget:
        raise UnsupportedConfigurationError(
            f"Monte Carlo calibration at n={n}, d={d}, B={B} needs ~{cost:.2e} operations, above the budget "
            f"{budget:.2e}; reduce B or the dimension"
        )


@lru_cache(maxsize=64)
def _mc_null_cached(method, n, d, B, seed, threads):
    fn = _STATS[method]

    def one(b):
        rng = parallel.substream(seed, parallel.MC_STREAM, b)
        Z = whiten(rng.standard_normal((n, d))).values
        return fn(Z, seed)

    return np.array(parallel.pmap(one, range(B), threads))


def mc_null(method, n, d, B=250, seed=0, threads=None, budget=MC_BUDGET):
    """Simulated null statistics of `method` ('hz' or 'ed') at sample size n, dimension d."""
    if method not in _STATS:
        raise InvalidArgumentError(f"unknown method {method!r}")
    if d >= n:
        raise UnsupportedConfigurationError(f"{method} needs n > d after whitening, got n={n}, d={d}")
    _check_budget(n, d, B, budget)
    return _mc_null_cached(method, int(n), int(d), int(B), int(seed), threads).copy()


def _calibrated(method, X, alpha, B, seed, threads):
    if not (0.0 < alpha < 1.0):
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    W = whiten(X)
    stat = _STATS[method](W.values, seed)
    null = mc_null(method, W.n, W.d, B, seed, threads)
    q = _quantile(null, alpha)
    return BaselineReport(method, stat, q, _p_value(null, stat), bool(stat > q), alpha, B, seed, {"dim": W.d})


def hz_test(X, alpha=0.05, B=250, seed=0, threads=None):
    """Henze-Zirkler test with a Monte Carlo critical value."""
    return _calibrated("hz", X, alpha, B, seed, threads)


def ed_test(X, alpha=0.05, B=250, seed=0, threads=None):
    """Energy-distance test with a Monte Carlo critical value."""
    return _calibrated("ed", X, alpha, B, seed, threads)


# ---------------------------------------------------------------------------
# random projections


def ks_distance(x, mean, sd):
    """``sup_t |F_n(t) - Phi((t - mean) / sd)|``."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    F = stats.norm.cdf((x - mean) / sd)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def _directions(rng, p, d, S):
    """`p` Gaussian directions with nondegenerate projected variance."""
    H = np.empty((p, d))
    scale = max(np.trace(S), 1e-300)
    for k in range(p):
        for _ in range(RP_MAX_REDRAWS):
            h = rng.standard_normal(d)
            if h @ S @ h > 1e-12 * scale * (h @ h):
                H[k] = h
                break
        else:
            raise DegenerateDataError(f"no direction with positive projected variance after {RP_MAX_REDRAWS} draws")
    return H


def rp_distances(X, H):
    """KS distance of each projection to the normal law fitted by (m_hat, S_hat)."""
    m = X.mean(axis=0)
    Xc = X - m
    P = X @ H.T
    var = np.einsum("ij,ij->j", Xc @ H.T, Xc @ H.T) / X.shape[0]
    return np.array([ks_distance(P[:, k], m @ H[k], np.sqrt(var[k])) for k in range(H.shape[0])])


def _as_vectors(data):
    if isinstance(data, Dataset):
        if data.mode == "gram":
            return GramContext.from_gram(data.values).coords
        return data.values
    X = np.asarray(data, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def rp_test(data, p=1, alpha=0.05, seed=0, B=250, threads=None):
    """Random-projection Kolmogorov-Smirnov test.

    For ``p = 1`` the decision uses the classical KS p-value; for ``p >= 2``
    the maximum over directions is calibrated by simulating samples from the
    fitted Gaussian (with fresh directions each time).
    """
    if int(p) != p or p < 1:
        raise InvalidArgumentError(f"number of projections must be >= 1, got {p}")
    if not (0.0 < alpha < 1.0):
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    X = _as_vectors(data)
    n, d = X.shape
    m = X.mean(axis=0)
    Xc = X - m
    S = Xc.T @ Xc / n
    if np.trace(S) <= 0.0:
        raise DegenerateDataError("sample has zero variance in every direction")
    rng = parallel.substream(seed, parallel.MC_STREAM, 0, 0)
    H = _directions(rng, p, d, S)
    dists = rp_distances(X, H)
    stat = float(dists.max())
    details = {"distances": [float(v) for v in dists]}
    if p == 1:
        pv = float(stats.kstwo.sf(stat, n))
        thr = float(stats.kstwo.isf(alpha, n))
        return BaselineReport("rp", stat, thr, pv, bool(pv < alpha), alpha, 0, seed, details)

    w, V = np.linalg.eigh(0.5 * (S + S.T))
    keep = w > WHITEN_TOL * w[-1]
    root = V[:, keep] * np.sqrt(w[keep])

    def one(b):
        r = parallel.substream(seed, parallel.MC_STREAM, 1, b)
        Y = m + r.standard_normal((n, root.shape[1])) @ root.T
        Yc = Y - Y.mean(axis=0)
        return float(rp_distances(Y, _directions(r, p, d, Yc.T @ Yc / n)).max())

    null = np.array(parallel.pmap(one, range(B), threads))
    if not np.all(np.isfinite(null)):
        raise NumericalError("non-finite simulated projection statistics")
    q = _quantile(null, alpha)
    return BaselineReport("rp", stat, q, _p_value(null, stat), bool(stat > q), alpha, B, seed, details)
