"""Sequential selection of the covariance rank.

Ranks ``r = 1, 2, ...`` are tested in turn with the rank-r null model; the
first accepted rank is returned, or ``r_max`` if every test rejects.  With a
level ``alpha`` the probability of overestimating the true rank is at most
``alpha`` (only the test at the true rank can wrongly reject).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import parallel
from .embeddings import OuterKernel
from .errors import InvalidArgumentError, KNTError
from .knt import SlowBootstrap, TestConfig, median_heuristic, run_test
from .linalg import Dataset, GramContext
from .models import NullModel

log = logging.getLogger(__name__)

SCHEDULE_C = 0.125
SCHEDULE_E = 0.45


def alpha_schedule(n, c=SCHEDULE_C, e=SCHEDULE_E):
    """Level ``exp(-c n^e)``, decreasing to 0 as the sample grows."""
    if n < 1:
        raise InvalidArgumentError(f"sample size must be >= 1, got {n}")
    return float(np.exp(-c * float(n) ** e))


@dataclass(frozen=True)
class RankSelectConfig:
    """Settings for :func:`select_rank`.

    ``alpha=None`` selects the schedule ``exp(-c n^e)``.
    """

    r_max: int = 10
    alpha: float = None
    kernel: OuterKernel = None
    B: int = 250
    seed: int = 0
    h: float = 1e-5
    threads: int = None
    weights: str = "rademacher"
    schedule: tuple = (SCHEDULE_C, SCHEDULE_E)

    def __post_init__(self):
        if int(self.r_max) != self.r_max or self.r_max < 1:
            raise InvalidArgumentError(f"r_max must be an integer >= 1, got {self.r_max}")
        if self.alpha is not None and not (0.0 < self.alpha < 1.0):
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")

    def level(self, n):
        return self.alpha if self.alpha is not None else alpha_schedule(n, *self.schedule)


@dataclass
class RankSelectReport:
    r_hat: int
    alpha: float
    trace: list = field(default_factory=list)

    @property
    def tests_run(self):
        return len(self.trace)

    def to_dict(self):
        return {"r_hat": int(self.r_hat), "alpha": float(self.alpha), "trace": list(self.trace)}


def select_rank(data, config=None):
    """Smallest rank whose null hypothesis is accepted.

    Parameters
    ----------
    data : array_like, Dataset or GramContext
    config : RankSelectConfig

    Returns
    -------
    RankSelectReport
        ``trace`` holds one entry per tested rank.  A rank whose test raised
        an error is counted as rejected; the error message is kept in the
        entry and logged.
    """
    config = config or RankSelectConfig()
    if isinstance(data, GramContext):
        ctx = data
    else:
        if not isinstance(data, Dataset):
            data = Dataset.from_vectors(data)
        ctx = GramContext.from_dataset(data)
    n = ctx.n
    if config.r_max > n - 1:
        raise InvalidArgumentError(f"r_max must be <= n - 1 = {n - 1}, got {config.r_max}")
    alpha = config.level(n)
    kernel = config.kernel or OuterKernel("gaussian", median_heuristic(ctx))

    report = RankSelectReport(r_hat=config.r_max, alpha=alpha)
    for r in range(1, config.r_max + 1):
        tc = TestConfig(
            kernel=kernel,
            model=NullModel.rank_r(r),
            alpha=alpha,
            B=config.B,
            seed=parallel.derive_seed(config.seed, parallel.RANK_STREAM, r),
            h=config.h,
            threads=config.threads,
            weights=config.weights,
        )
        entry = {"rank": r, "alpha": alpha}
        try:
            res = run_test(None, tc, ctx=ctx)
        except KNTError as exc:
            log.warning("rank %d: test failed (%s); counted as a rejection", r, exc)
            entry.update(statistic=None, quantile=None, p_value=None, reject=True, error=str(exc))
            report.trace.append(entry)
            continue
        entry.update(statistic=res.statistic, quantile=res.quantile, p_value=res.p_value, reject=res.reject)
        report.trace.append(entry)
        if not res.reject:
            report.r_hat = r
            break
    return report


# ---------------------------------------------------------------------------
# oracle level (simulation only)


def oracle_alpha(null_samples, observed):
    """Smallest level at which every listed rank would be rejected.

    For each rank, the fraction of null draws at least as large as the
    observed statistic (its bootstrap p-value); the oracle level is the
    maximum over ranks.

    Parameters
    ----------
    null_samples : sequence of 1-d arrays
        Simulated statistics under each rank-r null, ``r = 1 .. r* - 1``.
    observed : sequence of float
        Observed statistics for the same ranks.
    """
    if len(null_samples) != len(observed):
        raise InvalidArgumentError("need one null sample per observed statistic")
    if len(observed) == 0:
        return 0.0
    out = 0.0
    for z, t in zip(null_samples, observed):
        z = np.asarray(z, dtype=float)
        if z.size == 0:
            raise InvalidArgumentError("empty null sample")
        out = max(out, float(np.mean(z >= t)))
    return out


def null_statistics(ctx, kernel, r, B, seed, threads=None):
    """Statistics simulated under the rank-r null fitted to `ctx` (slow bootstrap)."""
    return SlowBootstrap(ctx, kernel, NullModel.rank_r(r)).run(B, seed, threads)


def oracle_trial(data, r_star, kernel=None, B=100, seed=0):
    """One run of the oracle procedure.

    Computes the observed statistics and rank-r null samples for every rank up
    to `r_star`, sets the level to :func:`oracle_alpha` over the wrong ranks and
    reports whether the true rank is then accepted.
    """
    ctx = data if isinstance(data, GramContext) else GramContext.from_vectors(data)
    kernel = kernel or OuterKernel("gaussian", median_heuristic(ctx))
    from .knt import statistic

    obs, nulls = [], []
    for r in range(1, r_star + 1):
        obs.append(statistic(ctx, kernel, NullModel.rank_r(r)))
        nulls.append(null_statistics(ctx, kernel, r, B, parallel.derive_seed(seed, parallel.RANK_STREAM, r)))
    a = oracle_alpha(nulls[:-1], obs[:-1])
    p_true = float(np.mean(nulls[-1] >= obs[-1]))
    return {"alpha_oracle": a, "p_true": p_true, "success": bool(p_true > a)}
