"""The kernel normality test: statistic, bootstrap schemes and decision.

The statistic is ``n * ||mu_hat - N(T(theta_hat))||^2`` where ``mu_hat`` is
the empirical mean embedding of the sample under the outer kernel and
``N(T(theta_hat))`` the embedding of the fitted null Gaussian.  Its null
quantile is estimated either by the classical parametric bootstrap (resample,
refit, recompute) or by the fast weighted bootstrap, which linearises the
embedding of the fitted parameter around the empirical one.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import parallel
from .embeddings import GaussianParam, OuterKernel, embed_cross_inner, embed_eval, embed_norm_sq, outer_kernel_matrix
from .errors import (
    InvalidArgumentError,
    InvalidDataError,
    KNTError,
    LinearizationError,
    NondifferentiableError,
    ParameterError,
    SingularOperatorError,
)
from .linalg import Dataset, GramContext
from .models import NullModel, apply_T, fit

WEIGHT_LAWS = ("normal", "rademacher")
BOOTSTRAP_MODES = ("fast", "slow", "both")


@dataclass(frozen=True)
class TestConfig:
    """Settings of one test run.

    Parameters
    ----------
    kernel : OuterKernel or None
        Outer kernel; None selects a gaussian kernel with the median heuristic.
    model : NullModel
    alpha : float
        Level, in (0, 1).
    B : int
        Number of bootstrap replications.
    seed : int
        Unsigned 64-bit seed; every replication gets its own substream.
    bootstrap : {'fast', 'slow', 'both'}
        With 'both' the decision uses the fast replications.
    h : float
        Relative finite-difference step of the linearisation.
    threads : int or None
        Worker threads (None reads ``KNT_THREADS``).
    weights : {'rademacher', 'normal'}
        Law of the multiplier weights before centring.  Rademacher weights
        have ``w_i^2 = 1``, so the diagonal of the kernel matrix enters each
        replication as a constant, exactly as it enters the statistic.
    """

    __test__ = False

    kernel: OuterKernel = None
    model: NullModel = field(default_factory=NullModel.full)
    alpha: float = 0.05
    B: int = 250
    seed: int = 0
    bootstrap: str = "fast"
    h: float = 1e-5
    threads: int = None
    weights: str = "rademacher"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.B) != self.B or self.B < 1:
            raise InvalidArgumentError(f"B must be an integer >= 1, got {self.B}")
        if not (self.h > 0 and np.isfinite(self.h)):
            raise InvalidArgumentError(f"finite-difference step h must be positive, got {self.h}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.bootstrap not in BOOTSTRAP_MODES:
            raise InvalidArgumentError(f"bootstrap must be one of {BOOTSTRAP_MODES}, got {self.bootstrap!r}")
        if self.weights not in WEIGHT_LAWS:
            raise InvalidArgumentError(f"weights must be one of {WEIGHT_LAWS}, got {self.weights!r}")
        if not isinstance(self.model, NullModel):
            raise InvalidArgumentError("model must be a NullModel")


@dataclass(frozen=True, eq=False)
class BootstrapDraw:
    """One fast replication: centred weights, perturbation direction and value."""

    weights: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    value: float


@dataclass(eq=False)
class TestReport:
    """Outcome of :func:`run_test`."""

    __test__ = False

    statistic: float
    quantile: float
    p_value: float
    reject: bool
    alpha: float
    B: int
    seed: int
    kernel: dict
    model: str
    timing_ms: dict
    replications: list = None
    slow_replications: list = None

    def to_dict(self, replications=True):
        out = {
            "statistic": float(self.statistic),
            "quantile": float(self.quantile),
            "p_value": float(self.p_value),
            "reject": bool(self.reject),
            "alpha": float(self.alpha),
            "B": int(self.B),
            "seed": int(self.seed),
            "kernel": dict(self.kernel),
            "model": self.model,
            "timing_ms": {k: float(v) for k, v in self.timing_ms.items()},
        }
        if replications and self.replications is not None:
            out["replications"] = [float(v) for v in self.replications]
        if replications and self.slow_replications is not None:
            out["slow_replications"] = [float(v) for v in self.slow_replications]
        return out

    def to_json(self, replications=True, indent=2):
        return json.dumps(self.to_dict(replications), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# statistic


def median_heuristic(ctx):
    """Bandwidth ``1 / (2 median ||Y_i - Y_j||^2)`` over pairs ``i < j``."""
    d = np.diag(ctx.K)
    sq = d[:, None] + d[None, :] - 2.0 * ctx.K
    iu = np.triu_indices(ctx.n, k=1)
    med = float(np.median(np.maximum(sq[iu], 0.0)))
    if not med > 0.0:
        raise InvalidDataError("median pairwise distance is zero; set the kernel bandwidth explicitly")
    return 1.0 / (2.0 * med)


def empirical_param(ctx):
    """The unconstrained estimate ``theta_hat = (m_hat, S_hat)`` in frame coordinates."""
    q = ctx.rank
    return GaussianParam(ctx.mean, ctx.eigvals[:q].copy(), ctx.cov_directions)


def _statistic(ctx, kernel, theta, Kbar):
    n = ctx.n
    val = Kbar.mean() - 2.0 * embed_eval(kernel, theta, ctx.coords).mean() + embed_norm_sq(kernel, theta)
    return max(n * val, 0.0)


def statistic(ctx, kernel, model, Kbar=None):
    """``n * Delta_hat^2`` for the sample in `ctx` against the fitted null of `model`."""
    if Kbar is None:
        Kbar = outer_kernel_matrix(kernel, ctx)
    theta = fit(model, ctx)
    return _statistic(ctx, kernel, theta, Kbar)


# ---------------------------------------------------------------------------
# linearisation


@dataclass(frozen=True, eq=False)
class Linearization:
    """``D = scale * (N(T(theta_+)) - N(T(theta_-)))``, or zero when `plus` is None."""

    plus: GaussianParam = None
    minus: GaussianParam = None
    scale: float = 0.0

    @property
    def is_zero(self):
        return self.plus is None

    def evaluate(self, kernel, points):
        points = np.atleast_2d(points)
        if self.is_zero:
            return np.zeros(points.shape[0])
        return self.scale * (embed_eval(kernel, self.plus, points) - embed_eval(kernel, self.minus, points))

    def norm_sq(self, kernel):
        if self.is_zero:
            return 0.0
        pp = embed_norm_sq(kernel, self.plus)
        mm = embed_norm_sq(kernel, self.minus)
        pm = embed_cross_inner(kernel, self.plus, self.minus)
        return max(self.scale**2 * (pp + mm - 2.0 * pm), 0.0)

    def inner_empirical(self, kernel, points, weights):
        """``<sum_i weights_i k(Y_i, .), D>``."""
        return float(weights @ self.evaluate(kernel, points))


def frechet_fd(theta, direction, model, h=1e-5):
    """Central finite difference of ``N o T`` at `theta` along `direction`.

    Parameters
    ----------
    theta : GaussianParam
        Base point (empirical parameter) in frame coordinates.
    direction : tuple (mean, cov)
        Perturbation direction; `cov` is a symmetric (p, p) matrix.
    model : NullModel
        Bound to the frame (see :meth:`NullModel.bind`).
    h : float
        Relative step: the parameter moves by ``h * max(1, ||theta||)`` along
        the unit direction and the difference is rescaled by ``||direction||``.
    """
    dm, dS = direction
    dm = np.asarray(dm, dtype=float)
    dS = np.asarray(dS, dtype=float)
    size = float(np.sqrt(dm @ dm + np.sum(dS * dS)))
    if model.constant or size == 0.0:
        return Linearization()
    eps = h * max(1.0, theta.norm())
    um, uS = dm / size, dS / size
    S = theta.cov
    try:
        plus = apply_T(model, GaussianParam.from_cov(theta.mean + eps * um, S + eps * uS, psd=False))
        minus = apply_T(model, GaussianParam.from_cov(theta.mean - eps * um, S - eps * uS, psd=False))
    except (NondifferentiableError, ParameterError, SingularOperatorError) as exc:
        raise LinearizationError(f"perturbed parameter is invalid ({exc}); try a smaller h than {h:g}") from exc
    return Linearization(plus, minus, size / (2.0 * eps))


# ---------------------------------------------------------------------------
# bootstrap


def _draw_weights(rng, n, law="normal"):
    if law == "rademacher":
        z = 2.0 * rng.integers(0, 2, size=n) - 1.0
    else:
        z = rng.standard_normal(n)
    return z - z.mean()


class FastBootstrap:
    """Weighted bootstrap with the linearised fitted embedding.

    Everything that does not depend on the weights (outer kernel matrix,
    empirical parameter, bound model) is computed once.  One replication costs
    ``O(n^2 + n p^2 + p^3)`` for a frame of dimension ``p``.
    """

    def __init__(self, ctx, kernel, model, h=1e-5, weights="rademacher", Kbar=None):
        self.ctx = ctx
        self.kernel = kernel
        self.model = model.bind(ctx)
        self.h = h
        self.law = weights
        self.Kbar = outer_kernel_matrix(kernel, ctx) if Kbar is None else Kbar
        self.theta = empirical_param(ctx)
        # the estimator map must be differentiable at theta_hat (eigengap for rank models)
        apply_T(self.model, self.theta)

    def draw(self, rng, weights=None):
        X = self.ctx.coords
        n = self.ctx.n
        w = _draw_weights(rng, n, self.law) if weights is None else np.asarray(weights, dtype=float)
        mb = X.T @ w / n
        # derivative of the weighted covariance: centred at m_hat, which keeps
        # the replication invariant under translation of the sample
        V = X - self.theta.mean
        Sb = (V * w[:, None]).T @ V / n
        Sb = 0.5 * (Sb + Sb.T)
        norm_mu = float(w @ self.Kbar @ w) / n**2
        lin = frechet_fd(self.theta, (mb, Sb), self.model, self.h)
        cross = lin.inner_empirical(self.kernel, X, w) / n
        value = n * (norm_mu - 2.0 * cross + lin.norm_sq(self.kernel))
        return BootstrapDraw(w, mb, Sb, _clamp(value))

    def replicate(self, b, seed):
        return self.draw(parallel.substream(seed, parallel.FAST_STREAM, b)).value

    def run(self, B, seed, threads=None):
        return np.array(parallel.pmap(lambda b: self.replicate(b, seed), range(B), threads))


class SlowBootstrap:
    """Classical parametric bootstrap: sample from the fitted null, refit, recompute.

    Replicate samples are drawn in frame coordinates along the eigendirections
    of the fitted covariance.  Each replication rebuilds the Gram matrix of the
    replicate and eigendecomposes it again, ``O(n^3)``.
    """

    def __init__(self, ctx, kernel, model):
        self.ctx = ctx
        self.kernel = kernel
        self.model = model.bind(ctx)
        self.theta = fit(model, ctx)

    def replicate_model(self):
        m = self.model
        if m.kind == "known":
            return NullModel.known(self.theta.mean, self.theta.cov)
        if m.kind == "known_mean":
            return NullModel.known_mean(m.mean)
        return m

    def sample(self, rng):
        th = self.theta
        xi = rng.standard_normal((self.ctx.n, th.rank))
        return th.mean[None, :] + (xi * np.sqrt(th.eigvals)) @ th.eigvecs.T

    def draw(self, rng):
        Yb = self.sample(rng)
        model = self.replicate_model()
        ctx_b = GramContext.from_vectors(Yb, extra=model.extra_vectors())
        return statistic(ctx_b, self.kernel, model)

    def replicate(self, b, seed):
        return self.draw(parallel.substream(seed, parallel.SLOW_STREAM, b))

    def run(self, B, seed, threads=None):
        return np.array(parallel.pmap(lambda b: self.replicate(b, seed), range(B), threads))


def _clamp(value):
    # squared norms; negatives are round-off
    return max(float(value), 0.0)


def fast_replication(ctx, kernel, model, rng, h=1e-5):
    """One fast bootstrap replication (convenience wrapper)."""
    return FastBootstrap(ctx, kernel, model, h=h).draw(rng).value


def slow_replication(ctx, kernel, model, rng):
    """One classical parametric bootstrap replication (convenience wrapper)."""
    return SlowBootstrap(ctx, kernel, model).draw(rng)


# ---------------------------------------------------------------------------
# decision


def quantile(replications, alpha):
    """Order statistic of rank ``floor((1 - alpha) B)`` (1-based, clamped to [1, B])."""
    r = np.sort(np.asarray(replications, dtype=float).ravel())
    B = r.size
    if B == 0:
        raise InvalidArgumentError("quantile of an empty replication list")
    if not np.all(np.isfinite(r)):
        raise InvalidArgumentError("replications must be finite")
    if not (0.0 < alpha < 1.0):
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    k = int(np.floor((1.0 - alpha) * B + 1e-9))
    k = min(max(k, 1), B)
    return float(r[k - 1])


def p_value(replications, stat):
    r = np.asarray(replications, dtype=float)
    return float((1 + np.sum(r >= stat)) / (r.size + 1))


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except KNTError as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def prepare(data, model):
    """Dataset and GramContext for `data` (array, or :class:`Dataset`)."""
    if not isinstance(data, Dataset):
        data = Dataset.from_vectors(data)
    return GramContext.from_dataset(data, extra=model.extra_vectors() if data.mode == "vectors" else None)


def run_test(data, config=None, ctx=None):
    """Run the full test on `data`.

    Parameters
    ----------
    data : array_like or Dataset
        Rows are observations; pass a gram-mode :class:`Dataset` for kernel data.
    config : TestConfig
    ctx : GramContext, optional
        Precomputed context (skips the eigendecomposition).

    Returns
    -------
    TestReport
    """
    config = config or TestConfig()
    timing = {}
    t0 = time.perf_counter()
    if ctx is None:
        ctx = _stage("data", prepare, data, config.model)
    kernel = config.kernel
    if kernel is None:
        kernel = OuterKernel("gaussian", _stage("bandwidth", median_heuristic, ctx))
    Kbar = outer_kernel_matrix(kernel, ctx)
    stat = _stage("statistic", statistic, ctx, kernel, config.model, Kbar)
    t1 = time.perf_counter()
    timing["statistic"] = 1e3 * (t1 - t0)

    fast = slow = None
    if config.bootstrap in ("fast", "both"):
        fb = _stage("fast bootstrap", FastBootstrap, ctx, kernel, config.model, config.h, config.weights, Kbar)
        fast = _stage("fast bootstrap", fb.run, config.B, config.seed, config.threads)
        t2 = time.perf_counter()
        timing["fast_bootstrap"] = 1e3 * (t2 - t1)
        t1 = t2
    if config.bootstrap in ("slow", "both"):
        sb = _stage("slow bootstrap", SlowBootstrap, ctx, kernel, config.model)
        slow = _stage("slow bootstrap", sb.run, config.B, config.seed, config.threads)
        timing["slow_bootstrap"] = 1e3 * (time.perf_counter() - t1)

    reps = fast if fast is not None else slow
    q = quantile(reps, config.alpha)
    timing["total"] = 1e3 * (time.perf_counter() - t0)
    return TestReport(
        statistic=float(stat),
        quantile=q,
        p_value=p_value(reps, stat),
        reject=bool(stat > q),
        alpha=float(config.alpha),
        B=int(config.B),
        seed=int(config.seed),
        kernel=kernel.to_dict(),
        model=config.model.label(),
        timing_ms=timing,
        replications=[float(v) for v in reps],
        slow_replications=None if (slow is None or fast is None) else [float(v) for v in slow],
    )
