"""Null families and the estimator map that projects onto them.

A :class:`NullModel` describes the null family and the map ``T`` sending the
empirical parameters ``(m_hat, S_hat)`` to the fitted null parameters:

========== ================================
kind        T(m, S)
========== ================================
full        (m, S)
known       (m0, S0)
known_mean  (m0, S)
rank        (m, S_r), top-r truncation of S
========== ================================
"""

from dataclasses import dataclass, replace

import numpy as np

from .embeddings import GaussianParam
from .errors import InvalidArgumentError, NondifferentiableError, RankDeficiencyError, RepresentationError

KINDS = ("full", "known", "known_mean", "rank")
GAP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class NullModel:
    """Null family specification.

    Known parameters are interpreted according to `space`:

    - ``'ambient'``: a d-vector / (d, d) matrix in the original coordinates
      (vector-mode data only);
    - ``'coefficients'``: ``m0 = sum_i a_i Y_i`` and
      ``S0 = sum_ij C_ij (Y_i - m_hat)(Y_j - m_hat)^T``, usable in both modes;
    - ``'frame'``: already in frame coordinates of a given context (set by
      :meth:`bind`).
    """

    kind: str = "full"
    rank: int = None
    mean: np.ndarray = None
    cov: np.ndarray = None
    space: str = "ambient"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown null model {self.kind!r}; expected one of {KINDS}")
        if self.kind == "rank":
            if self.rank is None or int(self.rank) != self.rank or self.rank < 1:
                raise InvalidArgumentError(f"rank model needs an integer rank >= 1, got {self.rank!r}")
        if self.kind in ("known", "known_mean") and self.mean is None:
            raise InvalidArgumentError(f"{self.kind} model needs a mean")
        if self.kind == "known" and self.cov is None:
            raise InvalidArgumentError("known model needs a covariance")
        if self.space not in ("ambient", "coefficients", "frame"):
            raise InvalidArgumentError(f"unknown parameter space {self.space!r}")
        if self.cov is not None:
            S = np.asarray(self.cov, dtype=float)
            if S.ndim != 2 or S.shape[0] != S.shape[1]:
                raise InvalidArgumentError("known covariance must be a square matrix")
            if self.space != "coefficients":
                if not np.allclose(S, S.T, atol=1e-10 * max(1.0, np.abs(S).max())):
                    raise InvalidArgumentError("known covariance must be symmetric")
                ev = np.linalg.eigvalsh(0.5 * (S + S.T))
                if ev.size and ev[0] < -1e-8 * max(ev[-1], 1e-300):
                    raise InvalidArgumentError("known covariance must be positive semi-definite")

    # constructors -----------------------------------------------------------
    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def known(cls, mean, cov, space="ambient"):
        return cls("known", mean=np.asarray(mean, float), cov=np.asarray(cov, float), space=space)

    @classmethod
    def known_mean(cls, mean, space="ambient"):
        return cls("known_mean", mean=np.asarray(mean, float), space=space)

    @classmethod
    def rank_r(cls, r):
        return cls("rank", rank=int(r))

    @classmethod
    def parse(cls, text, params=None, space="ambient"):
        """Parse ``full | known | known-mean | rank:R``; `params` holds mean/covariance."""
        text = text.strip().lower().replace("-", "_")
        if text.startswith("rank"):
            _, _, r = text.partition(":")
            try:
                return cls.rank_r(int(r))
            except ValueError:
                raise InvalidArgumentError(f"cannot parse rank from {text!r}; use rank:R") from None
        if text == "full":
            return cls.full()
        params = params or {}
        if text == "known":
            if "mean" not in params or "covariance" not in params:
                raise InvalidArgumentError("known model needs parameters with 'mean' and 'covariance'")
            return cls.known(params["mean"], params["covariance"], space=space)
        if text == "known_mean":
            if "mean" not in params:
                raise InvalidArgumentError("known-mean model needs parameters with 'mean'")
            return cls.known_mean(params["mean"], space=space)
        raise InvalidArgumentError(f"unknown null model {text!r}")

    def label(self):
        if self.kind == "rank":
            return f"rank:{self.rank}"
        return self.kind.replace("_", "-")

    def extra_vectors(self):
        """Ambient vectors the sample frame must contain for this model."""
        if self.space != "ambient" or self.kind not in ("known", "known_mean"):
            return None
        rows = [np.asarray(self.mean, float).ravel()]
        if self.kind == "known":
            w, V = np.linalg.eigh(np.asarray(self.cov, float))
            keep = w > 1e-12 * max(w.max(), 1e-300)
            rows.extend((V[:, keep] * np.sqrt(w[keep])).T)
        return np.vstack(rows)

    def bind(self, ctx):
        """Copy of the model with known parameters expressed in `ctx` frame coordinates."""
        if self.kind in ("full", "rank") or self.space == "frame":
            return self
        if self.space == "coefficients":
            mean = ctx.mean_from_coefficients(self.mean)
            cov = ctx.cov_from_coefficients(self.cov) if self.cov is not None else None
        else:
            mean = ctx.to_frame(self.mean)
            cov = ctx.cov_to_frame(self.cov) if self.cov is not None else None
        return replace(self, mean=mean, cov=cov, space="frame")

    @property
    def constant(self):
        return self.kind == "known"


def _require_frame(model):
    if model.kind in ("known", "known_mean") and model.space != "frame":
        raise RepresentationError("bind the model to a context before applying the estimator map")


def fit(model, ctx):
    """Fitted null parameters ``T(m_hat, S_hat)`` for the sample in `ctx`."""
    if model.kind == "rank":
        if ctx.rank < model.rank:
            raise RankDeficiencyError(
                f"rank-{model.rank} model needs at least {model.rank} positive covariance eigenvalues, "
                f"the sample has {ctx.rank}"
            )
        r = model.rank
        return GaussianParam(ctx.mean, ctx.eigvals[:r].copy(), ctx.cov_directions[:, :r])
    model = model.bind(ctx)
    q = ctx.rank
    if model.kind == "full":
        return GaussianParam(ctx.mean, ctx.eigvals[:q].copy(), ctx.cov_directions)
    if model.kind == "known":
        return GaussianParam.from_cov(model.mean, model.cov)
    return GaussianParam(model.mean, ctx.eigvals[:q].copy(), ctx.cov_directions)


def apply_T(model, theta):
    """Apply the estimator map to a parameter in frame coordinates."""
    _require_frame(model)
    if model.kind == "full":
        return theta
    if model.kind == "known":
        return GaussianParam.from_cov(model.mean, model.cov)
    if model.kind == "known_mean":
        return GaussianParam(model.mean, theta.eigvals, theta.eigvecs)
    order = np.argsort(-theta.eigvals, kind="stable")
    lam = theta.eigvals[order]
    V = theta.eigvecs[:, order]
    r = model.rank
    if lam.size > r:
        top = max(abs(lam[0]), 1e-300)
        if lam[r - 1] - lam[r] < GAP_TOL * top:
            raise NondifferentiableError(
                f"rank-{r} truncation is not differentiable: eigengap lambda_{r} - lambda_{r + 1} = "
                f"{lam[r - 1] - lam[r]:.3e} below {GAP_TOL:g} * lambda_1"
            )
    keep = min(r, int(np.sum(lam > 0)))
    return GaussianParam(theta.mean, lam[:keep], V[:, :keep])
