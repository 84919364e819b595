"""Closed-form kernel mean embeddings of Gaussian measures.

For the Gaussian outer kernel ``k(x, y) = exp(-sigma ||x - y||^2)`` and the
exponential kernel ``k(x, y) = exp(<x, y>)`` the embedding
``N(m, S) = E k(Z, .)`` with ``Z ~ N(m, S)`` has a closed form, as do its
squared norm and the inner product between two embeddings.  Everything is
expressed through the spectrum of the covariance, in frame coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PreconditionError, SingularOperatorError
from .linalg import RETAIN_TOL, log_det_shift, quadratic_forms

EXP_TOL = 1e-10


@dataclass(frozen=True)
class OuterKernel:
    """Kernel on the sample space defining the test RKHS.

    Parameters
    ----------
    kind : {'gaussian', 'exponential'}
    sigma : float
        Bandwidth of ``exp(-sigma ||x - y||^2)``; ignored for 'exponential'.
    """

    kind: str = "gaussian"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "exponential"):
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError(f"gaussian kernel needs sigma > 0, got {self.sigma}")

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "gaussian":
            return float(np.exp(-self.sigma * np.sum((x - y) ** 2)))
        return float(np.exp(np.dot(x, y)))

    def from_gram(self, K):
        """Kernel matrix from a Gram matrix of inner products."""
        K = np.asarray(K, dtype=float)
        if self.kind == "gaussian":
            diag = np.diag(K)
            sq = np.maximum(diag[:, None] + diag[None, :] - 2.0 * K, 0.0)
            Kbar = np.exp(-self.sigma * sq)
            np.fill_diagonal(Kbar, 1.0)
            return Kbar
        return np.exp(K)

    def to_dict(self):
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": float(self.sigma)}
        return {"kind": "exponential"}


@dataclass(frozen=True, eq=False)
class GaussianParam:
    """Gaussian parameter ``(m, S)`` in frame coordinates.

    ``S = eigvecs @ diag(eigvals) @ eigvecs.T``; only the retained part of the
    spectrum is stored.  Parameters built by the estimators are PSD; the
    linearisation code may also build slightly indefinite ones, which the
    closed forms handle by analytic continuation.
    """

    mean: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).ravel()
        lam = np.asarray(self.eigvals, dtype=float).ravel()
        V = np.asarray(self.eigvecs, dtype=float).reshape(m.size, lam.size)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "eigvals", lam)
        object.__setattr__(self, "eigvecs", V)

    @classmethod
    def from_cov(cls, mean, cov, psd=True):
        """Build from a covariance matrix, keeping eigenvalues above round-off.

        With ``psd=True`` negative eigenvalues must be round-off and are
        dropped together with near-zero ones; otherwise the full spectrum is
        kept as is (indefinite perturbations).
        """
        S = np.asarray(cov, dtype=float)
        S = 0.5 * (S + S.T)
        if S.size == 0:
            return cls(mean, np.zeros(0), np.zeros((np.size(mean), 0)))
        w, V = np.linalg.eigh(S)
        w, V = w[::-1], V[:, ::-1]
        top = np.max(np.abs(w))
        if top == 0.0:
            return cls(mean, np.zeros(0), np.zeros((S.shape[0], 0)))
        if psd:
            if w[-1] < -1e-8 * top:
                raise ParameterError(f"covariance is not positive semi-definite (eigenvalue {w[-1]:.3e})")
            keep = w > RETAIN_TOL * top
            return cls(mean, w[keep], V[:, keep])
        return cls(mean, w, V)

    @property
    def dim(self):
        return self.mean.size

    @property
    def rank(self):
        return self.eigvals.size

    @property
    def cov(self):
        V = self.eigvecs
        return (V * self.eigvals) @ V.T

    def norm(self):
        """Norm of ``(m, S)`` in the parameter space (mean norm + Hilbert-Schmidt)."""
        return float(np.sqrt(self.mean @ self.mean + np.sum(self.eigvals**2)))

    def validate(self, tol=1e-8):
        lam = self.eigvals
        if np.any(lam < 0):
            raise ParameterError("covariance eigenvalues must be nonnegative")
        if np.any(np.diff(lam) > tol * max(1.0, lam[0] if lam.size else 1.0)):
            raise ParameterError("covariance eigenvalues must be sorted in descending order")
        G = self.eigvecs.T @ self.eigvecs
        if lam.size and np.max(np.abs(G - np.eye(lam.size))) > tol:
            raise ParameterError("covariance directions are not orthonormal")
        return self


def outer_kernel_matrix(kernel, ctx):
    """``Kbar[i, j] = k(Y_i, Y_j)`` computed from the context's Gram matrix."""
    return kernel.from_gram(ctx.K)


def _check_exponential(theta, what):
    lam = theta.eigvals
    if lam.size and np.max(np.abs(lam)) >= 1.0 - EXP_TOL:
        top = lam[np.argmax(np.abs(lam))]
        raise PreconditionError(
            f"exponential kernel {what} requires every covariance eigenvalue to satisfy |lambda| < 1; "
            f"largest is lambda_1 = {top:.6g}"
        )


def embed_eval(kernel, theta, points):
    """Evaluate the embedding ``N(m, S)`` at each row of `points`."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != theta.dim:
        raise ParameterError(f"points have dimension {points.shape[1]}, parameter has {theta.dim}")
    if kernel.kind == "gaussian":
        c = 2.0 * kernel.sigma
        try:
            ld = log_det_shift(theta.eigvals, c)
            q = quadratic_forms(points, theta.mean, theta.eigvals, theta.eigvecs, c)
        except SingularOperatorError as exc:
            raise ParameterError(f"invalid covariance spectrum for the gaussian embedding: {exc}") from exc
        return np.exp(-0.5 * ld - kernel.sigma * q)
    lin = points @ theta.mean
    if theta.rank:
        lin = lin + 0.5 * ((points @ theta.eigvecs) ** 2) @ theta.eigvals
    return np.exp(lin)


def embed_norm_sq(kernel, theta):
    """Squared RKHS norm ``||N(m, S)||^2 = E k(Z, Z')``."""
    if kernel.kind == "gaussian":
        try:
            return float(np.exp(-0.5 * log_det_shift(theta.eigvals, 4.0 * kernel.sigma)))
        except SingularOperatorError as exc:
            raise ParameterError(f"invalid covariance spectrum for the gaussian embedding: {exc}") from exc
    _check_exponential(theta, "norm")
    lam = theta.eigvals
    m = theta.mean
    logdet = np.sum(np.log1p(-(lam**2)))
    quad = m @ m
    if lam.size:
        proj = theta.eigvecs.T @ m
        quad = quad + np.sum(lam / (1.0 - lam) * proj**2)
    return float(np.exp(-0.5 * logdet + quad))


def embed_cross_inner(kernel, theta1, theta2):
    """Inner product ``<N(m1, S1), N(m2, S2)> = E k(Z1, Z2)``, Z1, Z2 independent."""
    if theta1 is theta2:
        return embed_norm_sq(kernel, theta1)
    if theta1.dim != theta2.dim:
        raise ParameterError("parameters live in frames of different dimension")
    if kernel.kind == "gaussian":
        S = theta1.cov + theta2.cov
        w, V = np.linalg.eigh(0.5 * (S + S.T))
        c = 2.0 * kernel.sigma
        try:
            ld = log_det_shift(w, c)
            q = quadratic_forms(theta1.mean[None, :], theta2.mean, w, V, c)[0]
        except SingularOperatorError as exc:
            raise ParameterError(f"invalid covariance pair for the gaussian embedding: {exc}") from exc
        return float(np.exp(-0.5 * ld - kernel.sigma * q))
    _check_exponential(theta1, "inner product")
    _check_exponential(theta2, "inner product")
    S1, S2 = theta1.cov, theta2.cov
    P = S1 @ S2
    ev = np.linalg.eigvals(P)
    if ev.size and np.max(ev.real) >= 1.0 - EXP_TOL:
        raise PreconditionError(
            f"exponential kernel inner product requires I - S1^(1/2) S2 S1^(1/2) > 0; "
            f"its smallest eigenvalue is {1.0 - np.max(ev.real):.3e}"
        )
    eye = np.eye(theta1.dim)
    M12 = eye - P
    M21 = eye - P.T
    sign, logdet = np.linalg.slogdet(M12)
    if sign <= 0:
        raise PreconditionError("exponential kernel inner product: det(I - S1 S2) <= 0")
    m1, m2 = theta1.mean, theta2.mean
    quad = (
        0.5 * m1 @ (S2 @ np.linalg.solve(M12, m1))
        + m1 @ np.linalg.solve(M21, m2)
        + 0.5 * m2 @ (S1 @ np.linalg.solve(M21, m2))
    )
    return float(np.exp(-0.5 * logdet + quad))
