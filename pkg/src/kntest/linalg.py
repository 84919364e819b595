"""Gram-matrix machinery shared by every other module.

All computations on the sample are carried out in *frame coordinates*: an
orthonormal basis of the span of the observations, obtained from the
eigendecomposition of the centred Gram matrix.  In vector mode with
``d <= n`` the frame is simply the ambient basis, so nothing is rotated.
Whatever the mode, inner products between frame coordinates reproduce the
Gram matrix, which is all the embeddings ever need.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg as sla

from .errors import InvalidDataError, NumericalError, RepresentationError, SingularOperatorError

SYM_TOL = 1e-10
PSD_TOL = 1e-8
RETAIN_TOL = 1e-12


def _as_matrix(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidDataError(f"{name} must be a 2-d array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidDataError(f"{name} contains non-finite entries")
    return X


def gram_from_vectors(X):
    """Gram matrix ``K[i, j] = <X[i], X[j]>`` of the rows of `X`."""
    X = _as_matrix(X)
    if X.shape[0] < 2:
        raise InvalidDataError("at least two observations are required")
    K = X @ X.T
    return 0.5 * (K + K.T)


def _check_symmetric(K):
    scale = max(1.0, float(np.max(np.abs(K)))) if K.size else 1.0
    if np.max(np.abs(K - K.T)) > SYM_TOL * scale:
        raise InvalidDataError("gram matrix is not symmetric")


def center_gram(K):
    """Doubly centred Gram matrix ``H K H`` with ``H = I - J/n``."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InvalidDataError("gram matrix must be square")
    _check_symmetric(K)
    row = K.mean(axis=0)
    Kc = K - row[None, :] - row[:, None] + row.mean()
    return 0.5 * (Kc + Kc.T)


def eigendecompose_centered(Kc):
    """Spectrum of the empirical covariance from the centred Gram matrix.

    Parameters
    ----------
    Kc : ndarray (n, n)
        Centred Gram matrix.

    Returns
    -------
    eigvals : ndarray (n,)
        Eigenvalues of ``Kc / n`` in descending order, i.e. the eigenvalues
        of the (1/n) empirical covariance operator.  Round-off negatives are
        set to zero.
    eigvecs : ndarray (n, n)
        Orthonormal eigenvectors, column ``s`` pairs with ``eigvals[s]``.
    """
    Kc = np.asarray(Kc, dtype=float)
    n = Kc.shape[0]
    try:
        w, U = sla.eigh(Kc, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition of the {n}x{n} centred gram matrix failed: {exc}") from exc
    w = w[::-1] / n
    U = U[:, ::-1]
    top = max(w[0], 0.0)
    if w[-1] < -PSD_TOL * max(top, 1e-300) and w[-1] < -1e-12:
        raise NumericalError(
            f"centred gram matrix is not positive semi-definite (eigenvalue {w[-1]:.3e}, largest {top:.3e})"
        )
    w = np.where(w < 0.0, 0.0, w)
    return w, U


def quadratic_forms(points, mean, eigvals, eigvecs, c):
    """``q_i(c) = ||(I + c S)^{-1/2} (y_i - m)||^2`` for ``S = V diag(lam) V^T``.

    Computed spectrally; directions outside the span of `eigvecs` are left
    untouched by the operator.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eigvals = np.asarray(eigvals, dtype=float)
    shift = 1.0 + c * eigvals
    if np.any(shift <= 0.0):
        bad = eigvals[shift <= 0.0][0]
        raise SingularOperatorError(f"1 + c*lambda = {1.0 + c * bad:.3e} <= 0 for lambda = {bad:.6g}, c = {c:.6g}")
    diff = points - np.asarray(mean, dtype=float)[None, :]
    q = np.einsum("ij,ij->i", diff, diff)
    if eigvals.size:
        proj = diff @ eigvecs
        q = q + (proj**2) @ (1.0 / shift - 1.0)
    return np.maximum(q, 0.0)


def log_det_shift(eigvals, c):
    """``log |I + c S|`` given the spectrum of ``S``."""
    eigvals = np.asarray(eigvals, dtype=float)
    shift = 1.0 + c * eigvals
    if np.any(shift <= 0.0):
        raise SingularOperatorError(f"log|I + c S| undefined: factor {shift.min():.3e} <= 0 (c = {c:.6g})")
    return float(np.sum(np.log1p(c * eigvals)))


@dataclass(frozen=True)
class Dataset:
    """A sample given either as vectors (rows) or through its Gram matrix."""

    mode: str
    values: np.ndarray

    def __post_init__(self):
        if self.mode not in ("vectors", "gram"):
            raise InvalidDataError(f"unknown dataset mode {self.mode!r}")
        if self.mode == "vectors":
            X = _as_matrix(self.values)
            if X.shape[0] < 2:
                raise InvalidDataError("at least two observations are required")
            object.__setattr__(self, "values", X)
        else:
            K = np.asarray(self.values, dtype=float)
            if K.ndim != 2 or K.shape[0] != K.shape[1]:
                raise InvalidDataError("gram matrix must be square")
            if K.shape[0] < 2:
                raise InvalidDataError("at least two observations are required")
            if not np.all(np.isfinite(K)):
                raise InvalidDataError("gram matrix contains non-finite entries")
            _check_symmetric(K)
            K = 0.5 * (K + K.T)
            ev = np.linalg.eigvalsh(K)
            if ev[0] < -PSD_TOL * max(ev[-1], 0.0) and ev[0] < -1e-12:
                raise InvalidDataError(f"gram matrix is not positive semi-definite (eigenvalue {ev[0]:.3e})")
            object.__setattr__(self, "values", K)

    @classmethod
    def from_vectors(cls, X):
        return cls("vectors", X)

    @classmethod
    def from_gram(cls, K):
        return cls("gram", K)

    @property
    def n(self):
        return self.values.shape[0]

    def gram(self):
        return gram_from_vectors(self.values) if self.mode == "vectors" else self.values


@dataclass(frozen=True, eq=False)
class GramContext:
    """Immutable bundle of everything derived from the Gram matrix.

    Attributes
    ----------
    K, Kc : ndarray (n, n)
        Gram matrix and its centred version.
    eigvals : ndarray (n,)
        Eigenvalues of ``Kc / n`` (empirical covariance spectrum), descending.
    eigvecs : ndarray (n, n)
        Matching orthonormal eigenvectors of ``Kc``.
    coords : ndarray (n, p)
        Frame coordinates of the observations; ``coords @ coords.T == K``.
    basis : ndarray (d, p) or None
        Ambient expression of the frame in vector mode (None means identity).
        Gram-mode contexts have no ambient space and keep None here.
    """

    K: np.ndarray
    Kc: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    coords: np.ndarray
    mode: str = "vectors"
    basis: np.ndarray = field(default=None)

    @classmethod
    def from_dataset(cls, data, extra=None):
        if data.mode == "vectors":
            return cls.from_vectors(data.values, extra=extra)
        return cls.from_gram(data.values)

    @classmethod
    def from_vectors(cls, X, extra=None):
        """Context for row vectors `X`.

        `extra` holds ambient vectors (rows) that must be representable in the
        frame, e.g. a known mean lying outside the span of the sample.  It
        only matters when ``d > n``.
        """
        X = _as_matrix(X)
        n, d = X.shape
        if n < 2:
            raise InvalidDataError("at least two observations are required")
        K = gram_from_vectors(X)
        Kc = center_gram(K)
        lam, U = eigendecompose_centered(Kc)
        basis = None
        coords = X
        if d > n:
            rows = X if extra is None else np.vstack([X, _as_matrix(extra, "extra")])
            _, s, Vt = np.linalg.svd(rows, full_matrices=False)
            keep = s > RETAIN_TOL * max(s[0], 1e-300) if s.size else np.zeros(0, bool)
            basis = Vt[keep].T
            coords = X @ basis
        return cls(K=K, Kc=Kc, eigvals=lam, eigvecs=U, coords=coords, mode="vectors", basis=basis)

    @classmethod
    def from_gram(cls, K):
        K = np.asarray(K, dtype=float)
        Kc = center_gram(K)
        K = 0.5 * (K + K.T)
        n = K.shape[0]
        lam, U = eigendecompose_centered(Kc)
        q = int(np.sum(lam > RETAIN_TOL * max(lam[0], 1e-300))) if lam[0] > 0 else 0
        scale = np.sqrt(n * lam[:q])
        centred = U[:, :q] * scale
        ones = np.ones(n)
        mean_proj = (ones @ K @ U[:, :q]) / (n * scale) if q else np.zeros(0)
        resid = float(ones @ K @ ones) / n**2 - float(mean_proj @ mean_proj)
        cols = [centred + mean_proj[None, :]]
        if resid > RETAIN_TOL * max(np.trace(K) / n, 1e-300):
            cols.append(np.full((n, 1), np.sqrt(resid)))
        coords = np.hstack(cols) if cols[0].size or len(cols) > 1 else np.zeros((n, 0))
        return cls(K=K, Kc=Kc, eigvals=lam, eigvecs=U, coords=coords, mode="gram")

    @property
    def n(self):
        return self.K.shape[0]

    @property
    def dim(self):
        """Dimension of the frame."""
        return self.coords.shape[1]

    @cached_property
    def rank(self):
        """Number of retained (strictly positive) covariance eigenvalues."""
        lam = self.eigvals
        if lam[0] <= 0.0:
            return 0
        return int(np.sum(lam > RETAIN_TOL * lam[0]))

    @cached_property
    def mean(self):
        """Empirical mean in frame coordinates."""
        return self.coords.mean(axis=0)

    @cached_property
    def cov_directions(self):
        """Unit eigen-directions of the empirical covariance, frame coords (p, q)."""
        q = self.rank
        centred = self.coords - self.mean
        V = centred.T @ self.eigvecs[:, :q] / np.sqrt(self.n * self.eigvals[:q])
        return V

    @cached_property
    def cov(self):
        centred = self.coords - self.mean
        S = centred.T @ centred / self.n
        return 0.5 * (S + S.T)

    def to_frame(self, vector):
        """Frame coordinates of an ambient vector (vector mode only)."""
        if self.mode != "vectors":
            raise RepresentationError("gram-mode data carries no ambient coordinates; supply sample coefficients")
        v = np.asarray(vector, dtype=float).ravel()
        if self.basis is None:
            if v.size != self.dim:
                raise RepresentationError(f"expected a vector of length {self.dim}, got {v.size}")
            return v
        if v.size != self.basis.shape[0]:
            raise RepresentationError(f"expected a vector of length {self.basis.shape[0]}, got {v.size}")
        c = self.basis.T @ v
        if np.linalg.norm(v - self.basis @ c) > 1e-8 * max(1.0, np.linalg.norm(v)):
            raise RepresentationError("vector lies outside the span of the sample frame")
        return c

    def cov_to_frame(self, cov):
        S = np.asarray(cov, dtype=float)
        if self.mode != "vectors":
            raise RepresentationError("gram-mode data carries no ambient coordinates; supply sample coefficients")
        if self.basis is None:
            if S.shape != (self.dim, self.dim):
                raise RepresentationError(f"expected a {self.dim}x{self.dim} covariance, got {S.shape}")
            return S
        B = self.basis
        if S.shape != (B.shape[0], B.shape[0]):
            raise RepresentationError(f"expected a {B.shape[0]}x{B.shape[0]} covariance, got {S.shape}")
        C = B.T @ S @ B
        if np.linalg.norm(S - B @ C @ B.T) > 1e-8 * max(1.0, np.linalg.norm(S)):
            raise RepresentationError("covariance range lies outside the span of the sample frame")
        return C

    def mean_from_coefficients(self, a):
        """Frame coordinates of ``sum_i a_i Y_i``."""
        a = np.asarray(a, dtype=float).ravel()
        if a.size != self.n:
            raise RepresentationError(f"mean coefficients must have length n={self.n}, got {a.size}")
        return self.coords.T @ a

    def cov_from_coefficients(self, C):
        """Frame matrix of ``sum_ij C_ij (Y_i - m)(Y_j - m)^T`` (empirical mean m)."""
        C = np.asarray(C, dtype=float)
        if C.shape != (self.n, self.n):
            raise RepresentationError(f"covariance coefficients must be {self.n}x{self.n}, got {C.shape}")
        Xc = self.coords - self.mean
        S = Xc.T @ C @ Xc
        return 0.5 * (S + S.T)
