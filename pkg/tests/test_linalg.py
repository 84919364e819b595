import numpy as np
import pytest

from kntest.errors import InvalidDataError, RepresentationError, SingularOperatorError
from kntest.linalg import (
    Dataset,
    GramContext,
    center_gram,
    eigendecompose_centered,
    gram_from_vectors,
    log_det_shift,
    quadratic_forms,
)


def test_center_gram_small():
    K = np.array([[2.0, 1.0], [1.0, 2.0]])
    # H K H with H = I - J/2
    np.testing.assert_allclose(center_gram(K), [[0.5, -0.5], [-0.5, 0.5]])


def test_center_gram_rejects_nonsquare():
    with pytest.raises(InvalidDataError, match="gram matrix must be square"):
        center_gram(np.ones((3, 2)))


def test_eigendecompose_matches_covariance(rng):
    X = rng.standard_normal((30, 4))
    lam, U = eigendecompose_centered(center_gram(gram_from_vectors(X)))
    cov_ev = np.sort(np.linalg.eigvalsh(np.cov(X.T, bias=True)))[::-1]
    np.testing.assert_allclose(lam[:4], cov_ev, rtol=1e-10)
    assert np.all(lam[4:] < 1e-12)
    assert np.all(np.diff(lam) <= 1e-14)


def test_quadratic_forms_match_dense(rng):
    p = 4
    A = rng.standard_normal((p, p))
    S = A @ A.T
    lam, V = np.linalg.eigh(S)
    Y = rng.standard_normal((7, p))
    m = rng.standard_normal(p)
    c = 0.7
    dense = np.einsum("ij,ij->i", Y - m, np.linalg.solve(np.eye(p) + c * S, (Y - m).T).T)
    np.testing.assert_allclose(quadratic_forms(Y, m, lam, V, c), dense, rtol=1e-10)
    assert log_det_shift(lam, c) == pytest.approx(np.linalg.slogdet(np.eye(p) + c * S)[1], rel=1e-12)


def test_singular_shift():
    with pytest.raises(SingularOperatorError):
        quadratic_forms(np.zeros((1, 1)), np.zeros(1), np.array([-2.0]), np.eye(1), 0.5)


def test_dataset_validation():
    with pytest.raises(InvalidDataError):
        Dataset.from_vectors([[1.0, np.nan], [0.0, 1.0]])
    with pytest.raises(InvalidDataError):
        Dataset.from_vectors([[1.0, 2.0]])
    with pytest.raises(InvalidDataError, match="not symmetric"):
        Dataset.from_gram([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidDataError, match="positive semi-definite"):
        Dataset.from_gram([[1.0, 2.0], [2.0, 1.0]])


@pytest.mark.parametrize("n,d", [(20, 3), (8, 15)])
def test_gram_mode_coords_reproduce_gram(rng, n, d):
    X = rng.standard_normal((n, d)) + 2.0
    K = X @ X.T
    ctx = GramContext.from_gram(K)
    np.testing.assert_allclose(ctx.coords @ ctx.coords.T, K, atol=1e-9 * np.abs(K).max())
    vctx = GramContext.from_vectors(X)
    np.testing.assert_allclose(vctx.coords @ vctx.coords.T, K, atol=1e-9 * np.abs(K).max())
    assert ctx.rank == vctx.rank == min(n - 1, d)


def test_cov_directions_are_eigenvectors(rng):
    X = rng.standard_normal((25, 3))
    ctx = GramContext.from_vectors(X)
    V = ctx.cov_directions
    np.testing.assert_allclose(V.T @ V, np.eye(ctx.rank), atol=1e-10)
    np.testing.assert_allclose(ctx.cov @ V, V * ctx.eigvals[: ctx.rank], atol=1e-10)


def test_frame_mappings(rng):
    X = rng.standard_normal((5, 9))
    ctx = GramContext.from_vectors(X)
    a = rng.standard_normal(5)
    np.testing.assert_allclose(ctx.to_frame(X.T @ a), ctx.mean_from_coefficients(a), atol=1e-10)
    with pytest.raises(RepresentationError):
        ctx.to_frame(rng.standard_normal(9))
    g = GramContext.from_gram(X @ X.T)
    with pytest.raises(RepresentationError):
        g.to_frame(np.zeros(9))
    C = np.eye(5) / 5
    np.testing.assert_allclose(np.trace(g.cov_from_coefficients(C)), np.trace(ctx.cov), rtol=1e-10)
