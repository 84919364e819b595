import numpy as np
import pytest

from kntest.embeddings import GaussianParam, OuterKernel, embed_cross_inner, embed_eval, embed_norm_sq
from kntest.errors import ParameterError, PreconditionError


def diag_param(m, lam):
    m = np.asarray(m, float)
    return GaussianParam(m, np.asarray(lam, float), np.eye(m.size))


def test_gaussian_norm_value():
    th = diag_param([0.0, 0.0], [1.0, 0.5])
    # |I + 4 sigma S|^(-1/2) with sigma = 0.5
    assert embed_norm_sq(OuterKernel("gaussian", 0.5), th) == pytest.approx(0.408248290463863016, rel=1e-14)


def test_gaussian_eval_value():
    th = diag_param([0.2, 0.1], [0.5, 2.0])
    val = embed_eval(OuterKernel("gaussian", 0.25), th, [[1.0, -1.0]])[0]
    assert val == pytest.approx(0.478358242482017053, rel=1e-13)


def test_exponential_values():
    k = OuterKernel("exponential")
    th = diag_param([0.2, 0.1], [0.5, 0.2])
    assert embed_eval(k, th, [[0.5, -0.3]])[0] == pytest.approx(1.152000504260808544, rel=1e-13)
    th2 = diag_param([0.3, 0.0], [0.5, 0.2])
    assert embed_norm_sq(k, th2) == pytest.approx(1.410934193362848720, rel=1e-13)


def test_cross_inner_values():
    g = OuterKernel("gaussian", 0.4)
    a = diag_param([0.3], [0.5])
    b = diag_param([-0.2], [1.5])
    assert embed_cross_inner(g, a, b) == pytest.approx(0.596773722947727283, rel=1e-13)
    e = OuterKernel("exponential")
    a = diag_param([0.3], [0.5])
    b = diag_param([-0.2], [0.6])
    assert embed_cross_inner(e, a, b) == pytest.approx(1.156594983108303194, rel=1e-12)


def test_cross_inner_reduces_to_norm(rng):
    A = rng.standard_normal((3, 3))
    S = A @ A.T / 10
    th = GaussianParam.from_cov(rng.standard_normal(3) / 3, S)
    twin = GaussianParam.from_cov(th.mean.copy(), S.copy())
    for k in (OuterKernel("gaussian", 0.3), OuterKernel("exponential")):
        assert embed_cross_inner(k, th, twin) == pytest.approx(embed_norm_sq(k, th), rel=1e-10)


def test_cross_inner_symmetric(rng):
    a = GaussianParam.from_cov(rng.standard_normal(2) / 4, np.diag([0.3, 0.1]))
    b = GaussianParam.from_cov(rng.standard_normal(2) / 4, [[0.2, 0.05], [0.05, 0.4]])
    for k in (OuterKernel("gaussian", 1.3), OuterKernel("exponential")):
        assert embed_cross_inner(k, a, b) == pytest.approx(embed_cross_inner(k, b, a), rel=1e-12)


def test_monte_carlo_small(rng):
    k = OuterKernel("gaussian", 0.6)
    th = GaussianParam.from_cov([0.5, -0.2], [[0.8, 0.3], [0.3, 0.5]])
    Z = rng.multivariate_normal(th.mean, th.cov, size=200_000)
    y = np.array([0.1, 0.4])
    mc = np.exp(-0.6 * ((Z - y) ** 2).sum(1))
    assert abs(embed_eval(k, th, y[None])[0] - mc.mean()) < 4 * mc.std() / np.sqrt(Z.shape[0])


def test_zero_covariance_is_point_mass():
    k = OuterKernel("gaussian", 2.0)
    th = GaussianParam.from_cov([1.0, 2.0], np.zeros((2, 2)))
    assert th.rank == 0
    assert embed_norm_sq(k, th) == 1.0
    assert embed_eval(k, th, [[1.0, 2.0]])[0] == 1.0


def test_exponential_precondition():
    k = OuterKernel("exponential")
    th = diag_param([0.0, 0.0], [1.0, 0.3])
    with pytest.raises(PreconditionError, match="lambda_1"):
        embed_norm_sq(k, th)
    ok = diag_param([0.0, 0.0], [0.5, 0.3])
    with pytest.raises(PreconditionError):
        embed_cross_inner(k, th, ok)
    # the evaluation itself has no constraint
    assert np.isfinite(embed_eval(k, th, [[1.0, 1.0]])).all()


def test_kernel_and_param_validation():
    with pytest.raises(ParameterError):
        OuterKernel("laplace")
    with pytest.raises(ParameterError):
        OuterKernel("gaussian", 0.0)
    with pytest.raises(ParameterError):
        GaussianParam.from_cov([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(ParameterError):
        embed_eval(OuterKernel(), diag_param([0.0], [1.0]), [[1.0, 2.0]])


def test_from_gram_matches_direct(rng):
    X = rng.standard_normal((6, 3))
    for k in (OuterKernel("gaussian", 0.7), OuterKernel("exponential")):
        Kb = k.from_gram(X @ X.T)
        direct = np.array([[k(x, y) for y in X] for x in X])
        np.testing.assert_allclose(Kb, direct, rtol=1e-12)
