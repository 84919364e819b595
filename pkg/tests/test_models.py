import numpy as np
import pytest

from kntest.embeddings import GaussianParam
from kntest.errors import InvalidArgumentError, NondifferentiableError, RankDeficiencyError, RepresentationError
from kntest.linalg import GramContext
from kntest.models import NullModel, apply_T, fit


def test_parse():
    assert NullModel.parse("full").kind == "full"
    assert NullModel.parse("rank:3").rank == 3
    m = NullModel.parse("known-mean", {"mean": [0, 0]})
    assert m.kind == "known_mean" and m.label() == "known-mean"
    with pytest.raises(InvalidArgumentError):
        NullModel.parse("rank:x")
    with pytest.raises(InvalidArgumentError):
        NullModel.parse("known", {"mean": [0]})
    with pytest.raises(InvalidArgumentError):
        NullModel.known([0, 0], [[1, 0], [0, -1]])


def test_fit_each_kind(rng):
    X = rng.standard_normal((40, 3))
    ctx = GramContext.from_vectors(X)
    full = fit(NullModel.full(), ctx)
    np.testing.assert_allclose(full.cov, np.cov(X.T, bias=True), atol=1e-12)
    np.testing.assert_allclose(full.mean, X.mean(0), atol=1e-14)
    r2 = fit(NullModel.rank_r(2), ctx)
    assert r2.rank == 2
    np.testing.assert_allclose(r2.eigvals, np.sort(np.linalg.eigvalsh(np.cov(X.T, bias=True)))[::-1][:2], rtol=1e-10)
    km = fit(NullModel.known_mean(np.ones(3)), ctx)
    np.testing.assert_allclose(km.mean, np.ones(3))
    kn = fit(NullModel.known(np.zeros(3), np.eye(3) * 2), ctx)
    np.testing.assert_allclose(kn.cov, 2 * np.eye(3), atol=1e-14)


def test_rank_deficiency(rng):
    X = np.zeros((20, 4))
    X[:, 0] = rng.standard_normal(20)
    with pytest.raises(RankDeficiencyError):
        fit(NullModel.rank_r(2), GramContext.from_vectors(X))


def test_known_outside_span(rng):
    X = rng.standard_normal((4, 8))
    m = rng.standard_normal(8)
    model = NullModel.known_mean(m)
    ctx = GramContext.from_vectors(X, extra=model.extra_vectors())
    np.testing.assert_allclose(ctx.basis @ fit(model, ctx).mean, m, atol=1e-10)
    with pytest.raises(RepresentationError):
        fit(model, GramContext.from_vectors(X))


def test_apply_T_eigengap():
    th = GaussianParam(np.zeros(3), np.array([2.0, 1.0, 1.0]), np.eye(3))
    with pytest.raises(NondifferentiableError, match="eigengap"):
        apply_T(NullModel.rank_r(2), th)
    out = apply_T(NullModel.rank_r(1), th)
    assert out.rank == 1 and out.eigvals[0] == 2.0


def test_apply_T_drops_negative_tail():
    th = GaussianParam(np.zeros(3), np.array([1.0, -1e-9, -2e-9]), np.eye(3))
    assert apply_T(NullModel.rank_r(2), th).rank == 1
