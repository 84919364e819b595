import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def dense_gaussian_statistic(X, sigma, m=None, S=None):
    """Term-by-term statistic in ambient coordinates (independent of the package)."""
    n, d = X.shape
    if m is None:
        m = X.mean(axis=0)
    if S is None:
        S = np.cov(X.T, bias=True).reshape(d, d)
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    term1 = np.exp(-sigma * sq).mean()
    A = np.eye(d) + 2 * sigma * S
    diff = X - m
    q = np.einsum("ij,ij->i", diff, np.linalg.solve(A, diff.T).T)
    term2 = np.mean(np.linalg.det(A) ** -0.5 * np.exp(-sigma * q))
    term3 = np.linalg.det(np.eye(d) + 4 * sigma * S) ** -0.5
    return n * (term1 - 2 * term2 + term3)


def dense_exponential_statistic(X, m=None, S=None):
    n, d = X.shape
    if m is None:
        m = X.mean(axis=0)
    if S is None:
        S = np.cov(X.T, bias=True).reshape(d, d)
    term1 = np.exp(X @ X.T).mean()
    term2 = np.mean(np.exp(X @ m + 0.5 * np.einsum("ij,jk,ik->i", X, S, X)))
    I = np.eye(d)
    term3 = np.linalg.det(I - S @ S) ** -0.5 * np.exp(m @ np.linalg.solve(I - S, m))
    return n * (term1 - 2 * term2 + term3)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
