"""Seeded generators for the simulation scenarios.

Every generator takes a seed and returns an ``(n, d)`` array; identical
arguments give identical arrays.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError

MIXTURE_PROPORTION = {"HA1": 0.5, "HA2": 0.8}
STUDENT_DF = 10


def _rng(seed):
    return np.random.default_rng(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF))


def mixture_params(d):
    """Second-component mean and shared covariance diagonal of the mixtures."""
    k = np.arange(1, d + 1, dtype=float)
    return 1.5 / k, 0.5 / k**2


def gen_mixture(variant, d, n, seed=0):
    """Two-Gaussian mixture with means ``0`` and ``1.5 (1, 1/2, ..., 1/d)``.

    Both components have covariance ``0.5 diag(1, 1/4, ..., 1/d^2)``; the
    first is drawn with probability 0.5 (HA1) or 0.8 (HA2).
    """
    variant = variant.upper()
    if variant not in MIXTURE_PROPORTION:
        raise InvalidArgumentError(f"mixture variant must be HA1 or HA2, got {variant!r}")
    if d < 1 or n < 1:
        raise InvalidArgumentError("d and n must be >= 1")
    rng = _rng(seed)
    mu2, var = mixture_params(d)
    first = rng.random(n) < MIXTURE_PROPORTION[variant]
    Z = rng.standard_normal((n, d)) * np.sqrt(var)
    return Z + np.where(first[:, None], 0.0, mu2[None, :])


def lowrank_eigvals(decay, r):
    r_idx = np.arange(1, r + 1, dtype=float)
    if decay == "poly":
        return 1.0 / r_idx
    if decay == "exp":
        return np.exp(-0.2 * r_idx)
    raise InvalidArgumentError(f"decay must be 'poly' or 'exp', got {decay!r}")


def gen_lowrank(decay, r_star, d, n, seed=0):
    """Zero-mean Gaussian rows with covariance ``diag(lambda_1..lambda_r*, 0, ...)``."""
    if r_star > d:
        raise InvalidArgumentError(f"rank {r_star} exceeds dimension {d}")
    if r_star < 1 or n < 1:
        raise InvalidArgumentError("rank and n must be >= 1")
    lam = lowrank_eigvals(decay, r_star)
    X = np.zeros((n, d))
    X[:, :r_star] = _rng(seed).standard_normal((n, r_star)) * np.sqrt(lam)
    return X


def gen_lowrank_noisy(r_star, d, n, rho, seed=0, decay="exp"):
    """Low-rank Gaussian signal plus Student-t noise scaled by ``lambda_r* / rho``.

    Noise entries are i.i.d. over coordinates and observations with
    ``STUDENT_DF`` degrees of freedom.
    """
    if not rho > 0:
        raise InvalidArgumentError(f"signal-to-noise ratio must be positive, got {rho}")
    Z = gen_lowrank(decay, r_star, d, n, seed)
    lam = lowrank_eigvals(decay, r_star)
    # separate stream so the signal matches gen_lowrank exactly
    eta = np.random.default_rng(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(1,)))
    return Z + (lam[-1] / rho) * eta.standard_t(STUDENT_DF, size=(n, d))


@dataclass(frozen=True)
class Scenario:
    """A named simulation setting.

    kind : 'null_gaussian', 'HA1', 'HA2', 'lowrank' or 'lowrank_noisy'.
    """

    kind: str
    d: int
    n: int
    seed: int = 0
    decay: str = "exp"
    r_star: int = 3
    rho: float = 1.0

    def generate(self, seed=None):
        seed = self.seed if seed is None else seed
        k = self.kind
        if k == "null_gaussian":
            return _rng(seed).standard_normal((self.n, self.d))
        if k.upper() in MIXTURE_PROPORTION:
            return gen_mixture(k, self.d, self.n, seed)
        if k == "lowrank":
            return gen_lowrank(self.decay, self.r_star, self.d, self.n, seed)
        if k == "lowrank_noisy":
            return gen_lowrank_noisy(self.r_star, self.d, self.n, self.rho, seed, self.decay)
        raise InvalidArgumentError(f"unknown scenario kind {k!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
