"""Kernel normality test for (possibly high-dimensional) Hilbert-space data."""

from .baselines import ed_test, hz_test, rp_test, whiten
from .embeddings import GaussianParam, OuterKernel, embed_cross_inner, embed_eval, embed_norm_sq
from .errors import KNTError
from .knt import TestConfig, TestReport, quantile, run_test, statistic
from .linalg import Dataset, GramContext
from .models import NullModel, fit
from .rank import RankSelectConfig, alpha_schedule, select_rank
from .synth import Scenario, gen_lowrank, gen_lowrank_noisy, gen_mixture

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "GaussianParam",
    "GramContext",
    "KNTError",
    "NullModel",
    "OuterKernel",
    "RankSelectConfig",
    "Scenario",
    "TestConfig",
    "TestReport",
    "alpha_schedule",
    "ed_test",
    "embed_cross_inner",
    "embed_eval",
    "embed_norm_sq",
    "fit",
    "gen_lowrank",
    "gen_lowrank_noisy",
    "gen_mixture",
    "hz_test",
    "quantile",
    "rp_test",
    "run_test",
    "select_rank",
    "statistic",
    "whiten",
]
