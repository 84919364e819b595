"""Testing normality of a sample, and what the report contains.

Run: python demos/basic_test.py
"""

import numpy as np

from kntest import TestConfig, run_test
from kntest.synth import gen_mixture

rng = np.random.default_rng(3)

# A correlated Gaussian sample should be accepted most of the time.
A = np.array([[1.0, 0.0, 0.0], [0.8, 0.6, 0.0], [0.1, -0.3, 0.5]])
X = rng.standard_normal((250, 3)) @ A.T
rep = run_test(X, TestConfig(B=250, seed=1))
print(f"gaussian sample: statistic {rep.statistic:.4f}, quantile {rep.quantile:.4f}, "
      f"p = {rep.p_value:.3f}, reject = {rep.reject}")

# A two-component mixture with the same dimension is rejected.
Y = gen_mixture("HA1", 3, 250, seed=5)
rep = run_test(Y, TestConfig(B=250, seed=1))
print(f"mixture sample:  statistic {rep.statistic:.4f}, quantile {rep.quantile:.4f}, "
      f"p = {rep.p_value:.3f}, reject = {rep.reject}")

# The bandwidth chosen by the median heuristic and the timings are recorded.
print("kernel:", rep.kernel)
print("timing (ms):", {k: round(v, 1) for k, v in rep.timing_ms.items()})

# Heavy tails: a Student t sample with 4 degrees of freedom.
T = rng.standard_t(4, size=(400, 2))
rep = run_test(T, TestConfig(B=250, seed=2))
print(f"student t(4):    p = {rep.p_value:.3f}, reject = {rep.reject}")
