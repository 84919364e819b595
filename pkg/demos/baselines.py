"""Kernel test next to Henze-Zirkler, energy distance and random projections.

Run: python demos/baselines.py
"""

import numpy as np

from kntest import TestConfig, run_test
from kntest.baselines import ed_test, hz_test, rp_test
from kntest.synth import gen_mixture

reps, n, d = 20, 100, 2
rejections = {"kernel": 0, "hz": 0, "ed": 0, "rp(5)": 0}
for s in range(reps):
    X = gen_mixture("HA2", d, n, seed=s)
    rejections["kernel"] += run_test(X, TestConfig(B=200, seed=s)).reject
    rejections["hz"] += hz_test(X, B=200, seed=s).reject
    rejections["ed"] += ed_test(X, B=200, seed=s).reject
    rejections["rp(5)"] += rp_test(X, p=5, B=200, seed=s).reject

print(f"unbalanced mixture, d={d}, n={n}: rejection rate over {reps} samples")
for name, count in rejections.items():
    print(f"  {name:7s} {count / reps:.2f}")
