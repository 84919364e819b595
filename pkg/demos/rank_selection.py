"""Picking the rank of a covariance by sequential testing.

Ranks 1, 2, ... are tested in turn and the first accepted one is returned.
The default level shrinks with n so that overestimation becomes rare.

Run: python demos/rank_selection.py
"""

from kntest import RankSelectConfig, select_rank
from kntest.rank import alpha_schedule
from kntest.synth import gen_lowrank, gen_lowrank_noisy

n = 600
print(f"level used at n={n}: {alpha_schedule(n):.4f}")

X = gen_lowrank("exp", 3, 20, n, seed=11)
rep = select_rank(X, RankSelectConfig(r_max=6, seed=0))
print("clean data, true rank 3 -> selected", rep.r_hat)
for entry in rep.trace:
    print(f"  rank {entry['rank']}: statistic {entry['statistic']:.4f} "
          f"quantile {entry['quantile']:.4f} reject {entry['reject']}")

# With Student noise the picture depends on the signal-to-noise ratio.
for rho in (64.0, 8.0):
    Y = gen_lowrank_noisy(3, 100, n, rho, seed=11)
    rep = select_rank(Y, RankSelectConfig(r_max=5, B=100, seed=0))
    print(f"noisy data, rho={rho:g} -> selected {rep.r_hat}")
