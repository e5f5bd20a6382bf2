"""Pilot calibration of the distributional-limit thresholds.

Simulates both example processes with numpy (independently of the Rust
simulator) at theta0 = 2, n = 30, 10^4 replicates, over 20 seeds, and reports
the KS distances of W_n / G_n to their limit laws plus the G-W correlations.

    python3 pilot/ks_pilot.py > pilot/ks_pilot.out
"""
import math

import numpy as np
from scipy import stats

THETA, N, REPS, SEEDS = 2.0, 30, 10_000, 20


def ar1(rng):
    eps = rng.standard_normal((REPS, N))
    x = np.zeros((REPS, N + 1))
    for j in range(1, N + 1):
        x[:, j] = THETA * x[:, j - 1] + eps[:, j - 1]
    prev, cur = x[:, :-1], x[:, 1:]
    s2 = (prev ** 2).sum(axis=1)
    resid = cur - THETA * prev
    w = (THETA ** 2 - 1) ** 2 / THETA ** (2 * N) * s2
    g = (prev * resid).sum(axis=1) / np.sqrt(s2)
    return w, g


def gw(rng):
    x = np.ones((REPS, N + 1), dtype=np.int64)
    for j in range(1, N + 1):
        m = x[:, j - 1]
        x[:, j] = m + rng.negative_binomial(m, 1.0 / THETA)
    prev, cur = x[:, :-1].astype(float), x[:, 1:].astype(float)
    s1 = prev.sum(axis=1)
    w = (THETA - 1) / THETA ** N * s1
    g = (cur - THETA * prev).sum(axis=1) / math.sqrt(THETA * (THETA - 1)) / np.sqrt(s1)
    return w, g


def main():
    print(f"KS 99% critical value at n={REPS}: {1.63 / math.sqrt(REPS):.4f}")
    for name, sim, wlaw in [("ar1", ar1, stats.chi2(1)), ("gw", gw, stats.expon())]:
        rows = []
        for seed in range(SEEDS):
            w, g = sim(np.random.default_rng(seed))
            rows.append((stats.kstest(w, wlaw.cdf).statistic,
                         stats.kstest(g, stats.norm.cdf).statistic,
                         np.corrcoef(g, w)[0, 1], np.corrcoef(g * g, w)[0, 1]))
        rows = np.array(rows)
        print(f"{name}: max KS(W)={rows[:, 0].max():.4f} mean={rows[:, 0].mean():.4f}; "
              f"max KS(G)={rows[:, 1].max():.4f} mean={rows[:, 1].mean():.4f}; "
              f"max|corr(G,W)|={np.abs(rows[:, 2]).max():.4f}; "
              f"max|corr(G^2,W)|={np.abs(rows[:, 3]).max():.4f}")


if __name__ == "__main__":
    main()
