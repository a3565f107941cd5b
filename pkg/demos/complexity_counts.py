"""Measured complex-multiply counts per iteration against the budgets.

Runs each iterative detector once at 256x64 and prints the per-iteration
tally next to the tabulated budget, plus the one-off setup work (Gram
split, normalization diagonal) that every detector shares.

    python demos/complexity_counts.py
"""

import numpy as np

from anpid import (
    DetectorConfig,
    awgn,
    detect,
    make_constellation,
    multiply_budget,
    random_symbols,
    wssus_channel,
)


def main():
    m, n = 256, 64
    c = make_constellation(16)
    rng = np.random.default_rng(5)
    h = wssus_channel(m, n, 1.0, rng).H
    x = random_symbols(n, c, rng)
    sigma_v2 = m * 10 ** (-1.8)
    v = awgn(m, sigma_v2, rng)
    y = h @ x.symbols + v

    t_a = 3
    for alg in ("jacobi", "gs", "ssor", "jacobi_dd", "anpid_gs", "anpid_ssor"):
        cfg = DetectorConfig(alg, iterations=6, stage_a_iterations=t_a)
        res = detect(h, y, cfg, c, sigma_v2=sigma_v2)
        print(f"\n{alg} (setup {res.setup_multiply_count} multiplies)")
        print("  iter   measured     budget    ratio")
        for t, rec in enumerate(res.trace, start=1):
            budget = multiply_budget(alg, m, n, t, stage_a_iterations=t_a)
            print(f"  {t:4d} {rec.multiplies:10d} {budget:10.0f}"
                  f"  {rec.multiplies / budget:7.3f}")


if __name__ == "__main__":
    main()
