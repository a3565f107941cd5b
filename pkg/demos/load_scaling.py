"""SER versus the number of user streams at a fixed array size.

Exact linear detection degrades as N approaches M because the streams
crowd each other; the damped two-stage detector holds near the
single-stream floor across the whole load range.

    python demos/load_scaling.py [--fast]
"""

import argparse
import time

from anpid import ChannelSpec, DetectorConfig, SweepSpec, ser_vs_load


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--fast", action="store_true")
    parser.add_argument("--trials", type=int, default=400)
    args = parser.parse_args()

    if args.fast:
        m, grid = 64, [8, 16, 24, 32]
    else:
        m, grid = 256, [32, 64, 96, 128]
    spec = SweepSpec(
        M=m, N=grid, modulation=16, esno_db=18.0,
        channel=ChannelSpec(model="wssus"),
        algorithms=(
            DetectorConfig("lmmse"),
            DetectorConfig("jacobi_dd", iterations=10),
            DetectorConfig("anpid_ssor", iterations=10, stage_a_iterations=3),
        ),
        trials=args.trials, master_seed=6, max_iterations=10,
        include_awgn_bound=True)

    t0 = time.time()
    records = ser_vs_load(spec)
    print(f"M = {m}, 16-QAM, Es/No 18 dB, {args.trials} trials/point "
          f"({time.time() - t0:.1f}s)\n")
    table = {}
    for r in records:
        table.setdefault(r.algorithm, {})[r.N] = r.ser
    print("   N " + " ".join(f"{a:>12s}" for a in table))
    for n in grid:
        print(f"{n:4d} " + " ".join(f"{table[a].get(n, float('nan')):12.2e}"
                                    for a in table))


if __name__ == "__main__":
    main()
