"""Regenerate the frozen brute-force fixture of E[sup Y] (takes about an hour on one core)."""

import argparse
import time

from levy_shc.oracle import FIXTURE_PATH, brute_force, write_fixture

PLAN = [(1.2, 80_000), (1.5, 80_000), (1.9, 80_000), (1.05, 20_000)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=2 ** 16)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every path count")
    args = ap.parse_args()
    rows = []
    for k, (alpha, n) in enumerate(PLAN):
        t0 = time.time()
        rows.append(brute_force(alpha, max(int(n * args.scale), 100), args.steps, args.seed + k))
        print(rows[-1], f"{time.time() - t0:.0f}s", flush=True)
        write_fixture(rows, FIXTURE_PATH)


if __name__ == "__main__":
    main()
