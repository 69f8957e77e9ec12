"""Compiled kernel vs numpy fallback on a few representative workloads.

Run with ``python -m beepmis.bench`` or ``beepmis bench``. Each workload
is simulated by both backends with identical seeds; the results must
agree exactly, and the table reports mean milliseconds per emulated round.
"""

from __future__ import annotations

import argparse
import time

from .beep_mis import ProtocolParams
from .fastsim import _compiled_simulate, simulate_beep_mis
from .graph import gen_erdos_renyi, gen_random_regular

WORKLOADS = [
    ("G(60, 0.1), I=120", lambda: gen_erdos_renyi(60, 0.1, 1), 120),
    ("4-regular n=200, I=120", lambda: gen_random_regular(200, 4, 1), 120),
    ("64-regular n=200, I=120", lambda: gen_random_regular(200, 64, 1), 120),
    ("G(2000, 0.005), I=120", lambda: gen_erdos_renyi(2000, 0.005, 1), 120),
    ("4-regular n=200, I=1000", lambda: gen_random_regular(200, 4, 1), 1000),
]


def time_backend(g, params, backend, seeds):
    rounds = 0
    verdicts = []
    start = time.perf_counter()
    for s in seeds:
        res = simulate_beep_mis(g, params, s, backend=backend)
        rounds += res.rounds_run
        verdicts.append(res.verdict)
    return time.perf_counter() - start, rounds, verdicts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3, help="seeds per workload")
    args = ap.parse_args(argv)
    if _compiled_simulate is None:
        print("compiled kernel not available; only the fallback can run")
        return
    seeds = range(args.repeat)
    print(f"{'workload':<26} {'compiled ms/rd':>15} {'python ms/rd':>13} {'speedup':>8}  agree")
    for name, make, interval in WORKLOADS:
        g = make()
        params = ProtocolParams.with_interval(interval, 0.2, g.max_degree())
        tc, rc, vc = time_backend(g, params, "compiled", seeds)
        tp, rp, vp = time_backend(g, params, "python", seeds)
        agree = vc == vp and rc == rp
        print(f"{name:<26} {1e3 * tc / rc:>15.3f} {1e3 * tp / rp:>13.3f} {tp / tc:>7.1f}x  {agree}")


if __name__ == "__main__":
    main()
