"""Monte Carlo recovery of an FOPDT model from Poisson-simulated discussions.

Prints median relative errors per identification method, next to the spread
of the realised reply totals (the floor for any gain estimate).

    python scripts/noisy_recovery.py --K 27 --T 5 --L 1 --n 200
"""

import argparse
import time
from datetime import timedelta

import numpy as np

from discdyn.identify import FOPDT_METHODS, fit
from discdyn.ingest import build_step_response, mark_steady_state
from discdyn.response_models import FopdtModel
from discdyn.simulate import DEFAULT_START, simulate_threads


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=float, default=27)
    ap.add_argument("--T", type=float, default=5)
    ap.add_argument("--L", type=float, default=1)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2011)
    ap.add_argument("--horizon", type=float, default=150)
    ap.add_argument("--quiet-window", type=float, default=72)
    args = ap.parse_args()

    model = FopdtModel(args.K, args.T, args.L)
    end = DEFAULT_START + timedelta(hours=args.horizon)
    series = [
        mark_steady_state(build_step_response(th, archive_end=end), args.quiet_window)
        for th in simulate_threads(model, args.n, args.seed, args.horizon)
    ]
    totals = np.array([s.final_count for s in series])
    print(f"model {model.K:g}/{model.T:g}/{model.L:g}, {args.n} threads, "
          f"{sum(s.complete for s in series)} reached steady state")
    print(f"reply totals: mean {totals.mean():.2f}, median |N-K|/K {np.median(np.abs(totals - model.K)) / model.K:.1%}")
    print(f"{'method':<14}{'K':>8}{'T':>8}{'L+T':>8}{'failed':>8}{'sec':>7}")
    for method in FOPDT_METHODS:
        t0 = time.perf_counter()
        est, failed = [], 0
        for s in series:
            try:
                m = fit(s, method).model
            except ValueError:
                failed += 1
                continue
            est.append((m.K, m.T, m.L + m.T))
        est = np.array(est)
        truth = np.array([model.K, model.T, model.L + model.T])
        med = np.median(np.abs(est - truth) / truth, axis=0)
        print(f"{method:<14}{med[0]:>8.1%}{med[1]:>8.1%}{med[2]:>8.1%}{failed:>8}{time.perf_counter() - t0:>7.1f}")


if __name__ == "__main__":
    main()
