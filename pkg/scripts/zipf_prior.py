"""Fit a power law to a synthetic 1/k discussion-size corpus and print the gain prior P(size >= k)."""

import argparse

from discdyn.simulate import sample_sizes
from discdyn.zipf import fit_power_law, gain_prior, histogram_from_sizes

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--k-max", type=int, default=50)
    ap.add_argument("--exponent", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=2010)
    args = ap.parse_args()

    hist = histogram_from_sizes(sample_sizes(args.n, args.k_max, args.seed, args.exponent))
    fit = fit_power_law(hist)
    print(f"fitted exponent {fit.exponent:.3f} (r^2 {fit.r_squared:.3f}) from {hist.total} discussions")
    for k in (1, 2, 5, 10, 15, 20, 30):
        print(f"P(size >= {k:>2}) = {gain_prior(hist, k):.3f}")
