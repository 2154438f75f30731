"""Discussion-size histograms and log-log power-law fits."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .ingest import DiscussionThread


class InsufficientSupportError(ValueError):
    code = "insufficient_support"


@dataclass(frozen=True)
class SizeHistogram:
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): int(v) for k, v in sorted(self.counts.items())}
        if any(k < 1 for k in clean) or any(v < 0 for v in clean.values()):
            raise ValueError("histogram keys must be >= 1 and frequencies >= 0")
        object.__setattr__(self, "counts", clean)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {"counts": {str(k): v for k, v in self.counts.items()}, "total": self.total}


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_intercept: float
    r_squared: float

    def predict(self, k):
        return np.exp(self.log_intercept) * np.asarray(k, dtype=float) ** self.exponent

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "log_intercept": self.log_intercept, "r_squared": self.r_squared}


def histogram_from_sizes(sizes: Iterable[int]) -> SizeHistogram:
    return SizeHistogram(Counter(int(s) for s in sizes if s >= 1))


def histogram_from_threads(threads: Iterable[DiscussionThread], count_mode: str = "all_posts") -> SizeHistogram:
    """Tally discussion sizes. In ``replies`` mode threads without replies are left out (k starts at 1)."""
    if count_mode == "all_posts":
        return histogram_from_sizes(len(t.posts) for t in threads)
    if count_mode == "replies":
        return histogram_from_sizes(t.n_replies for t in threads)
    raise ValueError(f"count_mode must be 'all_posts' or 'replies', got {count_mode!r}")


def fit_power_law(hist: SizeHistogram, k_min: int = 1) -> PowerLawFit:
    """OLS of ln(frequency) on ln(k) over nonzero bins with k >= k_min."""
    if k_min < 1:
        raise ValueError("k_min must be >= 1")
    support = [(k, f) for k, f in hist.counts.items() if k >= k_min and f > 0]
    if len(support) < 3:
        raise InsufficientSupportError(f"need 3 nonzero bins with k >= {k_min}, have {len(support)}")
    x = np.log([k for k, _ in support])
    z = np.log([f for _, f in support])
    slope, intercept = np.polyfit(x, z, 1)
    ss_res = float(np.sum((z - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((z - z.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return PowerLawFit(float(slope), float(intercept), r2)


def gain_prior(hist: SizeHistogram, k: int) -> float:
    """Empirical P(size >= k)."""
    if hist.total == 0:
        raise ValueError("histogram is empty")
    return sum(f for j, f in hist.counts.items() if j >= k) / hist.total


def write_plot_tsv(hist: SizeHistogram, fit: PowerLawFit | None, stream: IO[str]) -> None:
    stream.write("k\tfrequency\tfitted\n")
    for k, f in hist.counts.items():
        fitted = "" if fit is None else f"{float(fit.predict(k)):.6g}"
        stream.write(f"{k}\t{f}\t{fitted}\n")
