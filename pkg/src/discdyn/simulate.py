"""Synthetic discussions.

Replies arrive as a nonhomogeneous Poisson process whose intensity is the
derivative of the model response, so the expected cumulative reply count
tracks the closed-form curve. That Poisson assumption is ours; nothing in
the reference data says posts are Poisson.

Randomness comes from ``numpy.random.default_rng`` (PCG64), seeded
explicitly, so identical configs reproduce identical threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .ingest import SECONDS_PER_UNIT, DiscussionThread, PostRecord, StepResponseSeries
from .response_models import FopdtModel, LogisticModel, response, response_rate

DEFAULT_START = datetime(2011, 7, 22, 17, 23, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SimulationConfig:
    model: FopdtModel | LogisticModel
    seed: int
    horizon: float
    gap: tuple[float, float] | None = None
    thread_id: str = "sim"
    start: datetime = DEFAULT_START

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.gap is not None:
            a, b = self.gap
            if not 0 <= a <= b <= self.horizon:
                raise ValueError(f"gap {self.gap} must lie within [0, {self.horizon}]")
        if isinstance(self.model, LogisticModel) and self.model.b < 0:
            raise ValueError("logistic simulation needs b >= 0 (nonnegative intensity)")


def intensity_bound(model: FopdtModel | LogisticModel) -> float:
    """Constant majorant of the reply intensity used for thinning."""
    if isinstance(model, FopdtModel):
        return model.K / model.T
    return model.K * model.b / 4.0


def intensity(config: SimulationConfig, t):
    t = np.asarray(t, dtype=float)
    lam = response_rate(config.model, t)
    if config.gap is not None:
        a, b = config.gap
        lam = np.where((t > a) & (t < b), 0.0, lam)
    return lam


def expected_replies(config: SimulationConfig, t: float | None = None) -> float:
    """Expected number of replies on [0, t] (default: the horizon), net of the gap."""
    t = config.horizon if t is None else t
    model = config.model
    total = float(response(model, t) - response(model, 0.0))
    if config.gap is not None:
        a, b = config.gap
        a, b = min(a, t), min(b, t)
        total -= float(response(model, b) - response(model, a))
    return total


def simulate_arrivals(config: SimulationConfig) -> np.ndarray:
    """Reply arrival times (in model time units) by Lewis-Shedler thinning."""
    rng = np.random.default_rng(config.seed)
    lam_max = intensity_bound(config.model)
    if lam_max <= 0:
        return np.empty(0)
    n = rng.poisson(lam_max * config.horizon)
    candidates = np.sort(rng.uniform(0.0, config.horizon, size=n))
    keep = rng.uniform(0.0, lam_max, size=n) < intensity(config, candidates)
    return candidates[keep]


def simulate_thread(config: SimulationConfig) -> DiscussionThread:
    unit = SECONDS_PER_UNIT[config.model.time_unit]
    arrivals = simulate_arrivals(config)
    posts = [PostRecord(config.thread_id, config.start)]
    posts += [PostRecord(config.thread_id, config.start + timedelta(seconds=float(a) * unit)) for a in arrivals]
    return DiscussionThread(config.thread_id, tuple(posts))


def simulate_threads(
    model: FopdtModel | LogisticModel,
    n_threads: int,
    seed: int,
    horizon: float,
    gap: tuple[float, float] | None = None,
    start: datetime = DEFAULT_START,
    spacing: float = 0.0,
) -> list[DiscussionThread]:
    """Independent threads with per-thread seeds derived from ``seed``.

    Thread ``i`` starts ``i * spacing`` time units after ``start``.
    """
    seeds = np.random.SeedSequence(seed).generate_state(n_threads, dtype=np.uint64)
    width = max(4, len(str(n_threads - 1)))
    unit = SECONDS_PER_UNIT[model.time_unit]
    threads = []
    for i, s in enumerate(seeds):
        cfg = SimulationConfig(
            model,
            int(s),
            horizon,
            gap,
            thread_id=f"sim-{i:0{width}d}",
            start=start + timedelta(seconds=i * spacing * unit),
        )
        threads.append(simulate_thread(cfg))
    return threads


def sample_response(model: FopdtModel | LogisticModel, grid_step: float, horizon: float) -> StepResponseSeries:
    """Noiseless samples of the closed-form response on ``0, step, 2 step, ...``.

    The horizon is appended if it is not a grid node. The returned series is
    marked complete, with ``final_count`` equal to the response at the horizon.
    """
    if not 0 < grid_step <= horizon:
        raise ValueError("need 0 < grid_step <= horizon")
    n = int(math.floor(horizon / grid_step + 1e-9))
    t = np.arange(n + 1) * grid_step
    if horizon - t[-1] > 1e-9 * horizon:
        t = np.append(t, horizon)
    y = np.asarray(response(model, t), dtype=float)
    return StepResponseSeries(
        t=t,
        y=y,
        time_unit=model.time_unit,
        final_count=float(y[-1]),
        complete=True,
        horizon=float(t[-1]),
        sampled=True,
    )


def zipf_weights(k_max: int, exponent: float = 1.0) -> np.ndarray:
    k = np.arange(1, k_max + 1)
    w = k ** -float(exponent)
    return w / w.sum()


def sample_sizes(n: int, k_max: int, seed: int, exponent: float = 1.0) -> np.ndarray:
    """Draw ``n`` discussion sizes with P(k) proportional to k**-exponent on 1..k_max."""
    rng = np.random.default_rng(seed)
    return rng.choice(np.arange(1, k_max + 1), size=n, p=zipf_weights(k_max, exponent))


def simulate_size_corpus(
    n_threads: int,
    k_max: int,
    seed: int,
    exponent: float = 1.0,
    mean_gap_hours: float = 1.0,
    start: datetime = DEFAULT_START,
) -> tuple[list[DiscussionThread], np.ndarray]:
    """Threads whose total post counts follow a truncated power law.

    Returns the threads and the drawn sizes (posts per thread, initial post
    included) in generation order, as the draw log.
    """
    sizes = sample_sizes(n_threads, k_max, seed, exponent)
    rng = np.random.default_rng([seed, 1])
    width = max(4, len(str(n_threads - 1)))
    threads = []
    for i, k in enumerate(sizes):
        tid = f"zipf-{i:0{width}d}"
        origin = start + timedelta(hours=i)
        offsets = np.cumsum(rng.exponential(mean_gap_hours, size=int(k) - 1))
        posts = [PostRecord(tid, origin)]
        posts += [PostRecord(tid, origin + timedelta(hours=float(o))) for o in offsets]
        threads.append(DiscussionThread(tid, tuple(posts)))
    return threads, sizes
