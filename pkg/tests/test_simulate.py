import io

import numpy as np
import pytest

from discdyn.ingest import build_step_response, write_posts_csv
from discdyn.response_models import FopdtModel, LogisticModel, fopdt_step_response
from discdyn.simulate import (
    SimulationConfig,
    expected_replies,
    intensity_bound,
    sample_response,
    simulate_arrivals,
    simulate_thread,
    simulate_threads,
)

M = FopdtModel(27, 5, 1)


def test_seed_determinism():
    cfg = SimulationConfig(M, seed=123, horizon=50)
    a, b = io.StringIO(), io.StringIO()
    write_posts_csv([simulate_thread(cfg)], a)
    write_posts_csv([simulate_thread(cfg)], b)
    assert a.getvalue() == b.getvalue()
    assert simulate_thread(SimulationConfig(M, seed=124, horizon=50)) != simulate_thread(cfg)


def test_zero_gain():
    thread = simulate_thread(SimulationConfig(FopdtModel(0, 5, 1), seed=1, horizon=50))
    assert len(thread.posts) == 1


def test_mean_count_calibration():
    counts = np.array([simulate_arrivals(SimulationConfig(M, seed=s, horizon=50)).size for s in range(2000)])
    expected = 27 * (1 - np.exp(-49 / 5))
    assert expected == pytest.approx(expected_replies(SimulationConfig(M, 0, 50)))
    assert 26.0 <= counts.mean() <= 28.0
    assert abs(counts.mean() - expected) < 3 * counts.std(ddof=1) / np.sqrt(counts.size)


def test_mean_at_characteristic_time():
    t = M.L + M.T
    counts = np.array([np.sum(simulate_arrivals(SimulationConfig(M, seed=s, horizon=50)) <= t) for s in range(1000)])
    assert abs(counts.mean() - fopdt_step_response(M, t)) < 3 * counts.std(ddof=1) / np.sqrt(counts.size)


def test_gap_is_empty():
    for seed in range(300):
        cfg = SimulationConfig(M, seed=seed, horizon=50, gap=(5, 10))
        arrivals = simulate_arrivals(cfg)
        assert not np.any((arrivals > 5) & (arrivals < 10))


def test_gap_mass_removed():
    cfg = SimulationConfig(M, seed=0, horizon=50, gap=(5, 10))
    expected = fopdt_step_response(M, 50) - (fopdt_step_response(M, 10) - fopdt_step_response(M, 5))
    assert expected_replies(cfg) == pytest.approx(expected)
    counts = np.array([simulate_arrivals(SimulationConfig(M, s, 50, (5, 10))).size for s in range(1000)])
    assert abs(counts.mean() - expected) < 3 * counts.std(ddof=1) / np.sqrt(counts.size)


def test_logistic_simulation_mean():
    m = LogisticModel(30, 0.8, 0.05)
    assert intensity_bound(m) == pytest.approx(30 * 0.8 / 4)
    cfg = SimulationConfig(m, 0, 20)
    counts = np.array([simulate_arrivals(SimulationConfig(m, s, 20)).size for s in range(1000)])
    assert abs(counts.mean() - expected_replies(cfg)) < 3 * counts.std(ddof=1) / np.sqrt(counts.size)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(M, 0, 0)
    with pytest.raises(ValueError):
        SimulationConfig(M, 0, 10, gap=(5, 11))
    with pytest.raises(ValueError):
        SimulationConfig(LogisticModel(5, -1, 0.5), 0, 10)


def test_threads_round_trip_into_series():
    threads = simulate_threads(M, 3, seed=5, horizon=50)
    assert [t.thread_id for t in threads] == ["sim-0000", "sim-0001", "sim-0002"]
    s = build_step_response(threads[0])
    assert s.final_count == len(threads[0].posts) - 1
    assert np.all(s.t <= 50)


def test_sample_response_shapes():
    s = sample_response(M, 0.01, 60)
    assert s.t.size == 6001
    assert s.y[-1] == pytest.approx(27.0, abs=1e-3)
    assert s.complete and s.sampled
    assert np.all(sample_response(FopdtModel(5, 1, 10), 0.5, 8).y == 0)
    assert sample_response(LogisticModel(1, 1, 0.1), 0.1, 20).y[-1] == pytest.approx(1.0, abs=1e-7)


def test_sample_response_appends_horizon():
    s = sample_response(M, 0.3, 1.0)
    assert s.t[-1] == 1.0 and s.t.size == 5
