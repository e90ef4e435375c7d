from dataclasses import replace

import numpy as np
import pytest
from sklearn.base import clone

from streamlab import ValidationError
from streamlab.domain import Constant, StrategyConfig, Uniform, VideoParams, WorkloadSpec
from streamlab.simulation import (AggregateTrafficSimulator, WarmupTooShortError,
                                  compare_strategies, max_download_duration, run_sessions,
                                  simulate, simulate_with_interruptions, superpose)
from streamlab.strategies import build_trace


def test_zero_arrivals(flash_workload):
    w = replace(flash_workload, arrival_rate=0)
    series, summary = simulate(w, replications=2)
    assert not series.rates.any()
    assert summary.empirical_mean == 0 and summary.empirical_variance == 0
    assert summary.session_count == 0


def test_single_forced_arrival():
    cfg = StrategyConfig("NoOnOff", 500_000)
    w = WorkloadSpec(0, Constant(100_000), Constant(100), cfg, horizon=40)
    series, summary = simulate(w, dt=0.01, arrival_times=[0.0])
    inside = series.times < 20
    assert np.all(series.rates[inside] == 500_000)
    assert np.all(series.rates[~inside] == 0)
    assert summary.session_count == 1


def test_grid_integral_conserves_session_bytes(flash_config):
    w = WorkloadSpec(0, Uniform(100_000, 150_000), Uniform(30, 90), flash_config, horizon=200,
                     seed=4)
    arrivals = [3.3, 40.07, 91.1]
    arr, traces, outcomes = run_sessions(w, arrivals)
    dt = 0.001
    for t_n, tr in zip(arr, traces):
        _, rates = superpose([t_n], [tr], 200, dt)
        bound = len(tr) * tr.rates.max() * dt
        assert abs(rates.sum() * dt - tr.total_bytes) <= bound
        assert tr.total_bytes == tr.video.size()


def test_rate_bounded_by_active_sessions(flash_workload):
    w = replace(flash_workload, horizon=1000, warmup=100)
    series, _ = simulate(w)
    arr, traces, _ = run_sessions(w)
    active = np.zeros_like(series.rates)
    for t_n, tr in zip(arr, traces):
        active += (series.times >= t_n) & (series.times < t_n + tr.download_duration + 1e-9)
    assert np.all(series.rates >= 0)
    assert np.all(series.rates <= active * 625_000 + 1e-6)


def test_dt_refinement(flash_workload):
    w = replace(flash_workload, horizon=2000)
    _, coarse = simulate(w, dt=0.02)
    _, fine = simulate(w, dt=0.01)
    assert abs(fine.empirical_mean / coarse.empirical_mean - 1) < 0.005


def test_warmup_guard(flash_workload):
    bound = max_download_duration(flash_workload)
    tr = build_trace(VideoParams(125_000, 120), flash_workload.strategy)
    assert bound == tr.download_duration
    short = replace(flash_workload, warmup=10)
    with pytest.raises(WarmupTooShortError) as info:
        simulate(short)
    assert info.value.bound == pytest.approx(bound)
    simulate(replace(short, horizon=200), allow_short_warmup=True)


def test_determinism_and_seed_echo(flash_workload):
    w = replace(flash_workload, horizon=1000)
    s1, a = simulate(w, replications=3)
    s2, b = simulate(w, replications=3)
    assert a == b
    assert s1.rates.tobytes() == s2.rates.tobytes()
    assert a.seeds == (1, 2, 3)


def test_parallel_matches_sequential(flash_workload):
    w = replace(flash_workload, horizon=800)
    _, seq = simulate(w, replications=3)
    _, par = simulate(w, replications=3, n_jobs=2)
    assert seq == par


def test_interruption_single_session_clamp_branch(flash_config):
    # L = 50 s is below the 53.33 s full-download threshold
    w = WorkloadSpec(0, Constant(125_000), Constant(50), flash_config, horizon=100,
                     interruption=Constant(0.2))
    _, traces, outcomes = run_sessions(w, [0.0])
    assert outcomes[0].downloaded == 6_250_000
    assert outcomes[0].unused == 5_000_000
    assert traces[0].total_bytes == 6_250_000


def test_interruption_truncates_by_bytes(flash_config):
    w = WorkloadSpec(0, Constant(125_000), Constant(300), flash_config, horizon=400,
                     interruption=Constant(0.2))
    _, traces, outcomes = run_sessions(w, [0.0])
    assert outcomes[0].downloaded == 5_000_000 + 156_250 * 60
    assert outcomes[0].unused == pytest.approx(125_000 * 55)
    assert traces[0].total_bytes == outcomes[0].downloaded


def test_full_watch_without_buffer_wastes_nothing():
    cfg = StrategyConfig("ShortOnOff", 625_000, buffer_bytes=0, block_size=65_536)
    w = WorkloadSpec(0.2, Constant(125_000), Constant(60), cfg, horizon=2000, warmup=100,
                     interruption=Constant(1 - 1e-9))
    _, summary = simulate_with_interruptions(w)
    per_session = 125_000 * 60
    assert 0 <= summary.wasted_mean < 1e-6 * per_session


def test_interruptions_need_a_distribution(flash_workload):
    with pytest.raises(ValidationError):
        simulate_with_interruptions(flash_workload)


def test_compare_same_strategy_bitwise(flash_workload):
    w = replace(flash_workload, horizon=1000)
    no = StrategyConfig("NoOnOff", 625_000)
    r = compare_strategies(w, {"a": no, "b": no})
    assert r.summaries["a"] == r.summaries["b"]
    assert r.mean_differences[("a", "b")] == 0


def test_compare_refuses_different_on_rates(flash_workload, flash_config):
    with pytest.raises(ValidationError):
        compare_strategies(flash_workload, {"a": flash_config,
                                            "b": StrategyConfig("NoOnOff", 500_000)})


def test_block_size_does_not_move_variance(flash_workload, flash_config):
    w = replace(flash_workload, horizon=2400)
    q256 = replace(flash_config, block_size=262_144)
    r = compare_strategies(w, {"q64": flash_config, "q256": q256}, replications=4)
    assert r.mean_differences[("q64", "q256")] < 0.01
    assert r.variance_differences[("q64", "q256")] < 0.10


def test_strategy_mix(flash_config):
    mix = ((flash_config, 1.0), (StrategyConfig("NoOnOff", 625_000), 1.0))
    w = WorkloadSpec(0.5, Constant(125_000), Constant(60), flash_config, horizon=1500,
                     warmup=200, seed=2, strategy_mix=mix)
    _, traces, _ = run_sessions(w)
    kinds = {tr.config.kind for tr in traces}
    assert len(kinds) == 2


def test_estimator_interface(flash_workload):
    est = AggregateTrafficSimulator(replications=2)
    assert est.get_params() == {"dt": 0.01, "replications": 2, "allow_short_warmup": False,
                                "n_jobs": None}
    est2 = clone(est).set_params(replications=1)
    assert est2.replications == 1 and est.replications == 2
    est2.fit(replace(flash_workload, horizon=1200))
    errs = est2.relative_errors()
    assert abs(errs["mean"]) < 0.1
    assert est2.series_.rates.shape == (120_000,)
    with pytest.raises(ValidationError):
        est2.fit({"arrival_rate": 1})
