"""Monte Carlo window process against the analytic laws."""

import math

import numpy as np
import pytest

from tcpfluid.tcp_finite import (
    FiniteBufferParams,
    buffer_loss_ratio_A,
    finite_window_pdf,
    solve_finite_distribution,
)
from tcpfluid.tcp_infinite import AnalyticWindowDistribution, TcpParams, window_moment
from tcpfluid.window_sim import SimConfig, compare_histogram, merge_results, simulate


def _cfg(p: float, B: float = math.inf, horizon: int = 4000, **kw) -> SimConfig:
    fb = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=p), buffer_size=B)
    return SimConfig(params=fb, horizon=horizon, seed=kw.pop("seed", 1), **kw)


def test_seed_reproducibility():
    a = simulate(_cfg(1e-2))
    b = simulate(_cfg(1e-2))
    assert a.mean_window == b.mean_window
    assert np.array_equal(a.occupancy, b.occupancy)
    assert a.total_time == b.total_time


def test_different_seeds_differ():
    a = simulate(_cfg(1e-2))
    b = simulate(SimConfig(params=_cfg(1e-2).params, horizon=4000, seed=2))
    assert a.mean_window != b.mean_window


def test_mean_window_tracks_analytic():
    res = simulate(_cfg(1e-2, horizon=20000))
    want = window_moment(TcpParams(alpha=1.0, loss_rate=1e-2), 0.5)
    # 2e4 loss events pin the mean to a fraction of a percent
    assert res.mean_window == pytest.approx(want, rel=5e-3)


def test_zero_link_loss_cycle_is_deterministic():
    # pure buffer cycling: rate (m+1) alpha / ((1-c) B~^(m+1)) exactly
    fb = FiniteBufferParams(
        TcpParams(alpha=1.0, loss_rate=0.0), buffer_size=50.0 - 2.5354
    )
    res = simulate(SimConfig(params=fb, horizon=3000, seed=9))
    assert res.n_link_losses == 0
    assert res.n_buffer_losses == res.n_events
    want = 8.0 / (3.0 * 50.0**2)
    assert res.loss_rate == pytest.approx(want, rel=1e-9)


def test_zero_loss_infinite_buffer_rejected():
    fb = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=0.0), buffer_size=math.inf)
    with pytest.raises(ValueError):
        simulate(SimConfig(params=fb, horizon=100, seed=0))


def test_loss_split_matches_A():
    # x = p B~^2/2 = 2 puts both loss kinds in play
    fb0 = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=1.0), buffer_size=40.0)
    p = 2.0 * 2.0 / fb0.effective_limit**2
    fb = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=p), buffer_size=40.0)
    res = simulate(SimConfig(params=fb, horizon=30000, seed=4))
    share = res.n_buffer_losses / res.n_events
    assert share == pytest.approx(buffer_loss_ratio_A(2.0, 0.25), abs=0.01)


def test_merge_results_is_associative_and_consistent():
    parts = [
        simulate(SimConfig(params=_cfg(1e-2).params, horizon=2000, seed=s))
        for s in (1, 2, 3)
    ]
    ab_c = merge_results(merge_results(parts[0], parts[1]), parts[2])
    a_bc = merge_results(parts[0], merge_results(parts[1], parts[2]))
    assert ab_c.total_time == pytest.approx(a_bc.total_time, rel=1e-14)
    assert ab_c.mean_window == pytest.approx(a_bc.mean_window, rel=1e-12)
    assert np.allclose(ab_c.occupancy, a_bc.occupancy, rtol=1e-13)
    # totals add up
    assert ab_c.n_events == sum(p.n_events for p in parts)
    assert ab_c.total_time == pytest.approx(sum(p.total_time for p in parts), rel=1e-12)


def test_merged_mean_is_time_weighted():
    a = simulate(SimConfig(params=_cfg(1e-2).params, horizon=2000, seed=1))
    b = simulate(SimConfig(params=_cfg(1e-2).params, horizon=2000, seed=2))
    merged = merge_results(a, b)
    want = (a.mean_window * a.total_time + b.mean_window * b.total_time) / (
        a.total_time + b.total_time
    )
    assert merged.mean_window == pytest.approx(want, rel=1e-12)


def test_histogram_fit_accepts_true_law():
    res = simulate(_cfg(1e-2, horizon=20000))
    dist = AnalyticWindowDistribution.build(TcpParams(alpha=1.0, loss_rate=1e-2), "plain")
    fit = compare_histogram(res, dist.pdf)
    assert fit.chi2_pvalue > 0.01
    assert fit.ks_distance < 0.02
    assert fit.n_events == 20000


def test_histogram_fit_rejects_wrong_law():
    res = simulate(_cfg(1e-2, horizon=20000))
    wrong = AnalyticWindowDistribution.build(TcpParams(alpha=1.0, loss_rate=3e-2), "plain")
    fit = compare_histogram(res, wrong.pdf)
    assert fit.chi2_pvalue < 1e-6
    assert fit.ks_distance > 0.1


def test_histogram_needs_enough_events():
    res = simulate(_cfg(1e-2, horizon=500))
    dist = AnalyticWindowDistribution.build(TcpParams(alpha=1.0, loss_rate=1e-2), "plain")
    with pytest.raises(ValueError):
        compare_histogram(res, dist.pdf)


def test_finite_law_fit_with_point_mass():
    from tcpfluid.tcp_finite import finite_frfr_pdf

    fb = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=2e-3), buffer_size=35.0)
    sol = solve_finite_distribution(fb)
    res = simulate(SimConfig(params=fb, horizon=20000, seed=6, enable_frfr=True))
    density_fn = lambda w: finite_frfr_pdf(sol, w)[0]
    _, loc, weight = finite_frfr_pdf(sol, np.array([0.0]))
    fit = compare_histogram(res, density_fn, point_mass=(loc, weight))
    assert fit.chi2_pvalue > 0.01


def test_finite_plain_fit():
    fb = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=2e-3), buffer_size=35.0)
    sol = solve_finite_distribution(fb)
    res = simulate(SimConfig(params=fb, horizon=20000, seed=7))
    fit = compare_histogram(res, lambda w: finite_window_pdf(sol, w))
    assert fit.chi2_pvalue > 0.01


def test_windows_never_exceed_buffer_limit():
    fb = FiniteBufferParams(TcpParams(alpha=1.0, loss_rate=1e-3), buffer_size=30.0)
    res = simulate(SimConfig(params=fb, horizon=5000, seed=11))
    top = fb.effective_limit
    # occupancy beyond the hard cap must be identically zero
    edges = SimConfig(params=fb, horizon=5000, seed=11).bin_edges()
    beyond = edges[:-1] >= top
    assert res.occupancy[beyond].sum() == 0.0
