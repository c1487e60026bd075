"""Infinite-buffer stationary window laws: residues, moments, variants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcpfluid.tcp_infinite import (
    AnalyticWindowDistribution,
    TcpParams,
    compute_residues,
    frfr_mean_correction,
    mean_field_fixed_point,
    sqrt_law_throughput,
    wan_truncated_inverse_moment,
    window_moment,
)

# published residue coefficients h_k(1/4); six significant digits each
H_TABLE = (
    1.4523536,
    -1.9364715,
    5.1639241e-1,
    -3.2786819e-2,
    5.1430305e-4,
    -2.0109601e-6,
    1.9643078e-9,
    -4.7959661e-13,
    2.9272701e-17,
)


def _p(p: float, **kw) -> TcpParams:
    return TcpParams(alpha=1.0, loss_rate=p, **kw)


def test_residue_table_values():
    table = compute_residues(0.25, 9)
    assert table.c == 0.25
    for k, want in enumerate(H_TABLE):
        assert table.h[k] == pytest.approx(want, rel=5e-7), f"h_{k}"


def test_residue_magnitudes_collapse_super_fast():
    # h_k decays roughly like c^(k(k+1)/2); ten orders gone by k=8
    table = compute_residues(0.25, 9)
    assert abs(table.h[8]) < 1e-16
    assert abs(table.h[0]) > 1.0


def test_second_moment_closed_form():
    for p in (1e-1, 1e-3, 1e-6):
        got = window_moment(_p(p), 1.0)
        assert got == pytest.approx(8.0 / (3.0 * p), rel=1e-12)


def test_mean_and_stdev_sqrt_laws():
    p = 1e-5
    mean = window_moment(_p(p), 0.5)
    second = window_moment(_p(p), 1.0)
    stdev = math.sqrt(second - mean * mean)
    assert mean * math.sqrt(p) == pytest.approx(1.5269, abs=5e-4)
    assert stdev * math.sqrt(p) == pytest.approx(0.5790, abs=5e-4)


def test_moment_scale_invariance_in_p():
    # W scales as p^(-1/2) for m=1, so E[W^(2r)] * p^r is p-free
    r = 0.7
    scaled = [window_moment(_p(p), r) * p**r for p in (1e-2, 1e-4, 1e-6)]
    assert scaled[0] == pytest.approx(scaled[1], rel=1e-9)
    assert scaled[1] == pytest.approx(scaled[2], rel=1e-9)


def test_moment_series_vs_closed_routes():
    # integer orders have a product closed form; the Gamma series must agree
    params = _p(3e-3)
    for r in (1.0, 2.0, 3.0):
        a = window_moment(params, r, method="series")
        b = window_moment(params, r, method="closed")
        assert a == pytest.approx(b, rel=1e-10)
    with pytest.raises(ValueError):
        window_moment(params, 0.5, method="closed")


def test_integer_moment_series_agrees_with_closed_form():
    params = _p(2e-4)
    # r=2 gives E[W^4] = (2/p)^2 * 2 / ((1-c)(1-c^2)) for m=1, c=1/4
    want = (2.0 / 2e-4) ** 2 * 2.0 / ((1 - 0.25) * (1 - 0.25**2))
    assert window_moment(params, 2.0) == pytest.approx(want, rel=1e-10)


def test_pdf_normalization_and_ccdf_limits():
    for variant in ("plain", "frfr"):
        dist = AnalyticWindowDistribution.build(_p(1e-2), variant)
        hi = dist.support_cutoff()
        w = np.linspace(0.0, hi, 20001)
        mass = np.trapezoid(dist.pdf(w), w)
        assert mass == pytest.approx(1.0, abs=2e-6), variant
        assert dist.ccdf(0.0) == pytest.approx(1.0, abs=1e-12)
        assert dist.ccdf(hi) < 1e-6


def test_pdf_matches_ccdf_derivative():
    dist = AnalyticWindowDistribution.build(_p(1e-2), "plain")
    h = 1e-5
    for w in (3.0, 10.0, 21.0, 40.0):
        num = (dist.ccdf(w - h) - dist.ccdf(w + h)) / (2 * h)
        assert dist.pdf(w) == pytest.approx(num, rel=1e-5)


def test_pdf_mean_matches_moment_route():
    dist = AnalyticWindowDistribution.build(_p(1e-2), "plain")
    w = np.linspace(0.0, dist.support_cutoff(), 40001)
    grid_mean = np.trapezoid(w * dist.pdf(w), w)
    assert grid_mean == pytest.approx(window_moment(_p(1e-2), 0.5), rel=1e-6)


@given(st.floats(1e-4, 5e-2), st.floats(0.1, 60.0))
@settings(max_examples=60, deadline=None)
def test_pdf_nonnegative_and_ccdf_monotone(p, w):
    dist = AnalyticWindowDistribution.build(_p(p), "plain")
    assert dist.pdf(w) >= 0.0
    assert dist.ccdf(w) >= dist.ccdf(w + 0.5) - 1e-15


def test_frfr_correction_limit():
    # the mean shift of the plateau-corrected law converges as p -> 0
    assert frfr_mean_correction(_p(1e-10)) == pytest.approx(-0.9981, abs=5e-4)
    assert frfr_mean_correction(_p(1e-12)) == pytest.approx(-0.9981, abs=5e-4)


def test_frfr_mean_consistency_with_grid():
    p = 1e-3
    dist = AnalyticWindowDistribution.build(_p(p), "frfr")
    w = np.linspace(0.0, dist.support_cutoff(), 40001)
    grid_mean = np.trapezoid(w * dist.pdf(w), w)
    want = window_moment(_p(p), 0.5) + frfr_mean_correction(_p(p))
    assert grid_mean == pytest.approx(want, rel=1e-5)


def test_wan_distribution_normalizes():
    params = _p(1e-2, link_delay=85.335)  # bandwidth-delay product 170.67
    dist = AnalyticWindowDistribution.build(params, "wan")
    w = np.linspace(0.0, dist.support_cutoff(), 40001)
    assert np.trapezoid(dist.pdf(w), w) == pytest.approx(1.0, abs=1e-4)


def test_wan_needs_positive_m():
    with pytest.raises(ValueError):
        AnalyticWindowDistribution.build(
            TcpParams(alpha=1.0, loss_rate=1e-2, m=0.0, link_delay=10.0), "wan"
        )


def test_wan_truncated_inverse_moment_against_quadrature():
    # E[(1/W) 1{W <= t}] under the plain law, checked on a dense grid
    params = _p(1e-2, link_delay=85.335)
    t = 30.0
    got = wan_truncated_inverse_moment(params, t)
    dist = AnalyticWindowDistribution.build(params, "plain")
    w = np.linspace(1e-9, t, 400001)
    grid = np.trapezoid(dist.pdf(w) / w, w)
    assert got == pytest.approx(grid, rel=1e-5)


def test_mean_field_published_points():
    params = TcpParams.from_link(256000.0, 12000.0, loss_ratio=1e-3)
    assert mean_field_fixed_point(params, 20) == pytest.approx(827.75, abs=1.0)
    params = TcpParams.from_link(256000.0, 12000.0, loss_ratio=5e-3)
    assert mean_field_fixed_point(params, 2) == pytest.approx(36.55, abs=0.2)


def test_mean_field_grows_with_population():
    params = TcpParams.from_link(256000.0, 12000.0, loss_ratio=1e-3)
    totals = [mean_field_fixed_point(params, n) for n in (1, 5, 20)]
    assert totals[0] < totals[1] < totals[2]


def test_sqrt_law_throughput_closed_form():
    # deterministic sawtooth: (P/R) sqrt(3/(2p)) with R = 2D
    params = TcpParams.from_link(256000.0, 12000.0, loss_ratio=1e-4, delay=0.05)
    p = 1e-4
    want = (12000.0 / 0.1) * math.sqrt(1.5 / p)
    assert sqrt_law_throughput(params, p) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        sqrt_law_throughput(params, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        TcpParams(alpha=0.0, loss_rate=1e-3)
    with pytest.raises(ValueError):
        TcpParams(alpha=1.0, loss_rate=-1.0)
    with pytest.raises(ValueError):
        TcpParams(alpha=1.0, loss_rate=1e-3, beta=1.0)
    with pytest.raises(ValueError):
        # capacity and packet size must agree with alpha = C/P
        TcpParams(alpha=1.0, loss_rate=1e-3, link_capacity=1e5, packet_size=100.0)
    with pytest.raises(ValueError):
        AnalyticWindowDistribution.build(TcpParams(alpha=1.0, loss_rate=0.0), "plain")


def test_residue_runtime_budget():
    import time

    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        compute_residues(0.25, 9)
        best = min(best, time.perf_counter() - t0)
    assert best < 1e-3
