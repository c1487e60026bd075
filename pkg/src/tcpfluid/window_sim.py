"""Continuous-time Monte Carlo simulator of the fluid window process.

This is the oracle for the analytic modules.  The window volume
V = W^(m+1) grows linearly at rate g = (m+1)·alpha between losses; link
losses fire after Exp(lambda) of growth time, buffer losses whenever V
reaches B_eff^(m+1).  Each loss multiplies V by c = beta^(m+1).

Time bookkeeping is exact, not sampled: a growth segment from V0 to V1
deposits (min(b,V1) - max(a,V0))/g seconds into volume bin (a, b], so
histograms carry no discretization noise beyond the binning itself.
Fast-recovery plateaus enter as atoms (duration R(W_before) at the
post-halving value) and long-delay idling stretches growth time below the
bandwidth-delay product by T/w, mirroring the analytic reweighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats as _stats

from .tcp_finite import FiniteBufferParams

_CHUNK = 8192
_CLOCK_MODES = ("resample", "residual")


@dataclass(frozen=True)
class SimConfig:
    """Simulation run description.

    horizon counts recorded loss events; a further 1% warm-up is run and
    discarded first.  w_max defaults to the buffer limit, or to the point
    where the infinite-buffer tail is below 1e-16.  clock_mode "residual"
    keeps the unexpired part of the exponential clock across a buffer
    loss instead of redrawing; the two modes agree in law.
    """

    params: FiniteBufferParams
    horizon: int = 10_000
    seed: int = 0
    enable_frfr: bool = False
    enable_wan_idle: bool = False
    n_bins: int = 100
    w_max: float | None = None
    clock_mode: str = "resample"

    def __post_init__(self) -> None:
        tcp = self.params.tcp
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1 loss event")
        if self.clock_mode not in _CLOCK_MODES:
            raise ValueError(f"clock_mode must be one of {_CLOCK_MODES}")
        if self.n_bins < 2:
            raise ValueError("need at least 2 histogram bins")
        if tcp.loss_rate == 0 and math.isinf(self.params.effective_limit):
            raise ValueError("loss_rate=0 with an infinite buffer never loses")
        if self.enable_wan_idle and tcp.m <= 0:
            raise ValueError("wan idle stretching needs m > 0")

    def bin_edges(self) -> np.ndarray:
        top = self.w_max
        if top is None:
            limit = self.params.effective_limit
            if math.isfinite(limit):
                top = limit
            else:
                tcp = self.params.tcp
                top = ((tcp.m + 1) / tcp.p * 37.0) ** (1.0 / (tcp.m + 1))
        return np.linspace(0.0, top, self.n_bins + 1)


@dataclass(frozen=True)
class SimResult:
    """Time-weighted outcome of one run (merge-able across seeds)."""

    bin_edges: np.ndarray
    occupancy: np.ndarray  # fraction of total time per bin
    n_buffer_losses: int
    n_link_losses: int
    mean_window: float
    window_variance: float
    total_time: float

    @property
    def n_events(self) -> int:
        return self.n_buffer_losses + self.n_link_losses

    @property
    def loss_rate(self) -> float:
        return self.n_events / self.total_time


def merge_results(*results: SimResult) -> SimResult:
    """Combine runs with identical binning; associative, time-weighted."""
    if not results:
        raise ValueError("nothing to merge")
    edges = results[0].bin_edges
    for r in results[1:]:
        if not np.array_equal(r.bin_edges, edges):
            raise ValueError("cannot merge results with different bins")
    total = sum(r.total_time for r in results)
    occ = sum(r.occupancy * r.total_time for r in results) / total
    mean = sum(r.mean_window * r.total_time for r in results) / total
    second = sum(
        (r.window_variance + r.mean_window ** 2) * r.total_time for r in results
    ) / total
    return SimResult(
        bin_edges=edges,
        occupancy=occ,
        n_buffer_losses=sum(r.n_buffer_losses for r in results),
        n_link_losses=sum(r.n_link_losses for r in results),
        mean_window=mean,
        window_variance=second - mean ** 2,
        total_time=total,
    )


def _window_path(cfg: SimConfig, total: int, rng: np.random.Generator):
    """Drive the volume recursion; returns (V_start, V_end, buffer_flag)."""
    tcp = cfg.params.tcp
    g = (tcp.m + 1) * tcp.alpha
    cap = cfg.params.effective_limit ** (tcp.m + 1)
    c = tcp.c
    residual = cfg.clock_mode == "residual"
    v_start = np.empty(total)
    v_end = np.empty(total)
    at_buffer = np.zeros(total, dtype=bool)

    scale = g / tcp.loss_rate if tcp.loss_rate > 0 else math.inf
    block: np.ndarray = np.empty(0)
    ptr = 0
    budget = 0.0
    v = 1.0
    for i in range(total):
        if budget == 0.0:
            if tcp.loss_rate == 0:
                budget = math.inf
            else:
                if ptr >= len(block):
                    block = rng.exponential(scale, size=65536)
                    ptr = 0
                budget = block[ptr]
                ptr += 1
        room = cap - v
        if budget >= room:
            u = cap
            at_buffer[i] = True
            budget = budget - room if residual else 0.0
        else:
            u = v + budget
            budget = 0.0
        v_start[i] = v
        v_end[i] = u
        v = c * u
    return v_start, v_end, at_buffer


def simulate(cfg: SimConfig) -> SimResult:
    """Run the fluid window process for cfg.horizon recorded loss events."""
    tcp = cfg.params.tcp
    m, alpha, beta = tcp.m, tcp.alpha, tcp.beta
    g = (m + 1) * alpha
    warmup = max(1, cfg.horizon // 100)
    total = cfg.horizon + warmup
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    v_start, v_end, at_buffer = _window_path(cfg, total, rng)
    v_start, v_end, at_buffer = (
        v_start[warmup:],
        v_end[warmup:],
        at_buffer[warmup:],
    )

    edges = cfg.bin_edges()
    hist = np.zeros(cfg.n_bins)
    time_total = 0.0
    mean_acc = 0.0
    second_acc = 0.0
    T = tcp.bdp if cfg.enable_wan_idle else 0.0
    exp1 = (m + 2) / (m + 1)
    exp2 = (m + 3) / (m + 1)
    vol_edges = edges ** (m + 1)

    for lo_idx in range(0, len(v_start), _CHUNK):
        v0 = v_start[lo_idx : lo_idx + _CHUNK, None]
        v1 = v_end[lo_idx : lo_idx + _CHUNK, None]
        if not cfg.enable_wan_idle:
            seg = np.clip(np.minimum(vol_edges[1:], v1) - np.maximum(vol_edges[:-1], v0), 0.0, None)
            hist += seg.sum(axis=0) / g
            time_total += float(np.sum(v1 - v0)) / g
            mean_acc += float(np.sum(v1 ** exp1 - v0 ** exp1)) / g / exp1
            second_acc += float(np.sum(v1 ** exp2 - v0 ** exp2)) / g / exp2
        else:
            # below T the clock runs T/w slower; split each overlap at T
            w0 = v0 ** (1.0 / (m + 1))
            w1 = v1 ** (1.0 / (m + 1))
            lo = np.maximum(edges[:-1], w0)
            hi = np.minimum(edges[1:], w1)
            lo = np.minimum(lo, hi)  # empty overlaps collapse to hi
            lo_c = np.minimum(lo, T)
            hi_c = np.minimum(hi, T)
            lo_a = np.maximum(lo, T)
            hi_a = np.maximum(hi, T)
            seg = T * (hi_c ** m - lo_c ** m) / (m * alpha) + (
                hi_a ** (m + 1) - lo_a ** (m + 1)
            ) / g
            hist += seg.sum(axis=0)
            w0f, w1f = w0[:, 0], w1[:, 0]
            w0c, w1c = np.minimum(w0f, T), np.minimum(w1f, T)
            w0a, w1a = np.maximum(w0f, T), np.maximum(w1f, T)
            time_total += float(
                np.sum(T * (w1c ** m - w0c ** m) / (m * alpha) + (w1a ** (m + 1) - w0a ** (m + 1)) / g)
            )
            mean_acc += float(
                np.sum(
                    T * (w1c ** (m + 1) - w0c ** (m + 1)) / ((m + 1) * alpha)
                    + (w1a ** (m + 2) - w0a ** (m + 2)) / ((m + 2) * alpha)
                )
            )
            second_acc += float(
                np.sum(
                    T * (w1c ** (m + 2) - w0c ** (m + 2)) / ((m + 2) * alpha)
                    + (w1a ** (m + 3) - w0a ** (m + 3)) / ((m + 3) * alpha)
                )
            )

    if cfg.enable_frfr:
        w_before = v_end ** (1.0 / (m + 1))
        dur = w_before ** m / alpha
        value = beta * w_before
        idx = np.clip(np.searchsorted(edges, value, side="right") - 1, 0, cfg.n_bins - 1)
        np.add.at(hist, idx, dur)
        time_total += float(np.sum(dur))
        mean_acc += float(np.sum(value * dur))
        second_acc += float(np.sum(value ** 2 * dur))

    occupancy = hist / time_total
    mean = mean_acc / time_total
    var = second_acc / time_total - mean ** 2
    n_buffer = int(np.count_nonzero(at_buffer))
    return SimResult(
        bin_edges=edges,
        occupancy=occupancy,
        n_buffer_losses=n_buffer,
        n_link_losses=len(v_start) - n_buffer,
        mean_window=mean,
        window_variance=var,
        total_time=time_total,
    )


class HistogramFit(NamedTuple):
    chi2_stat: float
    ks_distance: float
    chi2_pvalue: float
    dof: int
    n_merged_bins: int
    n_events: int


def _bin_probabilities(
    edges: np.ndarray, pdf: Callable[[np.ndarray], np.ndarray], subdiv: int = 32
) -> np.ndarray:
    """Composite-Simpson integral of pdf over each bin."""
    n = len(edges) - 1
    grid = np.linspace(edges[:-1], edges[1:], 2 * subdiv + 1, axis=1)
    vals = pdf(grid.ravel()).reshape(n, 2 * subdiv + 1)
    h = (edges[1:] - edges[:-1]) / (2 * subdiv)
    weights = np.ones(2 * subdiv + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return (vals @ weights) * h / 3.0


def compare_histogram(
    result: SimResult,
    pdf: Callable[[np.ndarray], np.ndarray],
    point_mass: tuple[float, float] | None = None,
    min_expected: float = 30.0,
) -> HistogramFit:
    """Goodness of fit of a time-weighted histogram against a density.

    Expected bin masses come from Simpson integration of pdf plus the
    optional atom (location, weight) added to its containing bin.  Bins
    are merged left to right until each carries >= min_expected events;
    the chi-square statistic uses the event count as sample size.  The KS
    distance compares cumulative occupancy and cumulative expected mass
    at the original bin edges.

    Raises:
        ValueError: fewer than 1000 loss events (too little data).
    """
    events = result.n_events
    if events < 1000:
        raise ValueError(f"need at least 1000 loss events, got {events}")
    edges = result.bin_edges
    probs = _bin_probabilities(edges, pdf)
    if point_mass is not None:
        loc, weight = point_mass
        idx = int(np.clip(np.searchsorted(edges, loc, side="right") - 1, 0, len(probs) - 1))
        probs = probs.copy()
        probs[idx] += weight

    ks = float(np.max(np.abs(np.cumsum(result.occupancy) - np.cumsum(probs))))

    # merge sparse bins so the chi-square approximation is valid
    merged_obs = []
    merged_exp = []
    acc_o = acc_e = 0.0
    for o, e in zip(result.occupancy * events, probs * events):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if merged_obs:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e
    else:
        merged_obs, merged_exp = [acc_o], [acc_e]
    obs = np.array(merged_obs)
    exp = np.array(merged_exp)
    chi2 = float(np.sum((obs - exp) ** 2 / exp))
    dof = max(len(obs) - 1, 1)
    pvalue = float(_stats.chi2.sf(chi2, dof))
    return HistogramFit(chi2, ks, pvalue, dof, len(obs), events)
