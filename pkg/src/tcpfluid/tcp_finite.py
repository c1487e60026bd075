"""Stationary window laws for a finite drop-tail buffer.

The buffer caps the window at an effective limit B_eff = B + b_L + bdp;
on top of the Poisson link losses, a deterministic loss fires whenever the
window reaches B_eff.  Everything depends on the random component only
through the control parameter x = p·B_eff^(m+1)/(m+1) and on the halving
geometry through c = beta^(m+1):

- A(x): fraction of losses occurring at the buffer, evaluated by two
  mutually checking routes (direct sum over halving levels, and an
  all-positive power series) plus a large-x asymptotic.
- A level recursion generates coefficient rows h_{n,k} for the piecewise
  stationary density, one row per halving level below B_eff.

Every exponential is arranged to have a nonpositive argument, so the
evaluation never overflows regardless of x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .specfun import DEFAULT_NUMERICS, NumericsConfig, euler_product_L
from .tcp_infinite import TcpParams

_A_METHODS = ("auto", "direct", "series", "asymptotic")


@dataclass(frozen=True)
class FiniteBufferParams:
    """Finite-buffer extension of the fluid window parameters.

    Attributes:
        tcp: underlying window dynamics (growth, halving, link loss).
        buffer_size: drop-tail buffer size B in packets.
        window_headroom: additive overshoot allowance b_L; the window
            actually turns around at B_eff = B + b_L + bdp.
    """

    tcp: TcpParams
    buffer_size: float
    window_headroom: float = 2.5354

    def __post_init__(self) -> None:
        if self.buffer_size <= 0:
            raise ValueError(f"buffer_size must be positive, got {self.buffer_size}")
        if self.window_headroom < 0:
            raise ValueError("window_headroom must be nonnegative")

    @property
    def effective_limit(self) -> float:
        """Largest reachable window B_eff = B + b_L + 2*alpha*D."""
        return self.buffer_size + self.window_headroom + self.tcp.bdp

    @property
    def x(self) -> float:
        """Control parameter p·B_eff^(m+1)/(m+1)."""
        m = self.tcp.m
        return self.tcp.p * self.effective_limit ** (m + 1) / (m + 1)


def _g_exp_neg_x(x: float, c: float, cfg: NumericsConfig) -> float:
    """G(x)·e^(-x) by direct summation; every exponent is <= 0.

    G(x) = sum_k [prod_{l<=k} 1/(1-c^l)] (e^{c^{k+1}x} - e^{c^k x}); after
    multiplying by e^{-x} the terms decay like c^k·x·e^{(c-1)x}.
    """
    total = 0.0
    pi_k = 1.0
    ck = 1.0  # c^k
    for k in range(100_000):
        term = pi_k * (math.exp((c * ck - 1.0) * x) - math.exp((ck - 1.0) * x))
        total += term
        if ck * x < 1e-3 and abs(term) <= cfg.series_rtol * max(abs(total), 1e-300):
            break
        ck *= c
        pi_k /= 1.0 - ck
    return total


def _series_S(x: float, c: float, cfg: NumericsConfig) -> float:
    """S(x) = -L(c)G(x) = sum_{n>=1} x^n/n! prod_{l<=n}(1-c^l).

    All terms are positive for x > 0: no cancellation at any x.  The
    partial products converge to L(c), so S grows like L(c)(e^x - 1).
    """
    total = 0.0
    term = 1.0
    cl = 1.0
    for n in range(1, 100_000):
        cl *= c
        term *= x / n * (1.0 - cl)
        total += term
        if n > x and term <= cfg.series_rtol * max(total, 1e-300):
            break
    return total


def buffer_loss_ratio_A(
    x: float,
    c: float,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    method: str = "auto",
) -> float:
    """Fraction A of losses that happen at the buffer.

    A = 1/(1 - L(c)G(x)).  "auto" routes to the direct G sum below
    cfg.x_switch, the power series up to cfg.x_asymptotic, and the
    leading asymptotic e^(-x)/L(c) beyond; "direct"/"series" force a
    path (both stay accurate well past the switch point and serve as
    mutual oracles).

    Raises:
        ValueError: c outside (0,1), x < 0, or unknown method.
    """
    if not 0 < c < 1:
        raise ValueError(f"buffer_loss_ratio_A requires 0 < c < 1, got {c}")
    if x < 0:
        raise ValueError(f"buffer_loss_ratio_A requires x >= 0, got {x}")
    if method not in _A_METHODS:
        raise ValueError(f"method must be one of {_A_METHODS}, got {method!r}")
    if method == "auto":
        if x < cfg.x_switch:
            method = "direct"
        elif x <= cfg.x_asymptotic:
            method = "series"
        else:
            method = "asymptotic"
    if method == "direct":
        L = euler_product_L(c, cfg)
        denom = math.exp(-x) - L * _g_exp_neg_x(x, c, cfg)
        return math.exp(-x) / denom
    if method == "series":
        return 1.0 / (1.0 + _series_S(x, c, cfg))
    return math.exp(-x - math.log(euler_product_L(c, cfg)))


def effective_loss(
    params: FiniteBufferParams, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Total loss event rate lambda' = lambda/(1 - A), buffer included.

    lambda = 0 degenerates to the deterministic sawtooth rate
    (m+1)·alpha/((1-c)·B_eff^(m+1)); small lambda adds (1-c)·lambda/2 to
    that, which the series route reproduces without cancellation.
    """
    tcp = params.tcp
    c = tcp.c
    if tcp.loss_rate == 0:
        m = tcp.m
        return (m + 1) * tcp.alpha / ((1.0 - c) * params.effective_limit ** (m + 1))
    x = params.x
    if x < cfg.x_switch:
        S = _series_S(x, c, cfg)
        return tcp.loss_rate * (1.0 + S) / S
    A = buffer_loss_ratio_A(x, c, cfg)
    return tcp.loss_rate + tcp.loss_rate * A / (1.0 - A)


@dataclass(frozen=True)
class FiniteBufferSolution:
    """Coefficient rows of the piecewise stationary density.

    Row n holds h_{n,0..n} for the window interval
    (beta^(n+1)·B_eff, beta^n·B_eff]; I collects the level integrals the
    recursion threads through.  N_levels is the largest row index, chosen
    so the lowest interval still sits above one packet.
    """

    params: FiniteBufferParams
    A: float
    h_matrix: tuple[tuple[float, ...], ...]
    I: tuple[float, ...]
    N_levels: int

    @property
    def x(self) -> float:
        return self.params.x

    @property
    def c(self) -> float:
        return self.params.tcp.c

    @property
    def effective_limit(self) -> float:
        return self.params.effective_limit

    def level_edges(self) -> np.ndarray:
        """Interval boundaries B_eff·beta^n, n = 0..N_levels+1, descending."""
        beta = self.params.tcp.beta
        return self.effective_limit * beta ** np.arange(self.N_levels + 2)


def solve_finite_distribution(
    params: FiniteBufferParams, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> FiniteBufferSolution:
    """Run the level recursion for the piecewise density coefficients.

    Seeds with h_{0,0} = A·e^x (evaluated as 1/(e^{-x} - L·Ge^{-x}) so it
    stays bounded for any x) and I_0 = A(e^x - e^{cx}), then builds row
    n+1 from row n.  All coefficients remain O(1/L(c)).

    Raises:
        ValueError: loss_rate = 0 (pure sawtooth; use the simulator) or
            effective limit below one packet.
    """
    tcp = params.tcp
    if tcp.loss_rate <= 0:
        raise ValueError("solve_finite_distribution requires loss_rate > 0")
    B = params.effective_limit
    beta = tcp.beta
    if B < 1.0:
        raise ValueError(f"effective limit {B} below one packet")
    x, c = params.x, tcp.c
    L = euler_product_L(c, cfg)
    denom = math.exp(-x) - L * _g_exp_neg_x(x, c, cfg)
    A = math.exp(-x) / denom
    h00 = 1.0 / denom  # A·e^x without forming e^x
    n_max = min(int(math.floor(math.log(B) / math.log(1.0 / beta))), cfg.level_cap)
    rows = [np.array([h00])]
    I = [h00 * (1.0 - math.exp((c - 1.0) * x))]
    for n in range(n_max):
        hn = rows[n]
        k = np.arange(n + 1)
        gap = c ** -k.astype(float) - c  # c^{-k} - c > 0
        decay_hi = np.exp(-(c ** (n + 1)) * gap * x)
        decay_lo = np.exp(-(c ** n) * gap * x)
        I_next = I[n] - float(np.sum((decay_hi - decay_lo) * hn / gap))
        h_next_0 = I_next + float(np.sum(hn / gap * decay_hi))
        rows.append(np.concatenate(([h_next_0], hn / (c - c ** -k.astype(float)))))
        I.append(I_next)
    return FiniteBufferSolution(
        params=params,
        A=A,
        h_matrix=tuple(tuple(row) for row in rows),
        I=tuple(I),
        N_levels=n_max,
    )


def _row_indices(sol: FiniteBufferSolution, w: np.ndarray) -> np.ndarray:
    edges_desc = sol.level_edges()[: sol.N_levels + 1]
    ascending = edges_desc[::-1]
    j = np.searchsorted(ascending, w, side="left")
    return sol.N_levels - j  # w above every edge maps to row 0 via clip below


def _phi(sol: FiniteBufferSolution, w: np.ndarray) -> np.ndarray:
    """Unnormalized continuous density phi(w); zero outside (0, B_eff]."""
    tcp = sol.params.tcp
    p, m, c, B = tcp.p, tcp.m, sol.c, sol.effective_limit
    out = np.zeros_like(w)
    inside = (w > 0) & (w <= B)
    if not np.any(inside):
        return out
    wi = w[inside]
    rows = np.clip(_row_indices(sol, wi), 0, sol.N_levels)
    vals = np.zeros_like(wi)
    scaled = (wi / B) ** (m + 1) * sol.x
    for n in np.unique(rows):
        sel = rows == n
        h = np.asarray(sol.h_matrix[n])
        k = np.arange(len(h))
        vals[sel] = h @ np.exp(-np.outer(c ** -k.astype(float), scaled[sel]))
    out[inside] = np.maximum(p * wi ** m * vals, 0.0)
    return out


def phi_moment(
    sol: FiniteBufferSolution, s: float = 0.0, lo: float = 0.0, hi: float | None = None
) -> float:
    """Exact integral of w^s·phi(w) over (lo, hi) via incomplete Gamma.

    s = 0 gives the phi mass (1 - A over the full range); s = m feeds the
    fast-recovery normalizer.
    """
    tcp = sol.params.tcp
    p, m, c, B = tcp.p, tcp.m, sol.c, sol.effective_limit
    if hi is None:
        hi = B
    hi = min(hi, B)
    if lo >= hi:
        return 0.0
    nu = 1.0 + s / (m + 1)
    if nu <= 0:
        raise ValueError(f"integral diverges at the origin for s={s}")
    scale = ((m + 1) / p) ** (s / (m + 1)) * math.gamma(nu)
    edges = sol.level_edges()
    total = 0.0
    for n in range(sol.N_levels + 1):
        b = min(hi, edges[n])
        a = max(lo, edges[n + 1]) if n < sol.N_levels else lo
        if a >= b:
            continue
        h = np.asarray(sol.h_matrix[n])
        k = np.arange(len(h))
        a_k = p * c ** -k.astype(float) / (m + 1)
        seg = _sp.gammainc(nu, a_k * b ** (m + 1)) - _sp.gammainc(nu, a_k * a ** (m + 1))
        total += float(np.sum(h * c ** (k * nu) * seg))
    return scale * total


def finite_window_pdf(sol: FiniteBufferSolution, w):
    """Generic-time window density phi(w)/(1-A); zero above B_eff."""
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(w_arr < 0):
        raise ValueError("finite_window_pdf requires w >= 0")
    out = _phi(sol, w_arr) / (1.0 - sol.A)
    return out if np.ndim(w) else float(out[0])


def finite_frfr_pdf(sol: FiniteBufferSolution, w):
    """Fast-recovery law: continuous density plus a point mass.

    Buffer losses always halve from exactly B_eff, so the plateau there
    collapses into an atom at beta·B_eff.  Returns (density at w,
    point_mass_at, point_mass_weight); density and atom together are
    normalized.
    """
    tcp = sol.params.tcp
    p, m, beta, B = tcp.p, tcp.m, tcp.beta, sol.effective_limit
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(w_arr < 0):
        raise ValueError("finite_frfr_pdf requires w >= 0")
    share = 1.0 - sol.A
    Z = 1.0 + p * (phi_moment(sol, m) + sol.A * B ** m) / share
    base = _phi(sol, w_arr) / share
    plateau = p * beta ** -(m + 1) * w_arr ** m * _phi(sol, w_arr / beta) / share
    density = (base + plateau) / Z
    weight = p * B ** m * sol.A / (share * Z)
    if np.ndim(w):
        return density, beta * B, weight
    return float(density[0]), beta * B, weight


def before_loss_pdf(sol: FiniteBufferSolution, w):
    """Law of the window just before a loss: phi(w) plus atom A at B_eff."""
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(w_arr < 0):
        raise ValueError("before_loss_pdf requires w >= 0")
    density = _phi(sol, w_arr)
    if np.ndim(w):
        return density, sol.effective_limit, sol.A
    return float(density[0]), sol.effective_limit, sol.A
