"""Stationary congestion-window laws for the infinite-buffer fluid model.

Between losses the window obeys dW/dt = alpha/W^m, so W^(m+1) grows
linearly in time; losses arrive as a Poisson stream of rate lambda and
multiply W by beta.  The stationary density is a finite mixture of
stretched exponentials whose coefficients h_k come from a partial-fraction
expansion; everything else here (moments, fast-recovery plateaus, idle-mode
reweighting for long-delay links, the parallel-flow mean-field fixed point)
is built from that mixture.  All laws depend on lambda and alpha only
through the loss ratio p = lambda/alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _sp

from .specfun import DEFAULT_NUMERICS, NumericsConfig, euler_product_L

VARIANTS = ("plain", "frfr", "wan")


@dataclass(frozen=True)
class TcpParams:
    """Parameter bundle for the AIMD fluid window process.

    Attributes:
        alpha: rate scale in packets/sec; R(W) = W^m / alpha.
        loss_rate: Poisson rate of external loss events (lambda).
        m: RTT exponent; m=0 is a fixed round-trip time, m=1 the
            congestion-avoidance ACK-clocked case.
        beta: multiplicative decrease factor in (0, 1).
        link_capacity: optional link speed in bits/sec (C).
        packet_size: optional packet size in bits (P).
        link_delay: one-way propagation delay in seconds (D).
    """

    alpha: float
    loss_rate: float
    m: float = 1.0
    beta: float = 0.5
    link_capacity: float | None = None
    packet_size: float | None = None
    link_delay: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.loss_rate < 0:
            raise ValueError(f"loss_rate must be nonnegative, got {self.loss_rate}")
        if self.m < 0:
            raise ValueError(f"m must be nonnegative, got {self.m}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0,1), got {self.beta}")
        if self.link_delay < 0:
            raise ValueError(f"link_delay must be nonnegative, got {self.link_delay}")
        if self.link_capacity is not None and self.link_capacity <= 0:
            raise ValueError("link_capacity must be positive when given")
        if self.packet_size is not None and self.packet_size <= 0:
            raise ValueError("packet_size must be positive when given")
        if self.link_capacity is not None and self.packet_size is not None:
            derived = self.link_capacity / self.packet_size
            if not math.isclose(derived, self.alpha, rel_tol=1e-9):
                raise ValueError(
                    f"alpha={self.alpha} inconsistent with C/P={derived}"
                )

    @classmethod
    def from_link(
        cls,
        capacity: float,
        packet_size: float,
        loss_ratio: float,
        delay: float = 0.0,
        m: float = 1.0,
        beta: float = 0.5,
    ) -> "TcpParams":
        """Build params from link speed C (bits/s) and packet size P (bits).

        alpha = C/P packets per second; loss_rate = loss_ratio * alpha.
        """
        alpha = capacity / packet_size
        return cls(
            alpha=alpha,
            loss_rate=loss_ratio * alpha,
            m=m,
            beta=beta,
            link_capacity=capacity,
            packet_size=packet_size,
            link_delay=delay,
        )

    @classmethod
    def from_loss_ratio(
        cls, p: float, alpha: float = 1.0, m: float = 1.0, beta: float = 0.5
    ) -> "TcpParams":
        """Dimensionless construction: only p = lambda/alpha matters."""
        return cls(alpha=alpha, loss_rate=p * alpha, m=m, beta=beta)

    @property
    def c(self) -> float:
        """Window-volume decrease factor beta^(m+1)."""
        return self.beta ** (self.m + 1)

    @property
    def p(self) -> float:
        """Loss ratio lambda/alpha (loss events per packet sent)."""
        return self.loss_rate / self.alpha

    @property
    def bdp(self) -> float:
        """Bandwidth-delay product 2*alpha*D in packets."""
        return 2.0 * self.alpha * self.link_delay


@dataclass(frozen=True)
class ResidueTable:
    """Partial-fraction coefficients h_0..h_K for a given c = beta^(m+1).

    h_k = (1/(c^k L(c))) * prod_{l=1..k} 1/(1 - c^-l); signs alternate and
    magnitudes fall off like c^(k(k-1)/2), so about a dozen terms exhaust
    double precision for moderate c.
    """

    c: float
    h: tuple[float, ...]

    @property
    def K(self) -> int:
        return len(self.h) - 1

    @property
    def truncation_error(self) -> float:
        """Normalization defect 1 - sum_k c^k h_k of the truncated table."""
        return 1.0 - float(np.sum(self.weights))

    @property
    def weights(self) -> np.ndarray:
        """Mixture weights c^k h_k (sum to 1 up to truncation)."""
        k = np.arange(len(self.h))
        return self.c ** k * np.asarray(self.h)


def compute_residues(
    c: float, K: int | None = None, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> ResidueTable:
    """Tabulate the mixture coefficients h_0..h_K.

    h_0 = 1/L(c) and h_k = h_{k-1} / (c - c^(1-k)); the recurrence is exact
    in floating point up to rounding, no series involved.

    Raises:
        ValueError: if c is outside (0, 1) or K < 0.
    """
    if not 0 < c < 1:
        raise ValueError(f"compute_residues requires 0 < c < 1, got {c}")
    if K is None:
        K = cfg.residue_terms
    if K < 0:
        raise ValueError(f"K must be nonnegative, got {K}")
    h = [1.0 / euler_product_L(c, cfg)]
    for k in range(1, K + 1):
        h.append(h[-1] / (c - c ** (1 - k)))
    return ResidueTable(c=c, h=tuple(h))


@dataclass(frozen=True)
class AnalyticWindowDistribution:
    """Evaluable stationary window law.

    variant "plain" is the bare halving process; "frfr" adds the
    fast-recovery plateau of one RTT spent at the post-halving window;
    "wan" additionally stretches growth below the bandwidth-delay product
    bdp = 2*alpha*D, where the window is too small to fill the pipe.
    """

    params: TcpParams
    residues: ResidueTable
    variant: str = "plain"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.params.loss_rate <= 0:
            raise ValueError("no stationary law exists for loss_rate = 0")
        if not math.isclose(self.residues.c, self.params.c, rel_tol=1e-12):
            raise ValueError("residue table c does not match params")
        if self.variant == "wan" and self.params.m == 0:
            raise ValueError("wan variant needs m > 0 (inverse moment diverges)")

    @classmethod
    def build(
        cls,
        params: TcpParams,
        variant: str = "plain",
        K: int | None = None,
        cfg: NumericsConfig = DEFAULT_NUMERICS,
    ) -> "AnalyticWindowDistribution":
        return cls(params, compute_residues(params.c, K, cfg), variant)

    def pdf(self, w):
        return window_pdf(self, w)

    def ccdf(self, w):
        return window_ccdf(self, w)

    def support_cutoff(self) -> float:
        """w beyond which the plain-law CCDF is below 1e-13."""
        p, m = self.params.p, self.params.m
        w_tail = ((m + 1) / p * 32.0) ** (1.0 / (m + 1))
        if self.variant == "wan":
            return max(w_tail, 1.01 * self.params.bdp)
        return w_tail


def _mixture_pdf(params: TcpParams, res: ResidueTable, w: np.ndarray) -> np.ndarray:
    p, m = params.p, params.m
    k = np.arange(len(res.h))
    a = p * res.c ** -k / (m + 1)
    h = np.asarray(res.h)
    ew = np.exp(-np.outer(a, w ** (m + 1)))
    return p * w ** m * (h @ ew)


def _mixture_ccdf(params: TcpParams, res: ResidueTable, w: np.ndarray) -> np.ndarray:
    p, m = params.p, params.m
    k = np.arange(len(res.h))
    a = p * res.c ** -k / (m + 1)
    weights = res.weights
    return weights @ np.exp(-np.outer(a, w ** (m + 1)))


def _truncated_moment(
    params: TcpParams, res: ResidueTable, s: float, limit: float = math.inf
) -> float:
    """E[W^s · 1{W <= limit}] under the plain law.

    Closed form through the lower incomplete Gamma: with nu = 1 + s/(m+1),
    E[W^s·1{W<=T}] = ((m+1)/p)^(s/(m+1)) · sum_k h_k c^(k·nu) γ(nu, a_k T^(m+1)).
    Requires nu > 0, i.e. s > -(m+1).
    """
    p, m = params.p, params.m
    nu = 1.0 + s / (m + 1)
    if nu <= 0:
        raise ValueError(f"moment diverges: need s > -(m+1), got s={s}")
    k = np.arange(len(res.h))
    h = np.asarray(res.h)
    scale = ((m + 1) / p) ** (s / (m + 1))
    gamma_nu = math.gamma(nu)
    if math.isinf(limit):
        return scale * gamma_nu * float(np.sum(h * res.c ** (k * nu)))
    x = p * res.c ** -k / (m + 1) * limit ** (m + 1)
    return scale * gamma_nu * float(np.sum(h * res.c ** (k * nu) * _sp.gammainc(nu, x)))


def _wan_denominator(params: TcpParams, res: ResidueTable, T: float) -> float:
    p, m = params.p, params.m
    fbar = float(_mixture_ccdf(params, res, np.array([T]))[0]) if T > 0 else 1.0
    inv_trunc = _truncated_moment(params, res, -1.0, T) if T > 0 else 0.0
    return fbar + p * _truncated_moment(params, res, m) + T * inv_trunc


def window_pdf(dist: AnalyticWindowDistribution, w):
    """Stationary density of the window at w (scalar or array).

    The frfr variant divides by 1 + p·E[W^m]; the wan variant adds the
    idle-mode term ((T-w)/w)·f(w) below T = bdp and renormalizes.
    """
    params, res = dist.params, dist.residues
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(w_arr < 0):
        raise ValueError("window_pdf requires w >= 0")
    base = _mixture_pdf(params, res, w_arr)
    if dist.variant == "plain":
        out = base
    else:
        p, m, beta = params.p, params.m, params.beta
        plateau = p * beta ** -(m + 1) * w_arr ** m * _mixture_pdf(params, res, w_arr / beta)
        if dist.variant == "frfr":
            out = (base + plateau) / (1.0 + p * _truncated_moment(params, res, m))
        else:
            T = params.bdp
            idle = np.zeros_like(w_arr)
            below = (w_arr < T) & (w_arr > 0)
            idle[below] = (T - w_arr[below]) / w_arr[below] * base[below]
            out = (base + plateau + idle) / _wan_denominator(params, res, T)
    out = np.maximum(out, 0.0)
    return out if np.ndim(w) else float(out[0])


def window_ccdf(dist: AnalyticWindowDistribution, w):
    """P(W > w).  Closed form for the plain variant, quadrature otherwise."""
    params, res = dist.params, dist.residues
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    if np.any(w_arr < 0):
        raise ValueError("window_ccdf requires w >= 0")
    if dist.variant == "plain":
        out = np.clip(_mixture_ccdf(params, res, w_arr), 0.0, 1.0)
    else:
        w_max = dist.support_cutoff()
        out = np.empty_like(w_arr)
        for i, wi in enumerate(w_arr):
            if wi >= w_max:
                out[i] = 0.0
                continue
            mass, _ = _integrate.quad(
                lambda u: window_pdf(dist, u), wi, w_max, limit=200
            )
            out[i] = min(max(mass, 0.0), 1.0)
    return out if np.ndim(w) else float(out[0])


def window_moment(
    params: TcpParams,
    r: float,
    K: int | None = None,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    method: str = "auto",
) -> float:
    """E[W^(r(m+1))] of the plain law.

    Integer r uses the product closed form
        n! ((m+1)·alpha/lambda)^n · prod_{k=1..n} 1/(1-c^k),
    non-integer r the Gamma-series path; "series" or "closed" forces one.

    Raises:
        ValueError: loss_rate = 0, or r <= -1/(m+1) (the moment diverges).
    """
    if params.loss_rate <= 0:
        raise ValueError("window_moment requires loss_rate > 0")
    m = params.m
    if r <= -1.0 / (m + 1):
        raise ValueError(f"moment of order r={r} diverges (need r > {-1/(m+1)})")
    if method not in ("auto", "series", "closed"):
        raise ValueError(f"unknown method {method!r}")
    is_int = abs(r - round(r)) < 1e-12 and round(r) >= 1
    if method == "closed" and not is_int:
        raise ValueError("closed form applies to positive integer r only")
    if is_int and method in ("auto", "closed"):
        n = int(round(r))
        c = params.c
        value = math.factorial(n) * ((m + 1) / params.p) ** n
        for k in range(1, n + 1):
            value /= 1.0 - c ** k
        return value
    res = compute_residues(params.c, K, cfg)
    return _truncated_moment(params, res, r * (m + 1))


def frfr_mean_correction(
    params: TcpParams, K: int | None = None, cfg: NumericsConfig = DEFAULT_NUMERICS
) -> float:
    """Mean shift E[W_frfr] - E[W] induced by fast-recovery plateaus.

    Equals -p(E[W]E[W^m] - beta·E[W^(m+1)]) / (1 + p·E[W^m]); for m=1 it
    approaches the constant -0.998 as p -> 0.
    """
    if params.loss_rate <= 0:
        raise ValueError("frfr_mean_correction requires loss_rate > 0")
    res = compute_residues(params.c, K, cfg)
    p, m = params.p, params.m
    ew = _truncated_moment(params, res, 1.0)
    ewm = _truncated_moment(params, res, m)
    ewm1 = _truncated_moment(params, res, m + 1.0)
    return -p * (ew * ewm - params.beta * ewm1) / (1.0 + p * ewm)


def wan_truncated_inverse_moment(
    params: TcpParams,
    threshold: float,
    K: int | None = None,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
) -> float:
    """E[(1/W) · 1{W <= threshold}] under the plain law.

    This is the idle-time weight in the wan denominator; threshold is
    normally the bandwidth-delay product.  Needs m > 0, else the inverse
    moment diverges at the origin.
    """
    if params.m <= 0:
        raise ValueError("inverse moment requires m > 0")
    if params.loss_rate <= 0:
        raise ValueError("wan_truncated_inverse_moment requires loss_rate > 0")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    res = compute_residues(params.c, K, cfg)
    if abs(res.truncation_error) > 1e-8:
        raise ValueError(
            f"residue table truncated too early (defect {res.truncation_error:.2e}); "
            "increase K"
        )
    if threshold == 0:
        return 0.0
    return _truncated_moment(params, res, -1.0, threshold)


def mean_field_fixed_point(
    params: TcpParams,
    N: int,
    K: int | None = None,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    max_iter: int = 10_000,
) -> float:
    """Self-consistent total window N·E[W*] for N identical parallel flows.

    The wan-style law for one flow sees the other flows through the free
    capacity threshold T; self-consistency demands T = N·E[W*](T).  Fixed
    point iteration starts from the ideal long-delay limit N/E[1/W] and
    stops when successive iterates agree to 1e-10 relative.

    Raises:
        RuntimeError: no convergence within max_iter iterations.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if params.loss_rate <= 0:
        raise ValueError("mean_field_fixed_point requires loss_rate > 0")
    if params.m <= 0:
        raise ValueError("mean_field_fixed_point requires m > 0")
    res = compute_residues(params.c, K, cfg)
    p, m, beta = params.p, params.m, params.beta
    ew = _truncated_moment(params, res, 1.0)
    ewm = _truncated_moment(params, res, m)
    ewm1 = _truncated_moment(params, res, m + 1.0)
    inv_w = _truncated_moment(params, res, -1.0)
    T = N / inv_w
    for _ in range(max_iter):
        fbar = float(_mixture_ccdf(params, res, np.array([T]))[0])
        num = ew + p * beta * ewm1 + T * (1.0 - fbar) - _truncated_moment(params, res, 1.0, T)
        den = fbar + p * ewm + T * _truncated_moment(params, res, -1.0, T)
        T_new = N * num / den
        if abs(T_new - T) <= 1e-10 * max(1.0, abs(T_new)):
            return T_new
        T = T_new
    raise RuntimeError(f"mean-field iteration did not converge in {max_iter} steps")


def sqrt_law_throughput(params: TcpParams, p: float) -> float:
    """Deterministic-sawtooth throughput (P/R)·sqrt(3/2)/sqrt(p), R = 2D.

    The classic inverse square-root law: every 1/p-th packet is lost, the
    window oscillates between W_max/2 and W_max.  Units follow packet_size
    (bits/s if P is in bits).

    Raises:
        ValueError: p outside (0,1), or packet_size/link_delay unset.
    """
    if not 0 < p < 1:
        raise ValueError(f"loss probability must lie in (0,1), got {p}")
    if params.packet_size is None:
        raise ValueError("sqrt_law_throughput needs packet_size")
    if params.link_delay <= 0:
        raise ValueError("sqrt_law_throughput needs link_delay > 0 (R = 2D)")
    rtt = 2.0 * params.link_delay
    return params.packet_size / rtt * math.sqrt(1.5 / p)
