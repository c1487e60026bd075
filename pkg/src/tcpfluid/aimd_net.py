"""Multi-link AIMD fluid network simulator.

Flows grow their throughput linearly at alpha*P/R along fixed routes
until some link's aggregate load reaches its capacity.  At that instant
every flow crossing the congested link draws a loss indicator (at least
one flow must lose), losers cut their throughput by beta, and growth
resumes.  Buffers are taken as zero: the congestion event is
instantaneous and only the congested link's flows are disturbed.

Event times are maintained as absolute hitting times per link.  Between
events every throughput is linear in t, so each link's hitting time is
constant until one of its flows is halved; an event therefore updates
only the links touched by the halved flows' routes, and the per-flow
time average Q integrates exactly over the linear segments.

Capacity allocation strategies weight links uniformly, by endpoint
in-degrees (max, min, product), or by edge betweenness (the mean-field
profile of offered load on the unique tree paths).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .tree_gen import EdgeMeasurements, GrowingTree

__all__ = [
    "FluidNetwork",
    "FlowSet",
    "SyncModel",
    "PerformanceReport",
    "StagnationError",
    "next_congestion",
    "apply_congestion",
    "run_simulation",
    "assign_capacities",
    "uniform_tree_flows",
    "CAPACITY_STRATEGIES",
]

CAPACITY_STRATEGIES = ("uniform", "maximum", "minimum", "product", "mean_field")


class StagnationError(RuntimeError):
    """No link can ever congest: every aggregate growth rate is zero."""


def _connected(n_vertices: int, endpoints: np.ndarray) -> bool:
    parent = np.arange(n_vertices)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in endpoints:
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            parent[ru] = rv
    root = find(0)
    return all(find(v) == root for v in range(n_vertices))


@dataclass(frozen=True)
class FluidNetwork:
    """Edge list with capacities in bits/sec; must be connected."""

    endpoints: np.ndarray
    capacities: np.ndarray
    n_vertices: int

    def __post_init__(self):
        ep = np.asarray(self.endpoints, dtype=np.int64).reshape(-1, 2)
        cap = np.asarray(self.capacities, dtype=float)
        if cap.shape != (ep.shape[0],):
            raise ValueError("one capacity per edge required")
        if not np.all(cap > 0.0):
            raise ValueError("capacities must be positive")
        if ep.size and (ep.min() < 0 or ep.max() >= self.n_vertices):
            raise ValueError("edge endpoints out of range")
        if not _connected(self.n_vertices, ep):
            raise ValueError("network must be connected")
        object.__setattr__(self, "endpoints", ep)
        object.__setattr__(self, "capacities", cap)

    @property
    def n_edges(self) -> int:
        return self.endpoints.shape[0]

    def with_capacities(self, capacities) -> "FluidNetwork":
        return FluidNetwork(self.endpoints, np.asarray(capacities, float),
                            self.n_vertices)

    @classmethod
    def from_tree(cls, tree: GrowingTree, capacities=None) -> "FluidNetwork":
        child, parent = tree.edge_endpoints()
        ep = np.stack([child, parent], axis=1)
        if capacities is None:
            capacities = np.ones(tree.tau)
        return cls(ep, capacities, tree.n_vertices)


@dataclass(frozen=True)
class FlowSet:
    """Fixed-route AIMD flows and their current throughputs.

    routes hold link ids; alpha/beta/rtt/packet_size are per flow, so a
    heterogeneous population is just different array entries.
    """

    routes: tuple
    alphas: np.ndarray
    betas: np.ndarray
    rtts: np.ndarray
    packet_sizes: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        n = len(self.routes)
        routes = tuple(np.asarray(r, dtype=np.int64) for r in self.routes)
        for r in routes:
            if r.size == 0:
                raise ValueError("every route needs at least one link")
            if len(np.unique(r)) != r.size:
                raise ValueError("routes must be simple (no repeated link)")
        arrays = {}
        for name in ("alphas", "betas", "rtts", "packet_sizes", "X"):
            a = np.broadcast_to(np.asarray(getattr(self, name), float), (n,)).copy()
            arrays[name] = a
        if not np.all(arrays["alphas"] > 0.0):
            raise ValueError("alphas must be positive")
        if not np.all((arrays["betas"] > 0.0) & (arrays["betas"] < 1.0)):
            raise ValueError("betas must lie in (0, 1)")
        if not np.all(arrays["rtts"] > 0.0):
            raise ValueError("rtts must be positive")
        if not np.all(arrays["packet_sizes"] > 0.0):
            raise ValueError("packet sizes must be positive")
        if not np.all(arrays["X"] >= 0.0):
            raise ValueError("throughputs must be nonnegative")
        object.__setattr__(self, "routes", routes)
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @property
    def n_flows(self) -> int:
        return len(self.routes)

    @property
    def growth_rates(self) -> np.ndarray:
        """Linear throughput growth alpha*P/R of each flow, bits/sec^2."""
        return self.alphas * self.packet_sizes / self.rtts

    def with_throughputs(self, X) -> "FlowSet":
        return replace(self, X=np.asarray(X, float))


def uniform_tree_flows(
    tree: GrowingTree,
    n_flows: int,
    *,
    alpha: float = 1.0,
    beta: float = 0.5,
    rtt: float = 1.0,
    packet_size: float = 1.0,
    seed: int = 0,
) -> FlowSet:
    """Flows between uniformly drawn distinct vertex pairs, tree-path routes."""
    rng = np.random.default_rng(seed)
    nv = tree.n_vertices
    routes = []
    while len(routes) < n_flows:
        u, v = rng.integers(0, nv, size=2)
        if u == v:
            continue
        routes.append(tree.path_edges(int(u), int(v)))
    return FlowSet(
        routes=tuple(routes),
        alphas=alpha,
        betas=beta,
        rtts=rtt,
        packet_sizes=packet_size,
        X=np.zeros(n_flows),
    )


@dataclass(frozen=True)
class SyncModel:
    """Per-flow loss propensity pi; draws are conditioned on >= 1 loss.

    pi may be a scalar or a per-flow array.  The realized synchronization
    rate r = E[fraction of congested-link flows that lose] is reported by
    the simulation rather than inverted from a target.
    """

    pi: object = 1.0

    def propensities(self, n_flows: int) -> np.ndarray:
        p = np.broadcast_to(np.asarray(self.pi, float), (n_flows,))
        if not np.all((p > 0.0) & (p <= 1.0)):
            raise ValueError("pi must lie in (0, 1]")
        return p

    def draw(self, rng: np.random.Generator, pi_on_edge: np.ndarray) -> np.ndarray:
        """Loss indicators for the congested link's flows; at least one set."""
        while True:
            xi = rng.random(pi_on_edge.size) < pi_on_edge
            if xi.any():
                return xi


def _edge_loads(network: FluidNetwork, flows: FlowSet, values: np.ndarray):
    """Per-link sums of a per-flow quantity, by brute-force accumulation."""
    out = np.zeros(network.n_edges)
    for i, route in enumerate(flows.routes):
        out[route] += values[i]
    return out


def next_congestion(network: FluidNetwork, flows: FlowSet) -> tuple[float, int]:
    """Time to the next capacity hit and the link where it happens.

    Brute-force scan over links; the simulation loop keeps an
    incrementally updated copy of the same quantities.
    """
    loads = _edge_loads(network, flows, flows.X)
    growth = _edge_loads(network, flows, flows.growth_rates)
    slack = network.capacities - loads
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(growth > 0.0, slack / growth, np.inf)
    tau = np.maximum(tau, 0.0)
    edge = int(np.argmin(tau))  # argmin takes the lowest id on ties
    if not np.isfinite(tau[edge]):
        raise StagnationError("no link accumulates load; no congestion ever")
    return float(tau[edge]), edge


def apply_congestion(
    flows: FlowSet,
    edge: int,
    tau: float,
    sync: SyncModel,
    rng: np.random.Generator,
) -> FlowSet:
    """Advance all flows by tau, then cut the losers on the congested link."""
    x = flows.X + flows.growth_rates * tau
    on_edge = np.array([edge in set(r.tolist()) for r in flows.routes])
    idx = np.nonzero(on_edge)[0]
    if idx.size == 0:
        raise ValueError(f"no flow crosses link {edge}")
    xi = sync.draw(rng, sync.propensities(flows.n_flows)[idx])
    losers = idx[xi]
    x[losers] *= flows.betas[losers]
    return flows.with_throughputs(x)


@dataclass(frozen=True)
class PerformanceReport:
    """Time averages and event statistics of one simulation run."""

    per_flow_q: np.ndarray
    mean_q: float
    mean_tau: float
    realized_r: float
    mean_post_event_throughput: float
    n_events: int
    duration: float
    taus: np.ndarray
    post_event_means: np.ndarray


def run_simulation(
    network: FluidNetwork,
    flows: FlowSet,
    sync: SyncModel,
    epochs: int,
    seed: int = 0,
) -> PerformanceReport:
    """Run `epochs` congestion events and report per-flow time averages.

    Each throughput is linear between its own halvings, so X is stored as
    intercept-at-t0 plus rate, Q accumulates closed-form segment
    integrals, and link hitting times are recomputed from per-link load
    intercepts.  Matches the next_congestion/apply_congestion pair
    event for event under the same seed.
    """
    if epochs < 1:
        raise ValueError("epochs must be positive")
    rng = np.random.default_rng(seed)
    n_flows = flows.n_flows
    n_edges = network.n_edges
    g = flows.growth_rates
    betas = flows.betas
    pi = sync.propensities(n_flows)

    # flows per link, for the congestion-side draw
    edge_flows: list[list[int]] = [[] for _ in range(n_edges)]
    for i, route in enumerate(flows.routes):
        for e in route.tolist():
            edge_flows[e].append(i)
    edge_flows_arr = [np.array(lst, dtype=np.int64) for lst in edge_flows]
    # static flattened member routes per link, so one event updates every
    # touched link with a single weighted bincount instead of a concat
    flat_edges = [
        np.concatenate([flows.routes[i] for i in lst])
        if lst else np.empty(0, dtype=np.int64)
        for lst in edge_flows
    ]
    flat_owner = [
        np.repeat(
            np.arange(len(lst)), [flows.routes[i].size for i in lst]
        )
        for lst in edge_flows
    ]

    growth_per_edge = _edge_loads(network, flows, g)
    intercept_per_edge = _edge_loads(network, flows, flows.X)
    if np.any(intercept_per_edge > network.capacities):
        raise ValueError("initial throughputs already exceed a link capacity")
    live = growth_per_edge > 0.0
    if not np.any(live):
        raise StagnationError("no link accumulates load; no congestion ever")
    live_ids = np.nonzero(live)[0]
    cap_live = network.capacities[live_ids]
    inv_growth_live = 1.0 / growth_per_edge[live_ids]

    # per-flow linear segment: X(t) = x_base + g*(t - t_base) for t >= t_base
    x_base = flows.X.copy()
    t_base = np.zeros(n_flows)
    q_integral = np.zeros(n_flows)
    # per-link intercept of the aggregate load line at absolute t = 0;
    # stays exact between events because every growth rate is constant
    b_edge = intercept_per_edge.copy()

    taus = np.empty(epochs)
    post_means = np.empty(epochs)
    losses = 0
    draws = 0
    t_now = 0.0
    for k in range(epochs):
        t_hit_live = (cap_live - b_edge[live_ids]) * inv_growth_live
        hit = int(np.argmin(t_hit_live))
        edge = int(live_ids[hit])
        t_event = t_hit_live[hit]
        taus[k] = t_event - t_now
        t_now = t_event

        members = edge_flows_arr[edge]
        xi = sync.draw(rng, pi[members])
        losers = members[xi]
        draws += members.size
        losses += losers.size

        x_at_event = x_base[losers] + g[losers] * (t_now - t_base[losers])
        dt = t_now - t_base[losers]
        q_integral[losers] += x_base[losers] * dt + 0.5 * g[losers] * dt * dt
        x_new = betas[losers] * x_at_event
        x_base[losers] = x_new
        t_base[losers] = t_now

        # post-event mean throughput across the congested link's flows
        post_members = x_base[members] + g[members] * (t_now - t_base[members])
        post_means[k] = post_members.mean()

        # every link on a loser's route loses that flow's throughput cut
        # from its load intercept
        cut_by_member = np.zeros(members.size)
        cut_by_member[xi] = x_at_event - x_new
        b_edge -= np.bincount(
            flat_edges[edge],
            weights=cut_by_member[flat_owner[edge]],
            minlength=n_edges,
        )

    # flush the tail segments into Q
    dt = t_now - t_base
    q_integral += x_base * dt + 0.5 * g * dt * dt
    per_flow_q = q_integral / t_now if t_now > 0.0 else np.zeros(n_flows)
    return PerformanceReport(
        per_flow_q=per_flow_q,
        mean_q=float(per_flow_q.mean()),
        mean_tau=float(taus.mean()),
        realized_r=losses / draws if draws else math.nan,
        mean_post_event_throughput=float(post_means.mean()),
        n_events=epochs,
        duration=float(t_now),
        taus=taus,
        post_event_means=post_means,
    )


def assign_capacities(
    network: FluidNetwork,
    strategy: str,
    mean_capacity: float,
    tree_stats: EdgeMeasurements | None = None,
    floor_fraction: float = 0.1,
) -> FluidNetwork:
    """Reallocate link capacities by strategy, keeping the mean fixed.

    Strategies weight each link by 1, max(q_A, q_B), min(q_A, q_B),
    q_A*q_B, or the edge betweenness L_e (mean_field).  Zero-weight
    links (leaf edges under minimum and product) are floored at
    floor_fraction of the mean raw weight so every link keeps usable
    capacity, then everything is rescaled so that mean(C_e) =
    mean_capacity.  The default floor keeps access links serviceable
    without disturbing the relative weighting of the core.
    """
    if strategy not in CAPACITY_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; pick from {CAPACITY_STRATEGIES}")
    if mean_capacity <= 0.0:
        raise ValueError("mean_capacity must be positive")
    if strategy == "uniform":
        raw = np.ones(network.n_edges)
    else:
        if tree_stats is None:
            raise ValueError(f"strategy {strategy!r} needs tree_stats")
        if tree_stats.tau != network.n_edges:
            raise ValueError("tree_stats edge count does not match the network")
        qa = tree_stats.q_younger.astype(float)
        qb = tree_stats.q_older.astype(float)
        if strategy == "maximum":
            raw = np.maximum(qa, qb)
        elif strategy == "minimum":
            raw = np.minimum(qa, qb)
        elif strategy == "product":
            raw = qa * qb
        else:
            raw = tree_stats.betweenness.astype(float)
    mean_raw = raw.mean()
    if mean_raw <= 0.0:
        raw = np.ones_like(raw)
        mean_raw = 1.0
    raw = np.where(raw <= 0.0, floor_fraction * mean_raw, raw)
    capacities = raw * (mean_capacity / raw.mean())
    return network.with_capacities(capacities)
