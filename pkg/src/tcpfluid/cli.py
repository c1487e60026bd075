"""Command line front end for the analytic laws and simulators.

Subcommands
    tcp-dist          stationary window pdf/ccdf grid plus moment summary
    validate          Monte Carlo window process against the analytic law
    tree              growing-tree joint/marginal tables, checks, overlays
    netsim            multi-link AIMD capacity-strategy comparison
    specfun-selftest  identity checks of the special-function kernel

Every output file carries a header (CSV comment lines, or a "meta"
object in JSON) echoing the subcommand, the package version, the seed,
and the full parameter set; re-running the same command reproduces each
file byte for byte.  Exit codes: 0 success, 2 invalid configuration,
3 a requested check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .aimd_net import (
    CAPACITY_STRATEGIES,
    FluidNetwork,
    SyncModel,
    assign_capacities,
    run_simulation,
    uniform_tree_flows,
)
from .specfun import (
    digamma,
    euler_product_L,
    kronecker_expansion_check,
    pochhammer_signed,
    stirling_first_unsigned,
    upper_incomplete_gamma,
)
from .tcp_finite import (
    FiniteBufferParams,
    buffer_loss_ratio_A,
    effective_loss,
    finite_frfr_pdf,
    finite_window_pdf,
    phi_moment,
    solve_finite_distribution,
)
from .tcp_infinite import (
    AnalyticWindowDistribution,
    TcpParams,
    frfr_mean_correction,
    window_moment,
)
from .tree_analytic import DistTable, ccdf_n, ccdf_q, marginal_n, marginal_q
from .tree_gen import TreeParams, enumerate_exact, grow, measure
from .window_sim import SimConfig, compare_histogram, merge_results, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3


@dataclass(frozen=True)
class RunConfig:
    """One resolved invocation: what ran, with what, into which files."""

    subcommand: str
    params: dict
    outdir: str
    seed: int
    format: str

    def meta(self) -> dict:
        out = {
            "subcommand": self.subcommand,
            "version": __version__,
            "seed": self.seed,
            "format": self.format,
        }
        out.update(self.params)
        return out


def _prepare_outdir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ValueError(f"output directory not writable: {exc}") from exc


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, meta: dict, columns: dict[str, list]) -> None:
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={_fmt(value)}\n")
        writer = csv.writer(fh)
        writer.writerow(columns.keys())
        for row in zip(*columns.values()):
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit_table(cfg: RunConfig, name: str, columns: dict[str, list]) -> str:
    """Write one table in the configured format; returns the path."""
    if cfg.format == "json":
        path = os.path.join(cfg.outdir, f"{name}.json")
        _write_json(path, {"meta": cfg.meta(), "columns": columns})
    else:
        path = os.path.join(cfg.outdir, f"{name}.csv")
        _write_csv(path, cfg.meta(), columns)
    return path


def _child_seed(seed: int, index: int) -> int:
    """Derived stream for realization `index`; stable across job counts."""
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def _run_parallel(worker, payloads, jobs: int) -> list:
    if jobs <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, payloads))


def _tcp_params(args, beta: float | None = None) -> TcpParams:
    # the distribution depends on lambda and alpha only through p, so
    # alpha is pinned to 1 and the CLI exposes p directly
    return TcpParams(
        alpha=1.0,
        loss_rate=args.p,
        m=args.m,
        beta=args.beta if beta is None else beta,
        link_delay=args.bdp / 2.0,
    )


# ---------------------------------------------------------------- tcp-dist


def cmd_tcp_dist(args) -> int:
    cfg = RunConfig(
        "tcp-dist",
        {
            "p": args.p,
            "m": args.m,
            "beta": args.beta,
            "buffer": args.buffer,
            "bdp": args.bdp,
            "variant": args.variant,
            "grid_points": args.grid_points,
        },
        args.outdir,
        args.seed,
        args.format,
    )
    _prepare_outdir(args.outdir)
    params = _tcp_params(args)

    if args.buffer is None:
        dist = AnalyticWindowDistribution.build(params, args.variant)
        w = np.linspace(0.0, dist.support_cutoff(), args.grid_points)
        pdf = dist.pdf(w)
        ccdf = dist.ccdf(w)
        mean_plain = window_moment(params, 1.0 / (params.m + 1.0))
        second_plain = window_moment(params, 2.0 / (params.m + 1.0))
        mean = mean_plain
        if args.variant == "frfr":
            mean = mean_plain + frfr_mean_correction(params)
        elif args.variant == "wan":
            mean = float(np.trapezoid(w * pdf, w))
        summary = {
            "A": None,
            "lambda_eff": params.loss_rate,
            "moments": {
                "mean": mean,
                "mean_plain": mean_plain,
                "second_moment_plain": second_plain,
                "stdev_plain": math.sqrt(second_plain - mean_plain**2),
            },
        }
    else:
        fb = FiniteBufferParams(params, buffer_size=args.buffer)
        sol = solve_finite_distribution(fb)
        top = fb.effective_limit
        w = np.linspace(0.0, top, args.grid_points)
        if args.variant == "frfr":
            pdf, atom_at, atom_weight = finite_frfr_pdf(sol, w)
        else:
            pdf = finite_window_pdf(sol, w)
            atom_at, atom_weight = None, 0.0
        # cumulative trapezoid of the density plus the atom
        below = np.concatenate(
            [[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(w))]
        )
        ccdf = 1.0 - below
        if atom_at is not None:
            ccdf = np.where(w <= atom_at, ccdf, ccdf - atom_weight)
            mean = float(np.trapezoid(w * pdf, w)) + atom_at * atom_weight
        else:
            mean = phi_moment(sol, 1.0) / (1.0 - sol.A)
        summary = {
            "A": sol.A,
            "lambda_eff": effective_loss(fb),
            "moments": {"mean": mean, "effective_limit": top},
        }
        if atom_at is not None:
            summary["point_mass"] = {"at": atom_at, "weight": atom_weight}

    _emit_table(cfg, "tcp_dist_pdf", {"w": list(w), "pdf": list(pdf), "ccdf": list(ccdf)})
    _write_json(
        os.path.join(args.outdir, "tcp_dist_summary.json"),
        {"meta": cfg.meta(), **summary},
    )
    return EXIT_OK


# ---------------------------------------------------------------- validate


def _validate_chunk(payload) -> "object":
    cfg_args, chunk_events, chunk_seed = payload
    sim_cfg = SimConfig(
        params=cfg_args["fb"],
        horizon=chunk_events,
        seed=chunk_seed,
        enable_frfr=cfg_args["variant"] == "frfr",
        enable_wan_idle=cfg_args["variant"] == "wan",
        n_bins=cfg_args["bins"],
    )
    return simulate(sim_cfg)


def cmd_validate(args) -> int:
    if args.events < 1000:
        raise ValueError("--events must be at least 1000")
    analytic_beta = args.beta if args.analytic_beta is None else args.analytic_beta
    cfg = RunConfig(
        "validate",
        {
            "p": args.p,
            "m": args.m,
            "beta": args.beta,
            "analytic_beta": analytic_beta,
            "buffer": args.buffer,
            "bdp": args.bdp,
            "variant": args.variant,
            "events": args.events,
            "bins": args.bins,
            "jobs": args.jobs,
            "chi2_significance": args.chi2_significance,
            "ks_threshold": args.ks_threshold,
            "loss_ratio_tolerance": args.loss_ratio_tolerance,
        },
        args.outdir,
        args.seed,
        args.format,
    )
    _prepare_outdir(args.outdir)

    sim_params = _tcp_params(args)
    buffer_size = math.inf if args.buffer is None else args.buffer
    fb_sim = FiniteBufferParams(sim_params, buffer_size=buffer_size)
    chunk = {"fb": fb_sim, "variant": args.variant, "bins": args.bins}
    per_job = [args.events // args.jobs] * args.jobs
    per_job[-1] += args.events - sum(per_job)
    payloads = [
        (chunk, per_job[i], _child_seed(args.seed, i)) for i in range(args.jobs)
    ]
    result = merge_results(*_run_parallel(_validate_chunk, payloads, args.jobs))

    analytic_params = _tcp_params(args, beta=analytic_beta)
    point_mass = None
    checks: dict[str, bool] = {}
    report: dict = {}
    if args.buffer is None:
        dist = AnalyticWindowDistribution.build(analytic_params, args.variant)
        fit = compare_histogram(result, dist.pdf)
    else:
        sol = solve_finite_distribution(
            FiniteBufferParams(analytic_params, buffer_size=args.buffer)
        )
        if args.variant == "frfr":

            def pdf(w, _sol=sol):
                return finite_frfr_pdf(_sol, w)[0]

            _, loc, weight = finite_frfr_pdf(sol, np.array([0.0]))
            point_mass = (loc, weight)
        else:

            def pdf(w, _sol=sol):
                return finite_window_pdf(_sol, w)

        fit = compare_histogram(result, pdf, point_mass=point_mass)
        share = result.n_buffer_losses / result.n_events
        report["buffer_loss_share"] = share
        report["A_analytic"] = sol.A
        checks["loss_ratio"] = abs(share - sol.A) <= args.loss_ratio_tolerance

    checks["chi2"] = fit.chi2_pvalue >= args.chi2_significance
    checks["ks"] = fit.ks_distance <= args.ks_threshold
    passed = all(checks.values())
    report.update(
        {
            "meta": cfg.meta(),
            "chi2_stat": fit.chi2_stat,
            "chi2_pvalue": fit.chi2_pvalue,
            "dof": fit.dof,
            "ks_distance": fit.ks_distance,
            "n_events": fit.n_events,
            "mean_window": result.mean_window,
            "checks": checks,
            "pass": passed,
        }
    )
    _write_json(os.path.join(args.outdir, "validate_report.json"), report)
    print("validate:", "PASS" if passed else "FAIL", json.dumps(checks, sort_keys=True))
    return EXIT_OK if passed else EXIT_CHECK


# ---------------------------------------------------------------- tree


def _tree_counts(payload) -> tuple[np.ndarray, np.ndarray]:
    tau, alpha, seed = payload
    mm = measure(grow(TreeParams(alpha_t=alpha, tau=tau, seed=seed)))
    return (
        np.bincount(mm.n, minlength=tau),
        np.bincount(mm.q_younger, minlength=tau),
    )


def cmd_tree(args) -> int:
    realizations = args.realizations
    if args.check == "ccdf" and realizations == 0:
        realizations = 20
    cfg = RunConfig(
        "tree",
        {
            "tau": args.tau,
            "alpha": args.alpha,
            "realizations": realizations,
            "enumerate": args.enumerate,
            "check": args.check,
            "check_tolerance": args.check_tolerance,
            "max_rows": args.max_rows,
            "max_q_rows": args.max_q_rows,
            "jobs": args.jobs,
        },
        args.outdir,
        args.seed,
        args.format,
    )
    _prepare_outdir(args.outdir)
    tau, alpha = args.tau, args.alpha

    summary: dict = {"meta": cfg.meta()}
    failed = False

    if args.enumerate:
        if tau > 10:
            raise ValueError("--enumerate iterates all histories; needs --tau <= 10")
        exact = enumerate_exact(TreeParams(alpha_t=alpha, tau=tau, seed=0))
        analytic = DistTable.from_analytic(tau, alpha)
        keys = set(exact.values) | set(analytic.values)
        gap = max(abs(exact.prob(n, q) - analytic.prob(n, q)) for n, q in keys)
        summary["enumerate_max_abs_error"] = gap
        if gap > 1e-12:
            failed = True
            print(f"tree enumerate: FAIL max|exact-analytic| = {gap:.3e}")
        else:
            print(f"tree enumerate: PASS max|exact-analytic| = {gap:.3e}")

    # descendant counts n span the whole tree; in-degrees q die off within
    # a few dozen values, and the analytic q series degrades (and slows
    # down) far past the support, so the two tables get separate row caps
    n_max = min(tau - 1, args.max_rows - 1)
    q_max = min(tau - 1, args.max_q_rows - 1)
    kn = np.arange(n_max + 1)
    kq = np.arange(q_max + 1)
    pn = [marginal_n(tau, alpha, int(k)) for k in kn]
    cn = [ccdf_n(tau, alpha, int(k)) for k in kn]
    pq = [marginal_q(tau, alpha, int(k)) for k in kq]
    cq = [ccdf_q(tau, alpha, int(k)) for k in kq]
    cols_n: dict[str, list] = {"k": list(kn), "P_n": pn, "ccdf_n": cn}
    cols_q: dict[str, list] = {"k": list(kq), "P_q": pq, "ccdf_q": cq}

    if realizations > 0:
        payloads = [
            (tau, alpha, _child_seed(args.seed, i)) for i in range(realizations)
        ]
        parts = _run_parallel(_tree_counts, payloads, args.jobs)
        counts_n = sum(p[0] for p in parts)
        counts_q = sum(p[1] for p in parts)
        total = float(realizations * tau)
        emp_pn = counts_n / total
        emp_pq = counts_q / total
        # survival with the bin itself included, matching the analytic law
        emp_cn = emp_pn[::-1].cumsum()[::-1]
        emp_cq = emp_pq[::-1].cumsum()[::-1]
        cols_n["empirical_P_n"] = list(emp_pn[: n_max + 1])
        cols_n["empirical_ccdf_n"] = list(emp_cn[: n_max + 1])
        cols_q["empirical_P_q"] = list(emp_pq[: q_max + 1])
        cols_q["empirical_ccdf_q"] = list(emp_cq[: q_max + 1])
        if args.check == "ccdf":
            gap_n = max(abs(emp_cn[k] - cn[k]) for k in range(n_max + 1))
            gap_q = max(abs(emp_cq[k] - cq[k]) for k in range(q_max + 1))
            summary["ccdf_check"] = {"sup_error_n": gap_n, "sup_error_q": gap_q}
            ok = max(gap_n, gap_q) <= args.check_tolerance
            print(
                f"tree ccdf check: {'PASS' if ok else 'FAIL'} "
                f"sup|F_emp-F| n={gap_n:.2e} q={gap_q:.2e} "
                f"tolerance={args.check_tolerance:g}"
            )
            failed = failed or not ok

    _emit_table(cfg, "tree_marginal_n", cols_n)
    _emit_table(cfg, "tree_marginal_q", cols_q)
    summary["mean_n_tabulated"] = float(np.dot(kn, pn))
    summary["mean_q_tabulated"] = float(np.dot(kq, pq))
    _write_json(os.path.join(args.outdir, "tree_summary.json"), summary)
    return EXIT_CHECK if failed else EXIT_OK


# ---------------------------------------------------------------- netsim


def _netsim_one(payload) -> dict:
    conf, strategy = payload
    tree = grow(
        TreeParams(
            alpha_t=conf["alpha"],
            tau=conf["nodes"] - 1,
            seed=_child_seed(conf["seed"], 0),
        )
    )
    stats = measure(tree)
    base = FluidNetwork.from_tree(
        tree, np.full(tree.tau, conf["mean_capacity"])
    )
    network = assign_capacities(
        base, strategy, conf["mean_capacity"], tree_stats=stats
    )
    flows = uniform_tree_flows(
        tree,
        conf["flows"],
        beta=conf["beta"],
        seed=_child_seed(conf["seed"], 1),
    )
    report = run_simulation(
        network,
        flows,
        SyncModel(pi=conf["pi"]),
        conf["epochs"],
        seed=_child_seed(conf["seed"], 2),
    )
    caps = np.sort(network.capacities)[::-1]
    return {
        "strategy": strategy,
        "per_flow_q": report.per_flow_q.tolist(),
        "capacities_sorted_desc": caps.tolist(),
        "mean_q": report.mean_q,
        "median_q": float(np.median(report.per_flow_q)),
        "mean_tau": report.mean_tau,
        "realized_r": report.realized_r,
        "duration": report.duration,
    }


NETSIM_DEFAULTS = {
    "nodes": 10000,
    "alpha": 0.5,
    "strategy": "all",
    "mean_capacity": 1e5,
    "flows": 1000,
    "epochs": None,
    "pi": 1.0,
    "beta": 0.5,
    "seed": 0,
}


def cmd_netsim(args) -> int:
    file_conf = {}
    if args.config is not None:
        with open(args.config) as fh:
            file_conf = json.load(fh)
        unknown = set(file_conf) - set(NETSIM_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    # explicit flags beat the config file, the file beats built-ins
    conf = {
        key: getattr(args, key)
        if getattr(args, key) is not None
        else file_conf.get(key, default)
        for key, default in NETSIM_DEFAULTS.items()
    }
    if conf["epochs"] is None:
        conf["epochs"] = 100 * conf["flows"]
    if conf["nodes"] < 3:
        raise ValueError("--nodes must be at least 3")
    cfg = RunConfig(
        "netsim",
        {k: v for k, v in conf.items() if k != "seed"} | {"check": args.check},
        args.outdir,
        conf["seed"],
        args.format,
    )
    _prepare_outdir(args.outdir)

    strategies = (
        list(CAPACITY_STRATEGIES) if conf["strategy"] == "all" else [conf["strategy"]]
    )
    results = _run_parallel(
        _netsim_one, [(conf, s) for s in strategies], args.jobs
    )

    summary: dict = {"meta": cfg.meta(), "strategies": {}}
    cdf_cols: dict[str, list] = {"strategy": [], "q": [], "cdf": []}
    cap_cols: dict[str, list] = {"strategy": [], "capacity": [], "ccdf": []}
    for res in results:
        name = res["strategy"]
        summary["strategies"][name] = {
            k: res[k]
            for k in ("mean_q", "median_q", "mean_tau", "realized_r", "duration")
        }
        per_q = np.sort(np.asarray(res["per_flow_q"]))
        n = per_q.size
        _emit_table(
            cfg,
            f"netsim_flows_{name}",
            {"flow": list(range(n)), "q": list(per_q)},
        )
        cdf_cols["strategy"].extend([name] * n)
        cdf_cols["q"].extend(per_q.tolist())
        cdf_cols["cdf"].extend(((np.arange(n) + 1.0) / n).tolist())
        caps = np.asarray(res["capacities_sorted_desc"])
        cap_cols["strategy"].extend([name] * caps.size)
        cap_cols["capacity"].extend(caps.tolist())
        cap_cols["ccdf"].extend(((np.arange(caps.size) + 1.0) / caps.size).tolist())
    _emit_table(cfg, "netsim_q_cdf", cdf_cols)
    _emit_table(cfg, "netsim_capacity_ccdf", cap_cols)

    failed = False
    if len(strategies) == len(CAPACITY_STRATEGIES):
        q = {r["strategy"]: r["mean_q"] for r in results}
        ordered = (
            q["mean_field"] > q["minimum"] > q["product"] > q["maximum"] > q["uniform"]
        )
        summary["ordering_mean_field_minimum_product_maximum_uniform"] = ordered
        summary["mean_q_ratio_mean_field_over_uniform"] = (
            q["mean_field"] / q["uniform"]
        )
        print(
            "netsim ordering:",
            "PASS" if ordered else "FAIL",
            json.dumps({k: round(v, 2) for k, v in q.items()}, sort_keys=True),
        )
        if args.check == "ordering":
            failed = not ordered
    elif args.check == "ordering":
        raise ValueError("--check ordering needs --strategy all")

    _write_json(os.path.join(args.outdir, "netsim_summary.json"), summary)
    return EXIT_CHECK if failed else EXIT_OK


# ------------------------------------------------------- specfun-selftest


def cmd_specfun_selftest(args) -> int:
    failures = []

    def check(name: str, err: float, bound: float) -> None:
        ok = err <= bound
        print(f"specfun {name}: {'PASS' if ok else 'FAIL'} ({err:.2e})")
        if not ok:
            failures.append(name)

    worst = 0.0
    for x in (-2.5, -0.5, 0.3, 2.0):
        for n in range(7):
            sign, logmag = pochhammer_signed(x, n)
            direct = math.prod(x + j for j in range(n))
            got = sign * math.exp(logmag) if logmag > -math.inf else 0.0
            worst = max(worst, abs(got - direct) / max(1.0, abs(direct)))
    check("pochhammer product", worst, 1e-12)

    direct = math.prod(1.0 - 0.25**k for k in range(1, 60))
    check("euler product L(1/4)", abs(euler_product_L(0.25) - direct), 1e-14)

    row = [stirling_first_unsigned(6, k) for k in range(7)]
    check(
        "stirling row n=6",
        float(row != [0, 120, 274, 225, 85, 15, 1]),
        0.5,
    )

    worst = 0.0
    for z, x in ((0.5, 0.3), (2.0, 1.0), (3.5, 7.0)):
        lhs = upper_incomplete_gamma(z + 1.0, x)
        rhs = z * upper_incomplete_gamma(z, x) + x**z * math.exp(-x)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    check("incomplete gamma recurrence", worst, 1e-12)

    worst = abs(digamma(1.0) + 0.5772156649015329)
    for x in (0.3, 1.7, 9.2):
        worst = max(worst, abs(digamma(x + 1.0) - digamma(x) - 1.0 / x))
    check("digamma recurrence", worst, 1e-12)

    check("kronecker expansion n=12", abs(kronecker_expansion_check(12)), 1e-10)

    return EXIT_CHECK if failures else EXIT_OK


# ---------------------------------------------------------------- parser


def _add_common(sub, *, seed_default: int = 0) -> None:
    sub.add_argument("--outdir", default=".", help="output directory")
    sub.add_argument("--seed", type=int, default=seed_default)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--jobs", type=int, default=1, help="parallel workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcpfluid",
        description=__doc__.split("\n\n")[0],
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("tcp-dist", help="analytic window distribution tables")
    p.add_argument("--p", type=float, required=True, help="loss probability per unit growth")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--buffer", type=float, default=None, help="buffer size B (finite law)")
    p.add_argument("--bdp", type=float, default=0.0, help="bandwidth-delay product 2*alpha*D")
    p.add_argument("--variant", choices=("plain", "frfr", "wan"), default="plain")
    p.add_argument("--grid-points", type=int, default=512)
    _add_common(p)
    p.set_defaults(func=cmd_tcp_dist)

    p = sub.add_parser("validate", help="simulator vs analytic law")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument(
        "--analytic-beta",
        type=float,
        default=None,
        help="compare against a law with a different beta (mismatch probe)",
    )
    p.add_argument("--buffer", type=float, default=None)
    p.add_argument("--bdp", type=float, default=0.0)
    p.add_argument("--variant", choices=("plain", "frfr", "wan"), default="plain")
    p.add_argument("--events", type=int, default=20000)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--chi2-significance", type=float, default=0.01)
    p.add_argument("--ks-threshold", type=float, default=0.08)
    p.add_argument("--loss-ratio-tolerance", type=float, default=0.02)
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tree", help="growing-tree statistics")
    p.add_argument("--tau", type=int, required=True, help="number of edges")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--realizations", type=int, default=0)
    p.add_argument("--enumerate", action="store_true", help="exact history enumeration check")
    p.add_argument("--check", choices=("none", "ccdf"), default="none")
    p.add_argument("--check-tolerance", type=float, default=5e-3)
    p.add_argument("--max-rows", type=int, default=1000)
    p.add_argument("--max-q-rows", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("netsim", help="AIMD network strategy comparison")
    p.add_argument("--config", default=None, help="JSON file with the fields below")
    # None defaults so a config file can fill anything not given on the line
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None, help="tree scaling parameter")
    p.add_argument("--strategy", choices=CAPACITY_STRATEGIES + ("all",), default=None)
    p.add_argument("--mean-capacity", type=float, default=None)
    p.add_argument("--flows", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None, help="default 100*flows")
    p.add_argument("--pi", type=float, default=None, help="per-flow loss propensity")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--check", choices=("none", "ordering"), default="none")
    p.add_argument("--outdir", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.set_defaults(func=cmd_netsim)

    p = sub.add_parser("specfun-selftest", help="special-function identity checks")
    p.set_defaults(func=cmd_specfun_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
