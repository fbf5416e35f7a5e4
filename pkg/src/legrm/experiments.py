"""Experiment drivers behind the command-line interface.

Every ``cmd_*`` function takes an :class:`ExperimentConfig` and returns a
:class:`Report`; :func:`emit_report` renders it as an aligned text table or
as CSV.  Rendering is a pure function of the report, so identical inputs
give byte-identical documents.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .demand import curve_arrays
from .discrete import PricingPlan, SearchConfig, exact_optimize, greedy_optimize, plan_stats
from .errors import InfeasibleError
from .policies import NestedPolicy, classic_emsrb_policy, mrt_emsrb_policy
from .relaxed import relaxed_bound, solve_relaxed
from .scenario import PRESETS, Scenario, demand_summary, dump_scenario, generate_synthetic, read_scenario
from .simulator import (MonteCarloResult, RollingGreedy, SimulationOutcome, check_same_shape, ledger_csv,
                        monte_carlo, simulate_fixed_prices, simulate_greedy_rolling, simulate_policy)

POLICIES = ("relaxed", "greedy", "exact", "emsrb", "mrt-emsrb")
FORMATS = ("table", "csv")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    scenarios: tuple[str, ...] = ()
    actual: str | None = None
    capacity: int | None = None
    policies: tuple[str, ...] = ("greedy", "mrt-emsrb")
    replications: int = 100
    seed: int = 0
    monotone: bool = False
    out: str | None = None
    fmt: str = "table"
    preset: str = "standard"
    ledger: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        bad = [p for p in self.policies if p not in POLICIES]
        if bad:
            raise ValueError(f"unknown policy {bad[0]!r}; choose from {', '.join(POLICIES)}")
        if not self.policies:
            raise ValueError("at least one policy is required")
        if self.fmt not in FORMATS:
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.capacity is not None and self.capacity < 0:
            raise ValueError("capacity must be >= 0")

    @property
    def search(self) -> SearchConfig:
        return SearchConfig(monotone_prices=self.monotone)

    def scenario(self) -> Scenario:
        if not self.scenarios:
            raise ValueError("--scenario is required")
        return read_scenario(self.scenarios[0])


@dataclass
class Report:
    """A titled table with ``(key, value)`` metadata lines; cells are strings."""

    title: str
    columns: tuple[str, ...]
    rows: list[tuple[str, ...]] = field(default_factory=list)
    meta: list[tuple[str, str]] = field(default_factory=list)


def money(x: float) -> str:
    return f"{x:.2f}"


def _num(x: float, digits: int = 2) -> str:
    return "" if x is None or np.isnan(x) else f"{x:.{digits}f}"


# -- reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    policy: str
    mean_revenue: float
    std_revenue: float
    mean_seats: float
    std_seats: float
    bound: float

    @property
    def bound_ratio(self) -> float:
        return self.mean_revenue / self.bound if self.bound > 0 else float("nan")


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow] = field(default_factory=list)
    replications: int = 0
    seed: int = 0

    COLUMNS = ("scenario", "policy", "mean_revenue", "std_revenue", "mean_seats", "std_seats",
               "bound", "bound_ratio")

    def to_report(self) -> Report:
        rows = [(r.scenario, r.policy, money(r.mean_revenue), money(r.std_revenue), _num(r.mean_seats),
                 _num(r.std_seats), money(r.bound), _num(r.bound_ratio, 4)) for r in self.rows]
        meta = [("replications", str(self.replications)), ("seed", str(self.seed))]
        return Report("compare", self.COLUMNS, rows, meta)


def emit_report(report: Report, fmt: str = "table", out: str | None = None) -> str:
    """Render ``report``; also write it to ``out`` when given.

    ``csv`` puts metadata in leading ``# key: value`` lines, then the header
    and rows.  ``table`` prints the title, the metadata and a right-aligned
    text table.
    """
    if fmt == "csv":
        buf = io.StringIO()
        for k, v in report.meta:
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        w.writerows(report.rows)
        doc = buf.getvalue()
    elif fmt == "table":
        widths = [len(c) for c in report.columns]
        for row in report.rows:
            widths = [max(w, len(x)) for w, x in zip(widths, row)]
        lines = [report.title]
        lines += [f"{k}: {v}" for k, v in report.meta]
        lines.append("")
        lines.append("  ".join(c.rjust(w) for c, w in zip(report.columns, widths)))
        lines += ["  ".join(x.rjust(w) for x, w in zip(row, widths)) for row in report.rows]
        doc = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is not None:
        Path(out).write_text(doc)
    return doc


# -- policy runners ----------------------------------------------------------------

def make_runner(policy: str, estimated: Scenario, actual: Scenario, capacity: int | None,
                search: SearchConfig = SearchConfig()) -> Callable[[int], SimulationOutcome]:
    """Replication procedure ``seed -> outcome`` for a policy built on
    ``estimated`` and sold against arrivals drawn from ``actual``.

    ``relaxed`` and ``exact`` post their plan computed once before sales
    start; ``greedy`` re-solves at every step.
    """
    check_same_shape(estimated, actual)
    cap = int(actual.capacity if capacity is None else capacity)
    if policy == "relaxed":
        prices = solve_relaxed(estimated, cap).prices
        return lambda sd: simulate_fixed_prices(actual, prices, cap, seed=sd)
    if policy == "exact":
        plan = exact_optimize(estimated, cap, search)
        return lambda sd: simulate_fixed_prices(actual, plan, cap, seed=sd)
    if policy == "greedy":
        solver = RollingGreedy(estimated, search)
        return lambda sd: simulate_greedy_rolling(estimated, actual, cap, seed=sd, solver=solver)
    if policy == "emsrb":
        pol = classic_emsrb_policy(estimated, cap)
    elif policy == "mrt-emsrb":
        pol = mrt_emsrb_policy(estimated, cap)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return lambda sd: simulate_policy(actual, pol, cap, seed=sd)


def run_policy(policy: str, estimated: Scenario, actual: Scenario, cfg: ExperimentConfig) -> MonteCarloResult:
    """Monte Carlo of one policy; every policy uses the same master seed."""
    return monte_carlo(make_runner(policy, estimated, actual, cfg.capacity, cfg.search), cfg.replications, cfg.seed)


def _bound(s: Scenario, capacity: int | None) -> float:
    cap = s.capacity if capacity is None else capacity
    return relaxed_bound(s, cap) if cap > 0 else 0.0


# -- commands ------------------------------------------------------------------------

def _price_rows(s: Scenario, prices: np.ndarray) -> list[tuple[str, ...]]:
    return [(str(t),) + tuple(_num(prices[i, t]) for i in range(s.n_products))
            for t in range(s.horizon - 1, -1, -1)]


def cmd_solve_relaxed(cfg: ExperimentConfig) -> Report:
    """Continuous optimal prices, one row per step in selling order."""
    s = cfg.scenario()
    sol = solve_relaxed(s, cfg.capacity)
    alpha, beta = curve_arrays(s)
    live = (alpha > 0) & ~np.isnan(sol.prices)
    ident = float(np.max(np.abs(sol.prices[live] - sol.mu_star - 1.0 / beta[live]), initial=0.0))
    k = sol.kkt
    meta = [
        ("mu_star", f"{sol.mu_star:.6f}"),
        ("bound", money(sol.bound)),
        ("newton_iterations", str(sol.newton_iterations)),
        ("expected_demand", _num(sol.primal_demand, 4)),
        ("kkt_gradient", f"{k.gradient:.3e}"),
        ("kkt_capacity_slack", f"{k.capacity_slack:.3e}"),
        ("kkt_complementary_slackness", f"{k.complementary_slackness:.3e}"),
        ("kkt_duality_gap", f"{k.duality_gap:.3e}"),
        ("max_abs_p_minus_mu_minus_inv_beta", f"{ident:.3e}"),
    ]
    return Report("solve-relaxed", ("t",) + tuple(s.product_ids), _price_rows(s, sol.prices), meta)


def _plan_report(title: str, s: Scenario, plan: PricingPlan, capacity: int | None) -> Report:
    if not plan.feasible:
        raise InfeasibleError("even the highest prices overflow capacity")
    stats = plan_stats(plan, s, capacity)
    meta = [("expected_revenue", money(stats["expected_revenue"])),
            ("expected_demand", _num(stats["expected_demand"], 4)),
            ("bound", money(stats["bound"])),
            ("bound_ratio", _num(stats["bound_ratio"], 6))]
    return Report(title, ("t",) + tuple(s.product_ids), _price_rows(s, plan.prices), meta)


def cmd_optimize_greedy(cfg: ExperimentConfig) -> Report:
    s = cfg.scenario()
    return _plan_report("optimize-greedy", s, greedy_optimize(s, cfg.capacity, config=cfg.search), cfg.capacity)


def cmd_optimize_exact(cfg: ExperimentConfig) -> Report:
    s = cfg.scenario()
    return _plan_report("optimize-exact", s, exact_optimize(s, cfg.capacity, cfg.search), cfg.capacity)


def _nested_report(title: str, nested: NestedPolicy) -> Report:
    cols = ("rank", "family", "fare", "adjusted_fare", "mean_demand", "std_demand", "protection", "booking_limit")
    rows = []
    n = len(nested.ordered_classes)
    for j, c in enumerate(nested.ordered_classes):
        prot = _num(nested.protections[j]) if j < n - 1 else ""
        rows.append((str(j + 1), c.family, money(c.fare), money(c.adjusted_fare), _num(c.adjusted_mean, 4),
                     _num(c.adjusted_std, 4), prot, _num(nested.booking_limits[j])))
    return Report(title, cols, rows, [("capacity", _num(nested.capacity))])


def cmd_policy(cfg: ExperimentConfig, mrt: bool) -> Report:
    """Nested policy at the opening of sales (demand aggregated over the whole horizon)."""
    s = cfg.scenario()
    build = mrt_emsrb_policy if mrt else classic_emsrb_policy
    pol = build(s, cfg.capacity)
    return _nested_report("policy-mrt-emsrb" if mrt else "policy-emsrb", pol.steps[s.horizon - 1])


def cmd_simulate(cfg: ExperimentConfig) -> Report:
    """Per-replication outcomes of the first selected policy."""
    est = cfg.scenario()
    act = read_scenario(cfg.actual) if cfg.actual else est
    policy = cfg.policies[0]
    res = run_policy(policy, est, act, cfg)
    if cfg.ledger:
        Path(cfg.ledger).write_text(ledger_csv(res.outcomes, act.product_ids))
    rows = [(str(i), str(sd), money(o.revenue), str(o.seats_sold))
            for i, (sd, o) in enumerate(zip(res.seeds, res.outcomes))]
    meta = [("policy", policy), ("replications", str(res.n)), ("seed", str(cfg.seed)),
            ("mean_revenue", money(res.mean)), ("std_revenue", money(res.std)),
            ("mean_seats", _num(res.mean_seats)), ("std_seats", _num(res.std_seats))]
    if res.n_warning:
        meta.append(("warning", "single replication, std reported as 0"))
    return Report("simulate", ("replication", "seed", "revenue", "seats"), rows, meta)


def cmd_compare(cfg: ExperimentConfig) -> ComparisonReport:
    """Monte Carlo of every selected policy on every scenario, common random numbers."""
    if not cfg.scenarios:
        raise ValueError("--scenario is required")
    report = ComparisonReport(replications=cfg.replications, seed=cfg.seed)
    for path in cfg.scenarios:
        s = read_scenario(path)
        bound = _bound(s, cfg.capacity)
        for policy in cfg.policies:
            r = run_policy(policy, s, s, cfg)
            report.rows.append(ComparisonRow(Path(path).stem, policy, r.mean, r.std, r.mean_seats, r.std_seats, bound))
    return report


@dataclass(frozen=True)
class RobustnessRow:
    estimated: str
    actual: str
    policy: str
    potential: MonteCarloResult
    achieved: MonteCarloResult


def robustness_rows(estimated: Scenario, actual: Scenario, cfg: ExperimentConfig,
                    names: tuple[str, str] = ("estimated", "actual")) -> list[RobustnessRow]:
    """Potential (policy built on the actual data) and achieved (built on the
    estimate) revenue of each policy, both sold against the actual data."""
    check_same_shape(estimated, actual)
    return [RobustnessRow(names[0], names[1], p, run_policy(p, actual, actual, cfg),
                          run_policy(p, estimated, actual, cfg)) for p in cfg.policies]


def cmd_robustness(cfg: ExperimentConfig) -> Report:
    if not cfg.actual:
        raise ValueError("--actual is required")
    est, act = cfg.scenario(), read_scenario(cfg.actual)
    rows = robustness_rows(est, act, cfg, (Path(cfg.scenarios[0]).stem, Path(cfg.actual).stem))
    cols = ("estimated", "actual", "policy", "potential_revenue", "potential_std", "achieved_revenue",
            "achieved_std", "achieved_seats")
    out = [(r.estimated, r.actual, r.policy, money(r.potential.mean), money(r.potential.std),
            money(r.achieved.mean), money(r.achieved.std), _num(r.achieved.mean_seats)) for r in rows]
    return Report("robustness", cols, out, [("replications", str(cfg.replications)), ("seed", str(cfg.seed))])


def cmd_generate(cfg: ExperimentConfig) -> tuple[str, str]:
    """Synthetic scenario document and a one-line demand summary."""
    if cfg.preset not in PRESETS:
        raise ValueError(f"unknown preset {cfg.preset!r}; choose from {', '.join(PRESETS)}")
    spec = PRESETS[cfg.preset]
    if cfg.capacity is not None:
        spec = replace(spec, capacity=cfg.capacity)
    s = generate_synthetic(spec, cfg.seed)
    d = demand_summary(s)
    per = ", ".join(f"{k}={v:.2f}" for k, v in d.per_product.items())
    kind = "demand-rich" if d.demand_rich() else "demand-poor"
    return dump_scenario(s), f"demand at lowest prices: {per}; total {d.total:.2f} for {d.capacity} seats ({kind})"
