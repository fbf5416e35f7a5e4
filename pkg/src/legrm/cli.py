"""``legrm`` command line.

Exit codes: 0 success, 1 invalid input (parse, validation, no demand, bad
arguments, unwritable output), 2 numerical failure (non-convergence or
search budget), 3 infeasible instance.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConvergenceError, InfeasibleError, LegrmError, SearchBudgetExceeded

COMMANDS = ("solve-relaxed", "optimize-greedy", "optimize-exact", "policy-emsrb", "policy-mrt-emsrb",
            "simulate", "compare", "robustness", "generate")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="legrm", description="Single-leg pricing and seat inventory experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", action="append", default=[], metavar="PATH",
                   help="scenario file (repeat for several in compare; the estimate in robustness)")
    p.add_argument("--actual", metavar="PATH", help="scenario the arrivals are drawn from")
    p.add_argument("--capacity", type=int, metavar="N", help="override the scenario capacity")
    p.add_argument("--replications", type=int, default=100, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N", help="master seed")
    p.add_argument("--policy", default="greedy,mrt-emsrb", metavar="NAME[,NAME...]",
                   help=f"any of {', '.join(ex.POLICIES)}")
    p.add_argument("--monotone", action="store_true", help="prices may only rise towards departure")
    p.add_argument("--out", metavar="PATH", help="also write the report here")
    p.add_argument("--format", choices=ex.FORMATS, default="table")
    p.add_argument("--preset", default="standard", help="generator preset for generate")
    p.add_argument("--ledger", metavar="PATH", help="simulate: write the per-step ledger as CSV")
    return p


def _config(args: argparse.Namespace) -> ex.ExperimentConfig:
    return ex.ExperimentConfig(
        command=args.command,
        scenarios=tuple(args.scenario),
        actual=args.actual,
        capacity=args.capacity,
        policies=tuple(x.strip() for x in args.policy.split(",") if x.strip()),
        replications=args.replications,
        seed=args.seed,
        monotone=args.monotone,
        out=args.out,
        fmt=args.format,
        preset=args.preset,
        ledger=args.ledger,
    )


def run(cfg: ex.ExperimentConfig) -> str:
    """Execute one command and return the document it prints."""
    c = cfg.command
    if c == "generate":
        doc, summary = ex.cmd_generate(cfg)
        print(summary, file=sys.stderr)
        if cfg.out:
            Path(cfg.out).write_text(doc)
        return doc
    if c == "solve-relaxed":
        rep = ex.cmd_solve_relaxed(cfg)
    elif c == "optimize-greedy":
        rep = ex.cmd_optimize_greedy(cfg)
    elif c == "optimize-exact":
        rep = ex.cmd_optimize_exact(cfg)
    elif c in ("policy-emsrb", "policy-mrt-emsrb"):
        rep = ex.cmd_policy(cfg, mrt=c == "policy-mrt-emsrb")
    elif c == "simulate":
        rep = ex.cmd_simulate(cfg)
    elif c == "compare":
        rep = ex.cmd_compare(cfg).to_report()
    elif c == "robustness":
        rep = ex.cmd_robustness(cfg)
    else:
        raise ValueError(f"unknown command {c!r}")
    return ex.emit_report(rep, cfg.fmt, cfg.out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = run(_config(args))
    except InfeasibleError as e:
        print(f"error: infeasible: {e}", file=sys.stderr)
        return 3
    except (ConvergenceError, SearchBudgetExceeded) as e:
        print(f"error: numerical failure: {e}", file=sys.stderr)
        return 2
    except (LegrmError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    sys.stdout.write(doc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
