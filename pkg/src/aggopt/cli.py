"""Command-line front end.

Subcommands: run, oracle, sweep, dump-config. Outputs are plot-ready CSV
files plus a JSON summary; rendering is left to external tools. Exit
codes: 0 success, 1 usage/config error, 2 numerical divergence, 3 I/O
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    ScenarioConfig,
    dump_config,
    parse_raw,
    resolve_config,
    scenario_graph,
    scenario_problem,
    to_sim_config,
)
from .consensus import equilibrium_residual
from .engine import DivergenceError, run
from .graphs import laplacian, lambda_bound
from .oracles import solve_kkt_quadratic
from .output import write_events_csv, write_summary, write_trajectory_csv
from .problems import DER4_PUBLISHED_SOLUTION

__all__ = ["main", "console_main", "run_scenario"]

logger = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise _UsageError(message)


def _flag_entries(args: argparse.Namespace) -> dict[str, tuple[str, int]]:
    """Map CLI flags onto config keys; flags override file entries."""
    entries: dict[str, tuple[str, int]] = {}
    for key, value in (
        ("trigger", args.trigger),
        ("delta", args.delta),
        ("step", args.step),
        ("tend", args.tend),
        ("output", args.output),
        ("seed", args.seed),
    ):
        if value is not None:
            entries[key] = (str(value), 0)
    return entries


def _load_scenario(args: argparse.Namespace) -> ScenarioConfig:
    if args.scenario is None:
        raise ConfigError("scenario required")
    mo = re.fullmatch(r"file\((.+)\)", args.scenario)
    if mo is not None:
        text = Path(mo.group(1)).read_text()
        entries = parse_raw(text)
    else:
        entries = {"scenario": (args.scenario, 0)}
    entries.update(_flag_entries(args))
    return resolve_config(entries)


def _rate_bound(problem) -> tuple[float | None, float | None, float | None]:
    if problem.rate_metadata is None:
        return None, None, None
    kappa, lipschitz = problem.rate_metadata
    return kappa, lipschitz, kappa / (1.0 + 2.0 * lipschitz)


def run_scenario(sc: ScenarioConfig, compare_periodic: float | None = None) -> dict:
    """Oracle solve + distributed run; writes trajectory.csv, events.csv,
    and summary.json into the scenario's output directory."""
    cfg = to_sim_config(sc)
    problem, graph = cfg.problem, cfg.graph
    x_star = solve_kkt_quadratic(problem)
    result = run(cfg, x_star=x_star)
    kappa, lipschitz, bound = _rate_bound(problem)

    last = -1
    residual = equilibrium_residual(
        problem, graph, result.x[last], result.eta[last], result.w[last]
    )
    summary = {
        "config": dump_config(sc),
        "lambda": result.metrics.lambda_bound,
        "scheme_warnings": list(result.metrics.scheme_warnings),
        "final_decisions": result.metrics.final_x,
        "oracle_solution": x_star,
        "relative_error": result.metrics.relative_error,
        "equilibrium_residual_last_sample": residual,
        "rate_constants": {"kappa": kappa, "lipschitz": lipschitz, "rate_bound": bound},
        "fitted_decay_rate": result.metrics.fitted_decay_rate,
        "events": {
            "per_agent_counts": result.metrics.broadcast_counts,
            "min_intervals": result.metrics.min_interevent,
            "total": result.events.total,
        },
    }
    if sc.scenario == "der4":
        # The published operating point for this preset is not a stationary
        # point of its stated coefficients; errors are reported against the
        # computed optimum.
        summary["published_reference_solution"] = list(DER4_PUBLISHED_SOLUTION)
        summary["published_reference_residual_note"] = (
            "the published reference solution does not satisfy the first-order "
            "optimality condition of the stated coefficients; relative_error is "
            "measured against oracle_solution"
        )
    if compare_periodic is not None:
        periodic_sc = replace(
            sc, trigger="periodic", period=compare_periodic, beta1=None, beta2=None
        )
        periodic_result = run(to_sim_config(periodic_sc), x_star=x_star)
        event_total = result.events.total
        periodic_total = periodic_result.events.total
        summary["comparison"] = {
            "periodic_T": compare_periodic,
            "event_total": event_total,
            "periodic_total": periodic_total,
            "ratio": event_total / periodic_total,
        }

    out_dir = Path(sc.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", problem, result)
    write_events_csv(out_dir / "events.csv", result)
    write_summary(out_dir / "summary.json", summary)
    return summary


def _cmd_run(args: argparse.Namespace) -> int:
    sc = _load_scenario(args)
    summary = run_scenario(sc, compare_periodic=args.compare_periodic)
    rel = summary["relative_error"]
    print(f"wrote {sc.output_dir}/trajectory.csv, events.csv, summary.json")
    print(f"relative error vs oracle: {rel:.3e}; broadcasts: {summary['events']['total']}")
    if summary.get("comparison"):
        comp = summary["comparison"]
        print(
            f"event broadcasts {comp['event_total']} vs periodic({comp['periodic_T']:g}) "
            f"{comp['periodic_total']} (ratio {comp['ratio']:.4f})"
        )
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    sc = _load_scenario(args)
    problem = scenario_problem(sc)
    x_star = solve_kkt_quadratic(problem)
    kappa, lipschitz, bound = _rate_bound(problem)
    lam = lambda_bound(laplacian(scenario_graph(sc)))
    record = {
        "scenario": sc.scenario,
        "x_star": [float(v) for v in x_star],
        "kappa": kappa,
        "lipschitz": lipschitz,
        "rate_bound": bound,
        "lambda": lam,
    }
    print(json.dumps(record, indent=2))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    sc = _load_scenario(args)
    try:
        deltas = [float(v) for v in args.deltas.split(",")]
    except ValueError:
        raise _UsageError(f"malformed --deltas value: {args.deltas!r}") from None
    base_dir = Path(sc.output_dir)
    records = []
    for delta in deltas:
        sub = replace(
            sc,
            delta=delta,
            step=delta / 100.0 if args.step is None else sc.step,
            output_dir=str(base_dir / f"delta_{delta:g}"),
        )
        summary = run_scenario(sub)
        records.append(
            {
                "delta": delta,
                "output": sub.output_dir,
                "relative_error": summary["relative_error"],
                "total_broadcasts": summary["events"]["total"],
            }
        )
        print(f"delta={delta:g}: relative error {summary['relative_error']:.3e}")
    base_dir.mkdir(parents=True, exist_ok=True)
    write_summary(base_dir / "sweep_summary.json", {"runs": records})
    return 0


def _cmd_dump_config(args: argparse.Namespace) -> int:
    sc = _load_scenario(args)
    sys.stdout.write(dump_config(sc))
    return 0


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scenario",
        help="der4 | dispatch(n, seed) | file(path) where path is a config file",
    )
    parser.add_argument("--trigger", help="event | periodic(T) | continuous")
    parser.add_argument("--delta", type=float, help="estimator time-scale parameter")
    parser.add_argument("--step", type=float, help="integration step")
    parser.add_argument("--tend", type=float, help="simulated horizon")
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--seed", type=int, help="override scenario/topology seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="aggopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write output files")
    _add_scenario_flags(p_run)
    p_run.add_argument(
        "--compare-periodic",
        type=float,
        metavar="T",
        help="also run a periodic(T) variant and record the broadcast comparison",
    )
    p_run.set_defaults(fn=_cmd_run)

    p_oracle = sub.add_parser("oracle", help="print the closed-form optimum and rate constants")
    _add_scenario_flags(p_oracle)
    p_oracle.set_defaults(fn=_cmd_oracle)

    p_sweep = sub.add_parser("sweep", help="run a scenario for several delta values")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--deltas", required=True, help="comma list, e.g. 0.05,0.1,0.2")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_dump = sub.add_parser("dump-config", help="print the fully resolved configuration")
    _add_scenario_flags(p_dump)
    p_dump.set_defaults(fn=_cmd_dump_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except (_UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    raise SystemExit(main())
