"""Command line front end.

Planner infeasibility and execution failures are ordinary results and exit 0;
only I/O and argument problems produce a nonzero exit code.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from typing import Optional

from . import bench as benchmod
from . import textio
from .domain import validate_instance, validate_plan
from .execution import ExecConfig, execute, monte_carlo_success, write_log_csv
from .extract import extract
from .flow import build_model
from .gadget import graph_for_instance
from .heatmap import write_heatmap
from .lptext import export_lp
from .scoop import build_scoop_demo_instance
from .solver import SolveConfig, solve_anytime


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _add_option_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-topple", action="store_true",
                   help="disable the topple action family")
    p.add_argument("--max-topple", type=int, default=None, metavar="N",
                   help="cap the number of objects per topple")
    p.add_argument("--scoop", action="store_true",
                   help="enable container actions")
    p.add_argument("--buffers", type=int, default=None, metavar="N",
                   help="override the instance buffer count")


def _apply_option_flags(instance, args):
    opts = instance.options
    if args.no_topple:
        opts = replace(opts, topple=False)
    if args.max_topple is not None:
        opts = replace(opts, max_topple=args.max_topple)
    if args.scoop:
        opts = replace(opts, scoop=True)
    instance = replace(instance, options=opts)
    if args.buffers is not None:
        instance = replace(instance, buffers=args.buffers)
    validate_instance(instance)
    return instance


def _write_text(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    if args.kind == "scoop-demo":
        instance = build_scoop_demo_instance()
    elif args.kind == "single":
        instance, depth = benchmod.gen_single_goal(
            args.objects, args.seed, buffers=args.buffers
        )
        print(f"goal_depth {depth}", file=sys.stderr)
    else:
        instance = benchmod.gen_multi_goal(
            args.objects, args.seed, buffers=args.buffers
        )
    _write_text(textio.serialize_instance(instance), args.out)
    return 0


def _cmd_plan(args) -> int:
    instance = _apply_option_flags(textio.read_instance(args.instance), args)
    cfg = SolveConfig(
        budget_ms=args.budget_ms, seed=args.seed, horizon_max=args.horizon_max
    )
    res = solve_anytime(instance, config=cfg)
    print(f"status {res.status.value}")
    print(f"lower_bound {res.lower_bound}")
    print(f"nodes_expanded {res.nodes_expanded}")
    print(f"elapsed_ms {res.elapsed_ms:.0f}")
    for line in res.trace:
        print(f"incumbent {line}")
    if res.solution is None:
        return 0
    print(f"objective {res.objective}")
    ttff = res.time_to_first_feasible_ms
    print(f"time_to_first_feasible_ms {ttff:.0f}")
    plan = extract(instance, graph_for_instance(instance), res.solution)
    report = validate_plan(instance, plan)
    print(f"plan_actions {len(plan)} valid {int(report.ok)}"
          f" reached_goal {int(report.reached_goal)}")
    if args.out is not None:
        _write_text(textio.serialize_plan(plan), args.out)
    return 0


def _cmd_validate(args) -> int:
    instance = textio.read_instance(args.instance)
    plan = textio.read_plan(args.plan)
    report = validate_plan(instance, plan)
    print(f"ok {int(report.ok)}")
    if report.ok:
        print(f"reached_goal {int(report.reached_goal)}")
        for name, count in sorted(report.action_counts.items()):
            print(f"actions.{name} {count}")
    else:
        print(f"failing_step {report.failing_step}")
        print(f"error {report.error}")
    return 0


def _cmd_simulate(args) -> int:
    instance = textio.read_instance(args.instance)
    plan = textio.read_plan(args.plan)
    cfg = ExecConfig(
        reach_radius=args.reach_radius,
        topple_base_offset=args.base_offset,
        topple_dispersion_scale=args.dispersion_scale,
        lateral_jitter=args.jitter,
        seed=args.seed,
        robot_base=(args.robot_x, args.robot_y),
    )
    if args.trials > 1:
        rate = monte_carlo_success(plan, instance, cfg, args.trials)
        print(f"trials {args.trials}")
        print(f"success_rate {rate:.4f}")
        return 0
    report = execute(plan, instance, cfg)
    print(textio.dumps(report.to_dict()))
    if args.log_csv is not None:
        write_log_csv(report, args.log_csv)
    return 0


def _cmd_export_lp(args) -> int:
    instance = _apply_option_flags(textio.read_instance(args.instance), args)
    horizon = args.horizon
    if horizon is None:
        res = solve_anytime(
            instance,
            config=SolveConfig(budget_ms=args.budget_ms, seed=args.seed),
        )
        if res.solution is None:
            print(f"status {res.status.value}")
            print("no feasible horizon found; pass --horizon explicitly")
            return 0
        horizon = res.solution.horizon
        print(f"horizon {horizon}", file=sys.stderr)
    model = build_model(instance, graph_for_instance(instance), horizon)
    _write_text(export_lp(model), args.out)
    return 0


def _cmd_bench(args) -> int:
    config = benchmod.BenchConfig(
        kind=args.kind,
        sizes=args.sizes,
        instances_per_setting=args.per_setting,
        buffers=args.buffers,
        budget_ms=args.budget_ms,
        seed=args.seed,
        workers=args.workers,
    )
    rows = benchmod.run_suite(config)
    os.makedirs(args.out, exist_ok=True)
    rows_path = os.path.join(args.out, "rows.csv")
    summary_path = os.path.join(args.out, "summary.csv")
    benchmod.write_rows_csv(rows, rows_path)
    summary = benchmod.summarize(rows)
    benchmod.write_summary_csv(summary, summary_path)
    for s in summary:
        acts = "-" if s.mean_actions is None else f"{s.mean_actions:.2f}"
        std = "-" if s.std_actions is None else f"{s.std_actions:.2f}"
        print(
            f"size {s.size} {s.toggle}: success {s.success_rate:.2f}"
            f" actions {acts}+-{std} n {s.n}"
        )
    print(f"wrote {rows_path} and {summary_path}")
    return 0


def _cmd_ablate(args) -> int:
    config = benchmod.AblationConfig(
        budgets_ms=args.budgets_ms,
        buffer_counts=args.buffers_list,
        num_objects=args.objects,
        stack_heights=args.heights,
        instances_per_setting=args.per_setting,
        seed=args.seed,
        workers=args.workers,
    )
    rows = benchmod.run_ablation(config)
    os.makedirs(args.out, exist_ok=True)
    rows_path = os.path.join(args.out, "ablation_rows.csv")
    benchmod.write_ablation_csv(rows, rows_path)
    written = [rows_path]
    for matrix in benchmod.ablation_matrices(rows):
        stem = f"{matrix.metric}_{matrix.toggle}"
        csv_path = os.path.join(args.out, f"{stem}.csv")
        svg_path = os.path.join(args.out, f"{stem}.svg")
        benchmod.write_matrix_csv(matrix, csv_path)
        lo, hi = (0.0, 100.0) if matrix.metric == "success_pct" else (None, None)
        write_heatmap(
            svg_path,
            matrix.grid,
            [str(b) for b in matrix.budgets_ms],
            [str(k) for k in matrix.buffer_counts],
            title=f"{matrix.metric} ({matrix.toggle})",
            row_axis="budget ms",
            col_axis="buffers",
            lo=lo,
            hi=hi,
            fmt="{:.0f}" if matrix.metric == "success_pct" else "{:.1f}",
        )
        written.extend([csv_path, svg_path])
    print("wrote " + " ".join(written))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackplan",
        description="Plan, validate, simulate, and benchmark stack"
        " rearrangement tasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--kind", choices=("single", "multi", "scoop-demo"),
                   default="single")
    p.add_argument("--objects", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--buffers", type=int, default=12)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("plan", help="solve an instance")
    p.add_argument("instance")
    p.add_argument("--budget-ms", type=int, default=30_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon-max", type=int, default=None)
    p.add_argument("--out", default=None, help="write the plan here")
    _add_option_flags(p)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("validate", help="replay a plan against an instance")
    p.add_argument("instance")
    p.add_argument("plan")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="execute a plan with stochastic"
                       " topple landings")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--reach-radius", type=float, default=ExecConfig.reach_radius)
    p.add_argument("--base-offset", type=float,
                   default=ExecConfig.topple_base_offset)
    p.add_argument("--dispersion-scale", type=float,
                   default=ExecConfig.topple_dispersion_scale)
    p.add_argument("--jitter", type=float, default=ExecConfig.lateral_jitter)
    p.add_argument("--robot-x", type=float, default=0.0)
    p.add_argument("--robot-y", type=float, default=0.0)
    p.add_argument("--log-csv", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("export-lp", help="write the integer program for an"
                       " instance at a fixed horizon")
    p.add_argument("instance")
    p.add_argument("--horizon", type=int, default=None,
                   help="time steps; defaults to the solver's optimal horizon")
    p.add_argument("--budget-ms", type=int, default=30_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    _add_option_flags(p)
    p.set_defaults(func=_cmd_export_lp)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--kind", choices=("single", "multi"), default="single")
    p.add_argument("--sizes", type=_int_list, default=(4, 6, 9))
    p.add_argument("--per-setting", type=int, default=20)
    p.add_argument("--budget-ms", type=int, default=30_000)
    p.add_argument("--buffers", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("ablate", help="sweep budget x buffer grid")
    p.add_argument("--budgets-ms", type=_int_list, default=(1000, 5000, 15000))
    p.add_argument("--buffers-list", type=_int_list, default=(0, 2, 4, 8))
    p.add_argument("--objects", type=int, default=6)
    p.add_argument(
        "--heights", type=_int_list, default=(3, 2, 1),
        help="stack height caps, shuffled per instance",
    )
    p.add_argument("--per-setting", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_ablate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, textio.InvalidDescriptor) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
