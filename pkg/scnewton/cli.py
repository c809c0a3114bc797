"""
Command-line interface.

Usage:
    scnewton solve --problem scalar-xlnx --method pfs
    scnewton bench --spec experiments/delta_ladder.json --out results/delta
    scnewton paramsearch --grid 400
    scnewton lp-reduce --problem lp-random --seed 7
    scnewton feas --problem box-slab --param eps=0.01
    scnewton audit --problem box-barrier --param n=3

Exit status: 0 on success, 1 on runtime failure or a failed --verify, 2 on a
usage error.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from .audit import audit_instance, constants_reports, summarize, trace_checks
from .bench import (
    experiment_graph,
    graph_config,
    nearest_node,
    param_grid,
    param_search,
    plan_experiment,
    resolve_constants,
    run_method,
    write_param_csv,
)
from .configuration import (
    DEFAULT_LOG_LEVEL,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SEED,
    BenchConfiguration,
    MethodType,
    SolverConfiguration,
    configure_logging,
)
from .errors import ScNewtonError
from .feasibility import FeasibilityInstance, feasibility_bound_check, solve_lp_via_embedding, strategy_comparison
from .state import ExperimentSpec, InvariantReport
from .zoo import ProblemInstance, enumerate_vertices, known_problems, load_problem, read_lp_triplets, zoo

logger = logging.getLogger(__name__)

console = Console()

PARAM_SEARCH_REFERENCE = (0.026, 0.1125)
PARAM_SEARCH_REFERENCE_OBJECTIVE = 0.1125 * (0.1125 - 0.052)


def _parse_params(items: Optional[Sequence[str]]) -> Dict[str, object]:
    params = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"--param expects key=value, got {item!r}")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


def _instance(args) -> ProblemInstance:
    if getattr(args, "problem_file", None):
        return load_problem(args.problem_file)
    return zoo(args.problem, seed=args.seed, **_parse_params(args.param))


def _print_reports(reports: List[InvariantReport], title: str) -> bool:
    table = Table(title=title, box=box.ROUNDED)
    table.add_column("Check", style="cyan", no_wrap=True)
    table.add_column("Checked", justify="right")
    table.add_column("Violations", justify="right")
    table.add_column("Max violation", justify="right")
    table.add_column("Result")
    for report in reports:
        verdict = "[green]pass[/green]" if report.violations == 0 else "[red]FAIL[/red]"
        if report.checked == 0:
            verdict = "[yellow]n/a[/yellow]"
        table.add_row(report.name, str(report.checked), str(report.violations),
                      f"{report.max_violation:.2e}", verdict)
    console.print(table)
    ok = all(r.violations == 0 for r in reports)
    console.print("✅ all checks passed" if ok else "❌ some checks failed", style="bold green" if ok else "bold red")
    return ok


## Subcommands

def cmd_solve(args) -> int:
    instance = _instance(args)
    method = MethodType(args.method)
    consts = resolve_constants(method, args.consts)
    config = SolverConfiguration(max_iters=args.max_iters)
    options = {"tol": args.tol} if args.tol else {}
    outcome = run_method(method, instance, consts, config, **options)
    trace = outcome.trace

    table = Table(title=f"{method.value} on {instance.name}", box=box.ROUNDED)
    table.add_column("k", justify="right")
    table.add_column("stage", style="cyan")
    table.add_column("f", justify="right")
    table.add_column("lambda", justify="right")
    table.add_column("t", justify="right")
    shown = trace.records if len(trace.records) <= 12 else trace.records[:6] + trace.records[-6:]
    for rec in shown:
        table.add_row(str(rec.iteration), rec.stage, f"{rec.value:.12g}", f"{rec.lam:.3e}",
                      "" if rec.t is None else f"{rec.t:.4e}")
    console.print(table)
    lines = [f"status: {trace.status}", f"iterations: {trace.iterations}",
             f"iterations to region: {outcome.iterations_to_region}"]
    if outcome.certificate is not None:
        lines.append(f"certificate: {outcome.certificate:.3e}")
    if instance.f_star is not None and trace.records and method not in (MethodType.DUAL_PC,):
        lines.append(f"f - f*: {trace.records[-1].value - instance.f_star:.3e}")
    lines.append(f"x: {np.array2string(np.asarray(outcome.x), precision=6)}")
    console.print(Panel("\n".join(lines), title="Result", border_style="green" if trace.status == "converged" else "red"))
    if args.out:
        path = Path(args.out) / f"{instance.name}-{method.value}-trace.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(trace.model_dump_json(indent=2), encoding="utf-8")
        console.print(f"💾 trace written to {path}")

    status = 0 if trace.status == "converged" else 1
    if args.verify:
        checks = trace_checks(method, trace, instance.M_f, instance.f_star, outcome.report, outcome.plan)
        reports = constants_reports() + summarize(checks)
        if not _print_reports(reports, "Invariants"):
            status = 1
    return status


async def _stream_experiment(spec: ExperimentSpec, config: BenchConfiguration) -> dict:
    summary: dict = {}
    total = len(plan_experiment(spec))
    progress = Progress(TextColumn("[bold blue]{task.description}"), BarColumn(bar_width=40),
                        "[progress.percentage]{task.percentage:>3.1f}%", TimeElapsedColumn(), console=console)
    with progress:
        task = progress.add_task("Rows", total=max(total, 1))
        async for _, chunk in experiment_graph.astream({"spec": spec}, config=graph_config(config),
                                                  stream_mode="custom", subgraphs=True):
            kind = chunk.get("type")
            if kind == "row_complete":
                progress.advance(task)
                progress.console.print(chunk["message"], style="dim")
            elif kind == "experiment_complete":
                summary = chunk.get("summary", {})
                progress.console.print(chunk["message"], style="bold green")
            else:
                progress.console.print(chunk.get("message", ""), style="cyan")
    return summary


def cmd_bench(args) -> int:
    try:
        spec = ExperimentSpec.model_validate_json(Path(args.spec).read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise ScNewtonError(f"invalid experiment spec {args.spec}: {exc}") from exc
    if args.seed is not None:
        spec.seed = args.seed
    if args.out:
        spec.output = args.out
    config = BenchConfiguration(output_dir=spec.output or DEFAULT_OUTPUT_DIR, row_timeout=args.timeout,
                                max_concurrency=args.concurrency, include_timing=args.timing,
                                solver=SolverConfiguration(max_iters=args.max_iters))
    summary = asyncio.run(_stream_experiment(spec, config))

    table = Table(title="Scaling exponents", box=box.ROUNDED)
    table.add_column("Instance | method", style="cyan")
    table.add_column("slope", justify="right")
    table.add_column("r", justify="right")
    table.add_column("points", justify="right")
    for name, fit in summary.get("slopes", {}).items():
        table.add_row(name, f"{fit['slope']:.3f}", f"{fit['rvalue']:.3f}", str(fit["points"]))
    console.print(table)
    failed = {k: v for k, v in summary.get("status_counts", {}).items() if k != "converged"}
    if failed:
        console.print(f"⚠️ non-converged rows: {failed}", style="bold yellow")
    return 0


def cmd_paramsearch(args) -> int:
    betas, gammas = param_grid(args.grid)
    result = param_search(betas, gammas)
    out = Path(args.out or DEFAULT_OUTPUT_DIR)
    path = write_param_csv(result, out / "paramsearch.csv")
    console.print(Panel(
        f"argmax (beta, gamma) = ({result.argmax[0]:.6f}, {result.argmax[1]:.6f})\n"
        f"objective gamma (gamma - 2 beta) = {result.best_objective:.7f}\n"
        f"feasible nodes: {int(result.feasible.sum())} in {result.components} component(s)\n"
        f"region written to {path}",
        title="Parameter search", border_style="cyan",
    ))
    if args.verify:
        i, j = nearest_node(result, *PARAM_SEARCH_REFERENCE)
        reference_ok = bool(result.feasible[i, j]) or args.grid < 50
        ratio = result.best_objective / PARAM_SEARCH_REFERENCE_OBJECTIVE
        reports = constants_reports() + [
            InvariantReport(name="reference_pair_feasible", checked=1, violations=0 if reference_ok else 1),
            InvariantReport(name="argmax_within_2_percent", checked=1, violations=0 if abs(ratio - 1) <= 0.02 else 1,
                            max_violation=max(abs(ratio - 1) - 0.02, 0.0)),
        ]
        return 0 if _print_reports(reports, "Parameter search checks") else 1
    return 0


def cmd_lp_reduce(args) -> int:
    if args.lp:
        A, b, c = read_lp_triplets(args.lp)
        reference = None
    else:
        instance = _instance(args)
        A, b, c = instance.array("A"), instance.array("b"), instance.array("c")
        reference = instance.f_star
    x, y, s, info = solve_lp_via_embedding(A, b, c, tol=args.tol)
    value = float(c @ x)
    table = Table(title="LP via self-dual embedding", box=box.ROUNDED)
    table.add_column("quantity", style="cyan")
    table.add_column("value", justify="right")
    for key in ("rounds", "iterations", "gap", "mu", "tau", "primal_residual", "dual_residual"):
        v = info.get(key)
        table.add_row(key, f"{v:.3e}" if isinstance(v, float) else str(v))
    table.add_row("<c, x>", f"{value:.10g}")
    console.print(table)
    if args.out:
        path = Path(args.out) / "lp_solution.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"x": x.tolist(), "y": y.tolist(), "s": s.tolist(), **info}, indent=2),
                        encoding="utf-8")
        console.print(f"💾 solution written to {path}")
    if args.verify:
        if reference is None and A.shape[1] <= 12:
            reference = enumerate_vertices(A, b, c)[1]
        reports = [InvariantReport(name="duality_gap", checked=1, violations=int(abs(info["gap"]) > args.tol),
                                   max_violation=max(abs(info["gap"]) - args.tol, 0.0))]
        if reference is not None:
            error = abs(value - reference)
            reports.append(InvariantReport(name="optimal_value", checked=1, violations=int(error > 10 * args.tol),
                                           max_violation=max(error - 10 * args.tol, 0.0)))
        return 0 if _print_reports(reports, "LP checks") else 1
    return 0


def cmd_feas(args) -> int:
    instance = _instance(args)
    inst = FeasibilityInstance.from_problem(instance)
    rows = strategy_comparison(inst, SolverConfiguration(max_iters=args.max_iters))
    table = Table(title=f"Feasibility strategies on {instance.name} (nu = {inst.nu:g})", box=box.ROUNDED)
    table.add_column("strategy", style="cyan")
    table.add_column("iterations", justify="right")
    table.add_column("predicted order", justify="right")
    table.add_column("||A x - b||", justify="right")
    table.add_column("status")
    for row in rows:
        table.add_row(row.strategy, str(row.iterations), f"{row.predicted_order:.2f}", f"{row.residual:.2e}",
                      row.status)
    console.print(table)
    if args.verify:
        x_star = instance.array("x_star")
        checks = [feasibility_bound_check(inst, x_star)] if x_star is not None else []
        reports = summarize(checks) + [
            InvariantReport(name=f"{row.strategy}_converged", checked=1, violations=int(row.status != "converged"))
            for row in rows
        ]
        return 0 if _print_reports(reports, "Feasibility checks") else 1
    return 0


def cmd_audit(args) -> int:
    if args.problem_file:
        instances = [load_problem(args.problem_file)]
    elif args.problem:
        instances = [_instance(args)]
    else:
        instances = [zoo(name, seed=args.seed) for name in known_problems() if name != "lp-random"]
    ok = True
    for instance in instances:
        reports = audit_instance(instance, cases=args.cases, seed=args.seed)
        ok &= _print_reports(reports, f"Oracle audit: {instance.name}")
    return 0 if ok else 1


## Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scnewton", description="Second-order methods for self-concordant functions")
    parser.add_argument("--log-level", default=DEFAULT_LOG_LEVEL, help="Logging level (default from SCNEWTON_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{solve,bench,paramsearch,lp-reduce,feas,audit}")

    def common(p, problem: bool = True):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed of the instance generator")
        p.add_argument("--out", default=None, help="Output directory")
        p.add_argument("--verify", action="store_true", help="Run the invariant checks and print pass/fail")
        if problem:
            p.add_argument("--problem", choices=known_problems(), help="Zoo instance")
            p.add_argument("--problem-file", help="JSON problem file written by save_problem")
            p.add_argument("--param", action="append", metavar="KEY=VALUE", help="Zoo parameter (repeatable)")

    solve = sub.add_parser("solve", help="Run one method on one instance")
    common(solve)
    solve.add_argument("--method", default=MethodType.DNM.value, choices=[m.value for m in MethodType])
    solve.add_argument("--consts", default=None, metavar="BETA,GAMMA", help="Override the path constants")
    solve.add_argument("--tol", type=float, default=None, help="Target accuracy of barrier methods")
    solve.add_argument("--max-iters", type=int, default=10_000)
    solve.set_defaults(handler=cmd_solve)

    bench = sub.add_parser("bench", help="Run an experiment spec")
    common(bench, problem=False)
    bench.set_defaults(seed=None)
    bench.add_argument("--spec", required=True, help="ExperimentSpec JSON file")
    bench.add_argument("--timeout", type=float, default=60.0, help="Seconds per row")
    bench.add_argument("--concurrency", type=int, default=4)
    bench.add_argument("--timing", action="store_true", help="Add the wall_time column")
    bench.add_argument("--max-iters", type=int, default=10_000, help="Iteration cap of every solve")
    bench.set_defaults(handler=cmd_bench)

    search = sub.add_parser("paramsearch", help="Grid search over (beta, gamma)")
    common(search, problem=False)
    search.add_argument("--grid", type=int, default=400, help="Nodes per axis")
    search.set_defaults(handler=cmd_paramsearch)

    lp = sub.add_parser("lp-reduce", help="Solve a standard-form LP through the self-dual embedding")
    common(lp)
    lp.add_argument("--lp", default=None, help="LP file in matrix-triplet format")
    lp.add_argument("--tol", type=float, default=1e-6, help="Duality gap target")
    lp.set_defaults(handler=cmd_lp_reduce, problem="lp-random")

    feas = sub.add_parser("feas", help="Compare the feasibility strategies")
    common(feas)
    feas.add_argument("--max-iters", type=int, default=10_000)
    feas.set_defaults(handler=cmd_feas, problem="box-slab")

    audit = sub.add_parser("audit", help="Self-concordance audit of zoo oracles")
    common(audit)
    audit.add_argument("--cases", type=int, default=200, help="Sampled points per check")
    audit.set_defaults(handler=cmd_audit)
    return parser


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.command == "solve" and not (args.problem or args.problem_file):
        parser.print_usage(sys.stderr)
        console.print("solve needs --problem or --problem-file", style="bold red")
        return 2
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (ScNewtonError, OSError, ValueError) as exc:
        console.print(f"❌ {type(exc).__name__}: {exc}", style="bold red")
        logger.debug("command failed", exc_info=True)
        return 1


def run_cli() -> None:
    sys.exit(cli())
