"""
Experiment runner and parameter search.

This module implements a LangGraph workflow that turns an `ExperimentSpec`
into one solver run per (instance, method, sweep point), executes the runs in
parallel and writes a CSV table plus a JSON summary of scaling exponents.

## Core Workflow:
1. **Planning Phase**: expand instances x methods x the cartesian product of the sweeps
2. **Execution Phase**: one `Send` branch per row; the solver runs in the default
   thread pool under a per-row timeout
3. **Collection Phase**: sort rows by key, fit log-log slopes, write `rows.csv`
   and `summary.json`

## Key Components:

- `run_method`: dispatch from a `MethodType` to the solver and its outputs
- `solve_row`: one CSV row, never raising; failures land in the status column
- `param_search`: the (beta, gamma) grid with both admissibility constraints
- `run_experiment` / `experiment_graph`: the graph and a synchronous wrapper

## Important Notes

**Determinism**: every row draws its instance from its own seed and the CSV
omits wall time unless `include_timing` is set, so a rerun of the same spec
writes identical bytes.

**Timeouts**: each row's solver gets `time_limit = row_timeout` and stops on
its own with status "timeout". `asyncio.wait_for` waits `TIMEOUT_GRACE` seconds
longer as a backstop for a single step that never returns.

**Sweeps**: sweep keys are zoo parameters except `tol`, which is passed to the
barrier and feasibility solvers as their target accuracy.
"""

import asyncio
import csv
import itertools
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from langchain_core.runnables import RunnableConfig
from langgraph.config import get_stream_writer
from langgraph.graph import END, START, StateGraph
from langgraph.types import Send
from scipy import ndimage
from scipy.stats import linregress

from .barrier_methods import DualBarrierProblem, PrimalBarrierProblem, dual_pc_solve, primal_pc_solve
from .configuration import (
    CSV_SCHEMA_VERSION,
    BenchConfiguration,
    MethodType,
    SolverConfiguration,
)
from .cubic import LipschitzStrongOracle, crnm_solve, multistage_solve
from .errors import ScNewtonError
from .feasibility import FeasibilityInstance, dual_pathfollow_exact, feasibility_via_dual, path_iterations
from .newton import dnm_solve
from .pathfollow import pfs_solve
from .predcorr import pcpfs_solve
from .scalar import contraction_limit, omega_star
from .state import (
    BARRIER_PC_CONSTANTS,
    PCPFS_CONSTANTS,
    PFS_CONSTANTS,
    ExperimentSpec,
    ExperimentState,
    ExperimentStateInput,
    ExperimentStateOutput,
    ParamSearchResult,
    PathConstants,
    PfsReport,
    RestartPlan,
    RowOutput,
    RowResult,
    RowState,
    SolveTrace,
)
from .zoo import ProblemInstance, zoo

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "key", "instance", "method", "sweep", "seed", "status", "iterations_to_region",
    "total_iterations", "final_lambda", "certificate", "delta", "log_inv_eps", "nu", "error",
]
SOLVER_SWEEP_KEYS = {"tol"}
# Seconds the runner waits past row_timeout for a solver to notice its deadline
TIMEOUT_GRACE = 1.0
DEFAULT_TOL = 1e-6

_DEFAULT_CONSTANTS = {
    MethodType.PFS: PFS_CONSTANTS,
    MethodType.ADAPTIVE_PFS: PFS_CONSTANTS,
    MethodType.PCPFS: PCPFS_CONSTANTS,
    MethodType.ADAPTIVE_PCPFS: PCPFS_CONSTANTS,
    MethodType.PRIMAL_PC: BARRIER_PC_CONSTANTS,
    MethodType.DUAL_PC: BARRIER_PC_CONSTANTS,
}


@dataclass
class MethodOutcome:
    """Everything a solver run produced."""

    method: MethodType
    x: np.ndarray
    trace: SolveTrace
    report: Optional[PfsReport] = None
    plan: Optional[RestartPlan] = None
    certificate: Optional[float] = None

    @property
    def iterations_to_region(self) -> int:
        if self.report is not None:
            return self.report.n_path
        if self.method in (MethodType.DNM, MethodType.CRNM):
            return self.trace.switch_iteration if self.trace.switch_iteration is not None else self.trace.iterations
        if self.method is MethodType.MULTISTAGE_CRNM:
            return self.trace.iterations
        return path_iterations(self.trace)


def resolve_constants(method: MethodType, text: Optional[str] = None) -> Optional[PathConstants]:
    """Default constants of a method, or a "beta,gamma" override checked against its variant."""
    default = _DEFAULT_CONSTANTS.get(method)
    if default is None:
        return None
    if text is None:
        return default
    return PathConstants.parse(text, default.variant)


def _objective(instance: ProblemInstance, options: Dict[str, Any]) -> np.ndarray:
    c = options.get("c", instance.c)
    if c is None or not np.any(np.asarray(c, dtype=float)):
        raise ValueError(f"{instance.name}: barrier methods need a nonzero objective c")
    return np.asarray(c, dtype=float)


def run_method(
    method: MethodType,
    instance: ProblemInstance,
    consts: Optional[PathConstants] = None,
    config: Optional[SolverConfiguration] = None,
    **options,
) -> MethodOutcome:
    """Run one method on one zoo instance."""
    method = MethodType(method)
    consts = consts or resolve_constants(method)
    tol = float(options.get("tol", DEFAULT_TOL))
    adaptive = method in (MethodType.ADAPTIVE_PFS, MethodType.ADAPTIVE_PCPFS)

    if method is MethodType.DNM:
        x, trace = dnm_solve(instance.oracle(), instance.start, config)
        return MethodOutcome(method, x, trace)
    if method in (MethodType.PFS, MethodType.ADAPTIVE_PFS):
        x, report = pfs_solve(instance.oracle(), instance.start, consts, config, f_star=instance.f_star,
                              adaptive=adaptive)
        return MethodOutcome(method, x, report.trace, report=report)
    if method in (MethodType.PCPFS, MethodType.ADAPTIVE_PCPFS):
        x, report = pcpfs_solve(instance.oracle(), instance.start, consts, config, f_star=instance.f_star,
                                adaptive=adaptive)
        return MethodOutcome(method, x, report.trace, report=report)
    if method in (MethodType.CRNM, MethodType.MULTISTAGE_CRNM) and not isinstance(
            instance.oracle(), LipschitzStrongOracle):
        raise ValueError(f"{instance.name}: {method.value} needs an instance with sigma_f and H_f")
    if method is MethodType.CRNM:
        x, trace = crnm_solve(instance.oracle(), instance.start, config, f_star=instance.f_star)
        return MethodOutcome(method, x, trace)
    if method is MethodType.MULTISTAGE_CRNM:
        x, trace, plan = multistage_solve(instance.oracle(), instance.start, f_star=instance.f_star,
                                          f_lower=options.get("f_lower", instance.f_star), config=config)
        return MethodOutcome(method, x, trace, plan=plan)
    if method is MethodType.PRIMAL_PC:
        prob = PrimalBarrierProblem(barrier=instance.barrier(), c=_objective(instance, options), consts=consts)
        x, certificate, trace = primal_pc_solve(prob, tol, config=config)
        return MethodOutcome(method, x, trace, certificate=certificate)
    if method is MethodType.DUAL_PC:
        B = options.get("B")
        prob = DualBarrierProblem(barrier=instance.barrier(), c=_objective(instance, options), B=B, consts=consts)
        _, x, trace = dual_pc_solve(prob, tol, config=config)
        return MethodOutcome(method, x, trace, certificate=trace.records[-1].certificate)
    inst = FeasibilityInstance.from_problem(instance)
    if method in (MethodType.FEAS_DNM, MethodType.FEAS_PFS):
        x, trace = feasibility_via_dual(inst, method, config)
    else:
        x, trace = dual_pathfollow_exact(inst, config=config)
    return MethodOutcome(method, x, trace)


def solve_row(row: Dict[str, Any], solver: Optional[SolverConfiguration] = None) -> RowResult:
    """Build the instance of a planned row, run its method and summarize the outcome."""
    result = RowResult(key=row["key"], instance=row["instance"], method=row["method"],
                       sweep=row["sweep"], seed=row["seed"])
    clock = time.perf_counter()
    options = dict(row.get("options", {}))
    try:
        instance = zoo(row["instance"], seed=row["seed"], **row["params"])
        result.delta = instance.delta()
        result.nu = instance.nu
        if "tol" in options:
            result.log_inv_eps = math.log(1.0 / float(options["tol"]))
        elif instance.eps_depth:
            result.log_inv_eps = math.log(1.0 / instance.eps_depth)
        method = MethodType(row["method"])
        consts = resolve_constants(method, row.get("constants"))
        outcome = run_method(method, instance, consts, solver, **options)
        trace = outcome.trace
        result.status = trace.status
        result.iterations_to_region = outcome.iterations_to_region
        result.total_iterations = trace.iterations
        if trace.records:
            result.final_lambda = trace.records[-1].lam
        result.certificate = outcome.certificate
        if trace.message and trace.status != "converged":
            result.error = trace.message
    except (ScNewtonError, ValueError, TypeError, ArithmeticError) as exc:
        logger.warning("row %s failed: %s", row["key"], exc)
        result.status = "failed"
        result.error = f"{type(exc).__name__}: {exc}"
    result.wall_time = time.perf_counter() - clock
    return result


## Files

def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def write_rows_csv(rows: Sequence[RowResult], path, include_timing: bool = False) -> Path:
    """RFC-4180 CSV with a fixed header; rows must already be sorted."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = CSV_COLUMNS + (["wall_time"] if include_timing else [])
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            data = row.model_dump()
            writer.writerow([_cell(data[c]) for c in columns])
    return path


def regression_slopes(rows: Sequence[RowResult], regress_on: str = "delta", min_points: int = 6) -> Dict[str, Any]:
    """Log-log slope of iterations-to-region against `regress_on` per (instance, method).

    The smallest ladder point is discarded before fitting; groups with fewer
    than `min_points` usable rows are skipped.
    """
    groups: Dict[str, List[tuple]] = {}
    for row in rows:
        x = getattr(row, regress_on, None)
        y = row.iterations_to_region
        if row.status != "converged" or x is None or y is None or x <= 0 or y <= 0:
            continue
        groups.setdefault(f"{row.instance}|{row.method}", []).append((float(x), float(y)))
    slopes = {}
    for name in sorted(groups):
        points = sorted(groups[name])
        if len(points) < min_points:
            continue
        tail = np.array(points[1:])
        fit = linregress(np.log(tail[:, 0]), np.log(tail[:, 1]))
        slopes[name] = {"slope": float(fit.slope), "intercept": float(fit.intercept),
                        "rvalue": float(fit.rvalue), "points": int(tail.shape[0])}
    return slopes


def summarize_rows(rows: Sequence[RowResult], spec: ExperimentSpec, min_points: int = 6) -> Dict[str, Any]:
    statuses: Dict[str, int] = {}
    for row in rows:
        statuses[row.status] = statuses.get(row.status, 0) + 1
    return {
        "schema_version": CSV_SCHEMA_VERSION,
        "seed": spec.seed,
        "rows": len(rows),
        "status_counts": dict(sorted(statuses.items())),
        "regress_on": spec.regress_on,
        "slopes": regression_slopes(rows, spec.regress_on, min_points),
    }


def plan_experiment(spec: ExperimentSpec) -> List[Dict[str, Any]]:
    """One row descriptor per (instance, method, sweep point), in a stable order."""
    keys = sorted(spec.sweeps)
    points = [dict(zip(keys, values)) for values in itertools.product(*(spec.sweeps[k] for k in keys))]
    rows = []
    for inst in spec.instances:
        seed = inst.seed if inst.seed is not None else spec.seed
        for method in spec.methods:
            for point in points:
                params = {**inst.params, **{k: v for k, v in point.items() if k not in SOLVER_SWEEP_KEYS}}
                options = {**method.options, **{k: v for k, v in point.items() if k in SOLVER_SWEEP_KEYS}}
                index = len(rows)
                rows.append({
                    "key": f"{index:05d}|{inst.name}|{method.id}|{json.dumps(point, sort_keys=True)}|{seed}",
                    "instance": inst.name,
                    "params": params,
                    "seed": seed,
                    "method": method.id,
                    "constants": method.constants,
                    "options": options,
                    "sweep": point,
                })
    return rows


## Workflow Nodes

async def plan_rows(state: ExperimentState, config: RunnableConfig):
    """Expand the spec into row descriptors."""
    writer = get_stream_writer()
    spec = state["spec"]
    planned = plan_experiment(spec)
    writer({
        "type": "planning_complete",
        "rows": len(planned),
        "message": f"📋 Planned {len(planned)} rows ({len(spec.instances)} instances x {len(spec.methods)} methods)",
    })
    return {"planned_rows": planned}


async def execute_row(state: RowState, config: RunnableConfig):
    """Solve one row in the thread pool under the row timeout."""
    writer = get_stream_writer()
    configurable = BenchConfiguration.from_runnable_config(config)
    row = state["row"]
    solver = configurable.solver
    if solver.time_limit is None or solver.time_limit > configurable.row_timeout:
        solver = replace(solver, time_limit=configurable.row_timeout)
    loop = asyncio.get_running_loop()
    try:
        result = await asyncio.wait_for(
            loop.run_in_executor(None, solve_row, row, solver),
            timeout=configurable.row_timeout + TIMEOUT_GRACE,
        )
    except asyncio.TimeoutError:
        result = RowResult(key=row["key"], instance=row["instance"], method=row["method"], sweep=row["sweep"],
                           seed=row["seed"], status="timeout", error=f"exceeded {configurable.row_timeout:g}s")
    writer({
        "type": "row_complete",
        "key": row["key"],
        "status": result.status,
        "message": f"{'✅' if result.status == 'converged' else '❌'} {row['instance']} / {row['method']} "
                   f"{json.dumps(row['sweep'], sort_keys=True)}: {result.status}",
    })
    return {"completed_rows": [result]}


async def collect_results(state: ExperimentState, config: RunnableConfig):
    """Sort rows, compute slopes and write the result files."""
    writer = get_stream_writer()
    configurable = BenchConfiguration.from_runnable_config(config)
    spec = state["spec"]
    rows = sorted(state.get("completed_rows", []), key=lambda r: r.key)
    summary = summarize_rows(rows, spec, configurable.min_regression_points)
    if configurable.write_files:
        out = Path(spec.output) if spec.output else configurable.output_path
        write_rows_csv(rows, out / "rows.csv", configurable.include_timing)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        summary["output_dir"] = str(out)
        writer({"type": "files_written", "message": f"💾 Wrote {out / 'rows.csv'} and {out / 'summary.json'}"})
    writer({
        "type": "experiment_complete",
        "message": f"🎉 {len(rows)} rows, {len(summary['slopes'])} slope fits",
        "summary": summary,
    })
    return {"rows": rows, "summary": summary}


## Routing Functions

def initiate_rows(state: ExperimentState):
    """Fan out one branch per row; with no rows go straight to the collector."""
    planned = state.get("planned_rows", [])
    if not planned:
        return "collect_results"
    return [Send("execute_row", {"row": row, "completed_rows": []}) for row in planned]


## Graph Assembly

row_builder = StateGraph(RowState, output_schema=RowOutput)
row_builder.add_node("execute_row", execute_row)
row_builder.add_edge(START, "execute_row")
row_builder.add_edge("execute_row", END)

builder = StateGraph(ExperimentState, input_schema=ExperimentStateInput, output_schema=ExperimentStateOutput)
builder.add_node("plan_rows", plan_rows)
builder.add_node("execute_row", row_builder.compile())
builder.add_node("collect_results", collect_results)
builder.add_edge(START, "plan_rows")
builder.add_conditional_edges("plan_rows", initiate_rows, ["execute_row", "collect_results"])
builder.add_edge("execute_row", "collect_results")
builder.add_edge("collect_results", END)

experiment_graph = builder.compile()


def graph_config(config: Optional[BenchConfiguration] = None) -> RunnableConfig:
    config = config or BenchConfiguration()
    return {"configurable": asdict(config), "max_concurrency": config.max_concurrency}


async def arun_experiment(spec: ExperimentSpec, config: Optional[BenchConfiguration] = None) -> ExperimentStateOutput:
    return await experiment_graph.ainvoke({"spec": spec}, config=graph_config(config))


def run_experiment(spec: ExperimentSpec, config: Optional[BenchConfiguration] = None) -> ExperimentStateOutput:
    """Run every row of `spec` and return {"rows", "summary"}; files are written unless disabled."""
    return asyncio.run(arun_experiment(spec, config))


## Parameter search

def param_grid(n: int = 400, beta_max: float = 0.1, gamma_max: float = 0.25) -> tuple:
    """Open grids (0, beta_max] x (0, gamma_max] with n nodes each."""
    return np.linspace(beta_max / n, beta_max, n), np.linspace(gamma_max / n, gamma_max, n)


def param_search(beta_grid, gamma_grid) -> ParamSearchResult:
    """max gamma (gamma - 2 beta) s.t. gamma <= sqrt(beta)/(1 + sqrt(beta)) - beta
    and gamma (1 - 2 beta)/4 >= omega_*(beta + gamma), on a grid."""
    betas = np.asarray(beta_grid, dtype=float)
    gammas = np.asarray(gamma_grid, dtype=float)
    if np.any((betas <= 0) | (betas >= 1)) or np.any((gammas <= 0) | (gammas >= 1)):
        raise ValueError("grids must lie inside (0, 1)")
    B, G = np.meshgrid(betas, gammas, indexing="ij")
    objective = G * (G - 2.0 * B)
    limit = np.vectorize(contraction_limit)(betas)[:, None]
    contraction = G <= limit
    total = B + G
    margin_rhs = np.vectorize(lambda v: omega_star(v) if v < 1.0 else math.inf)(total)
    margin = G * (1.0 - 2.0 * B) / 4.0 >= margin_rhs
    feasible = contraction & margin & (objective > 0)
    labels, components = ndimage.label(feasible, structure=np.ones((3, 3), dtype=int))
    if feasible.any():
        masked = np.where(feasible, objective, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        argmax, best = (float(betas[i]), float(gammas[j])), float(objective[i, j])
    else:
        argmax, best = (math.nan, math.nan), math.nan
    logger.info("param search: %d feasible nodes in %d components, best %.7f at %s",
                int(feasible.sum()), components, best, argmax)
    return ParamSearchResult(betas=betas, gammas=gammas, objective=objective, feasible_contraction=contraction,
                             feasible_margin=margin, feasible=feasible, argmax=argmax, best_objective=best,
                             labels=labels, components=int(components))


def nearest_node(result: ParamSearchResult, beta: float, gamma: float) -> tuple:
    return int(np.argmin(np.abs(result.betas - beta))), int(np.argmin(np.abs(result.gammas - gamma)))


def write_param_csv(result: ParamSearchResult, path) -> Path:
    """One line per grid node: beta, gamma, objective, both constraint flags, feasibility, component."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["beta", "gamma", "objective", "contraction_ok", "margin_ok", "feasible", "component"])
        for i, beta in enumerate(result.betas):
            for j, gamma in enumerate(result.gammas):
                writer.writerow([repr(float(beta)), repr(float(gamma)), repr(float(result.objective[i, j])),
                                 int(result.feasible_contraction[i, j]), int(result.feasible_margin[i, j]),
                                 int(result.feasible[i, j]), int(result.labels[i, j])])
    return path
