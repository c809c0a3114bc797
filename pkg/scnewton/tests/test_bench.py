"""Experiment runner, result files and the (beta, gamma) search."""

import csv
import json
import time
from pathlib import Path

import numpy as np
import pytest

from scnewton.bench import (
    CSV_COLUMNS,
    TIMEOUT_GRACE,
    nearest_node,
    param_grid,
    param_search,
    plan_experiment,
    regression_slopes,
    resolve_constants,
    run_experiment,
    run_method,
    solve_row,
    summarize_rows,
    write_param_csv,
    write_rows_csv,
)
from scnewton.configuration import BenchConfiguration, MethodType, SolverConfiguration
from scnewton.errors import InvalidConstantsError
from scnewton.state import PFS_CONSTANTS, ExperimentSpec, RowResult
from scnewton.zoo import zoo

from .test_config import TestConfig

REFERENCE = (0.026, 0.1125)
REFERENCE_OBJECTIVE = 0.1125 * (0.1125 - 0.052)
EXPERIMENTS = Path(__file__).resolve().parents[2] / "experiments"


def _spec(**overrides):
    data = {
        "instances": [{"name": "linear-log", "params": {"n": 3}}],
        "methods": [{"id": "dnm"}, {"id": "pfs"}],
        "sweeps": {"spread": [20.0, 80.0, 320.0]},
        "seed": 3,
    }
    data.update(overrides)
    return ExperimentSpec.model_validate(data)


def _row(instance, method, x, y, status="converged"):
    return RowResult(key=f"{instance}|{method}|{x}", instance=instance, method=method, seed=0, status=status,
                     delta=x, iterations_to_region=y)


class TestPlanning:
    def test_rows_span_the_product(self):
        spec = _spec(sweeps={"spread": [10.0, 20.0], "tol": [1e-3]},
                     instances=[{"name": "linear-log"}, {"name": "box-barrier", "params": {"n": 2}, "seed": 9}])
        rows = plan_experiment(spec)
        assert len(rows) == 2 * 2 * 2
        assert [r["key"] for r in rows] == sorted(r["key"] for r in rows)
        assert len({r["key"] for r in rows}) == len(rows)
        first = rows[0]
        assert first["params"] == {"spread": 10.0}
        assert first["options"] == {"tol": 1e-3}
        assert first["seed"] == 3
        assert {r["seed"] for r in rows if r["instance"] == "box-barrier"} == {9}

    def test_empty_ladder(self):
        assert plan_experiment(_spec(sweeps={"spread": []})) == []

    def test_no_sweeps_gives_one_row_per_pair(self):
        rows = plan_experiment(_spec(sweeps={}))
        assert len(rows) == 2
        assert all(r["sweep"] == {} for r in rows)

    def test_resolve_constants(self):
        assert resolve_constants(MethodType.PFS) == PFS_CONSTANTS
        assert resolve_constants(MethodType.DNM) is None
        assert resolve_constants(MethodType.PFS, "0.02,0.1").gamma == 0.1


class TestRunMethod:
    def test_dnm(self):
        outcome = run_method(MethodType.DNM, zoo("linear-log", spread=50.0))
        assert outcome.trace.status == "converged"
        assert outcome.iterations_to_region == outcome.trace.switch_iteration

    def test_path_methods_report(self):
        outcome = run_method("pcpfs", zoo("linear-log", spread=50.0))
        assert outcome.report is not None
        assert outcome.iterations_to_region == outcome.report.n_path

    def test_primal_pc_needs_objective(self):
        inst = zoo("box-barrier", n=1)
        with pytest.raises(ValueError):
            run_method(MethodType.PRIMAL_PC, inst)
        outcome = run_method(MethodType.PRIMAL_PC, inst, c=[1.0], tol=1e-4)
        assert outcome.certificate <= 1e-4
        assert outcome.x[0] < 0

    def test_dual_pc(self):
        outcome = run_method(MethodType.DUAL_PC, zoo("box-barrier", n=1), c=[1.0], tol=1e-3)
        assert outcome.certificate <= 1e-3

    def test_feasibility(self):
        inst = zoo("box-slab", eps=0.05)
        outcome = run_method(MethodType.FEAS_DUAL_PF, inst)
        assert outcome.trace.status == "converged"
        np.testing.assert_allclose(inst.array("A") @ outcome.x, inst.array("b"), atol=1e-6)

    def test_cubic_needs_lipschitz_instance(self):
        with pytest.raises(ValueError):
            run_method(MethodType.CRNM, zoo("scalar-xlnx"))

    def test_multistage(self):
        outcome = run_method(MethodType.MULTISTAGE_CRNM, zoo("lse-reg", seed=1))
        assert outcome.plan is not None
        assert outcome.iterations_to_region == outcome.trace.iterations

    def test_multistage_respects_max_iters(self):
        outcome = run_method(MethodType.MULTISTAGE_CRNM, zoo("lse-reg", seed=1, start_radius=32.0),
                             config=SolverConfiguration(max_iters=5))
        assert outcome.trace.status == "max_iters"
        assert outcome.trace.iterations == 5


class TestSolveRow:
    def _planned(self, method, instance="linear-log", params=None, options=None):
        return {"key": "00000|x", "instance": instance, "params": params or {}, "seed": 0, "method": method,
                "constants": None, "options": options or {}, "sweep": {}}

    def test_converged_row(self):
        result = solve_row(self._planned("dnm", params={"spread": 40.0}))
        assert result.status == "converged"
        assert result.delta > 0
        assert result.iterations_to_region > 0
        assert result.final_lambda <= 1e-10

    def test_failure_lands_in_status(self):
        result = solve_row(self._planned("primal-pc", instance="box-barrier"))
        assert result.status == "failed"
        assert result.error.startswith("ValueError")

    def test_rejected_constants(self):
        row = self._planned("pfs", params={"spread": 40.0})
        row["constants"] = "0.026,0.2"
        result = solve_row(row)
        assert result.status == "failed"
        assert result.error.startswith(InvalidConstantsError.__name__)

    def test_unknown_instance(self):
        result = solve_row(self._planned("dnm", instance="no-such-problem"))
        assert result.status == "failed"
        assert "UnknownProblemError" in result.error

    def test_tol_sets_log_inv_eps(self):
        result = solve_row(self._planned("primal-pc", instance="box-barrier", params={"n": 1},
                                         options={"c": [1.0], "tol": 1e-4}))
        assert result.status == "converged"
        assert result.log_inv_eps == pytest.approx(np.log(1e4))
        assert result.nu == 2.0


class TestResults:
    def test_slopes(self):
        xs = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
        rows = [_row("a", "dnm", x, 3.0 * x ** 0.5) for x in xs]
        rows.append(_row("a", "dnm", 128.0, 5.0, status="failed"))
        rows += [_row("b", "pfs", x, 2.0) for x in xs[:4]]
        slopes = regression_slopes(rows)
        assert set(slopes) == {"a|dnm"}
        assert slopes["a|dnm"]["slope"] == pytest.approx(0.5)
        assert slopes["a|dnm"]["points"] == 6

    def test_summary(self):
        rows = [_row("a", "dnm", 1.0, 1), _row("a", "dnm", 2.0, 2, status="timeout")]
        summary = summarize_rows(rows, _spec())
        assert summary["rows"] == 2
        assert summary["status_counts"] == {"converged": 1, "timeout": 1}
        assert summary["slopes"] == {}

    def test_csv(self, tmp_path):
        rows = [_row("a", "dnm", 0.1, 3)]
        path = write_rows_csv(rows, tmp_path / "rows.csv")
        with path.open(newline="", encoding="utf-8") as handle:
            lines = list(csv.reader(handle))
        assert lines[0] == CSV_COLUMNS
        record = dict(zip(lines[0], lines[1]))
        assert record["delta"] == "0.1"
        assert record["certificate"] == ""
        assert record["sweep"] == "{}"
        timed = write_rows_csv(rows, tmp_path / "timed.csv", include_timing=True)
        assert timed.read_text(encoding="utf-8").splitlines()[0].endswith(",wall_time")


class TestExperiment:
    def test_run_writes_files(self, tmp_path):
        spec = _spec(output=str(tmp_path / "run"))
        result = run_experiment(spec, BenchConfiguration(min_regression_points=3))
        assert len(result["rows"]) == 6
        assert all(r.status == "converged" for r in result["rows"])
        assert [r.key for r in result["rows"]] == sorted(r.key for r in result["rows"])
        lines = (tmp_path / "run" / "rows.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 7
        summary = json.loads((tmp_path / "run" / "summary.json").read_text(encoding="utf-8"))
        assert summary["rows"] == 6
        assert set(summary["slopes"]) == {"linear-log|dnm", "linear-log|pfs"}

    def test_rerun_is_byte_identical(self, tmp_path):
        for name in ("first", "second"):
            run_experiment(_spec(output=str(tmp_path / name)))
        first = (tmp_path / "first" / "rows.csv").read_bytes()
        assert first == (tmp_path / "second" / "rows.csv").read_bytes()

    def test_empty_ladder_writes_header(self, tmp_path):
        result = run_experiment(_spec(sweeps={"spread": []}, output=str(tmp_path)))
        assert result["rows"] == []
        assert (tmp_path / "rows.csv").read_text(encoding="utf-8").splitlines() == [",".join(CSV_COLUMNS)]

    def test_row_timeout_stops_the_solver(self):
        spec = _spec(instances=[{"name": "lse-reg", "params": {"start_radius": 32.0}, "seed": 1}],
                     methods=[{"id": "pfs"}], sweeps={})
        config = BenchConfiguration(row_timeout=0.01, write_files=False)
        clock = time.perf_counter()
        result = run_experiment(spec, config)
        elapsed = time.perf_counter() - clock
        (row,) = result["rows"]
        assert row.status == "timeout"
        # filled in by the solver itself, not by the runner's backstop
        assert row.total_iterations is not None
        assert row.total_iterations < 10000
        assert elapsed < config.row_timeout + TIMEOUT_GRACE + 5.0

    def test_without_files(self, tmp_path):
        config = BenchConfiguration(output_dir=str(tmp_path / "unused"), write_files=False)
        result = run_experiment(_spec(sweeps={"spread": [20.0]}), config)
        assert len(result["rows"]) == 2
        assert not (tmp_path / "unused").exists()


class TestScalingExponents:
    """Slopes of the shipped ladders; each runs a full experiment."""

    def _slopes(self, name):
        spec = ExperimentSpec.model_validate_json((EXPERIMENTS / name).read_text(encoding="utf-8"))
        config = BenchConfiguration(write_files=False, row_timeout=600.0,
                                    solver=SolverConfiguration(max_iters=100_000))
        result = run_experiment(spec, config)
        assert all(r.status == "converged" for r in result["rows"]), [
            (r.key, r.status) for r in result["rows"] if r.status != "converged"]
        return {key: fit["slope"] for key, fit in result["summary"]["slopes"].items()}

    @pytest.mark.slow
    def test_lse_delta_ladder(self):
        slopes = self._slopes("delta_ladder.json")
        assert slopes["lse-reg|pfs"] == pytest.approx(0.5, abs=0.15)
        assert slopes["lse-reg|pcpfs"] == pytest.approx(0.5, abs=0.15)
        assert slopes["lse-reg|multistage-crnm"] == pytest.approx(0.25, abs=0.15)
        # O(Delta) is only an upper bound here: far from x* the function is nearly quadratic
        assert slopes["lse-reg|dnm"] <= 1.15

    @pytest.mark.slow
    def test_boundary_delta_ladder(self):
        slopes = self._slopes("boundary_delta_ladder.json")
        assert slopes["scalar-xlnx|dnm"] == pytest.approx(1.0, abs=0.15)

    @pytest.mark.slow
    def test_eps_ladder(self):
        slopes = self._slopes("eps_ladder.json")
        # the level-set diameter grows like 1/eps, so the log factor of the PFS bound is ln(1/eps) too
        assert slopes["box-slab|feas-pfs"] <= 1.15

    @pytest.mark.slow
    def test_nu_ladder(self):
        slopes = self._slopes("nu_ladder.json")
        assert slopes["box-slab|feas-dual-pf"] == pytest.approx(0.5, abs=0.15)


class TestParamSearch:
    def test_grid(self):
        betas, gammas = param_grid(4)
        np.testing.assert_allclose(betas, [0.025, 0.05, 0.075, 0.1])
        np.testing.assert_allclose(gammas, [0.0625, 0.125, 0.1875, 0.25])

    def test_reference_pair(self):
        result = param_search([0.026], [0.1125, 0.2])
        assert result.feasible[0, 0]
        assert not result.feasible_contraction[0, 1]
        assert result.best_objective == pytest.approx(REFERENCE_OBJECTIVE)
        assert result.argmax == REFERENCE

    def test_full_grid(self):
        result = param_search(*param_grid(TestConfig.TEST_GRID))
        i, j = nearest_node(result, *REFERENCE)
        assert result.feasible[i, j]
        assert abs(result.best_objective / REFERENCE_OBJECTIVE - 1.0) <= 0.02
        beta, gamma = result.argmax
        assert 0.015 < beta < 0.04
        assert result.components >= 1

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            param_search([0.0, 0.1], [0.1])
        with pytest.raises(ValueError):
            param_search([0.1], [1.0])

    def test_csv(self, tmp_path):
        result = param_search(*param_grid(10))
        lines = write_param_csv(result, tmp_path / "p.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 101
        assert lines[0].startswith("beta,gamma,objective")
