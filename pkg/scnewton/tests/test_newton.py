"""Newton steps and the Damped Newton Method."""

import math

import numpy as np
import pytest

from scnewton.configuration import SolverConfiguration
from scnewton.errors import DomainViolationError
from scnewton.newton import (
    damped_iterations,
    damped_newton_step,
    decrease_check,
    dnm_solve,
    quadratic_contraction_check,
    standard_newton_step,
    superlinear_bound_check,
)
from scnewton.scalar import omega
from scnewton.zoo import LinearLogOracle, zoo

from .test_config import SOLVER_INSTANCES


class TestSteps:
    def test_damped_step_on_xlnx(self):
        oracle = LinearLogOracle([1.0])
        x_next = damped_newton_step(oracle, [2.0])
        # lambda = 1: 2 - 4 * (1/2) / 2 = 1
        assert x_next[0] == pytest.approx(1.0)
        decrease = oracle.value([2.0]) - oracle.value(x_next)
        assert decrease == pytest.approx(1.0 - math.log(2.0))
        assert decrease >= omega(1.0) - 1e-15

    def test_standard_step_leaves_domain(self):
        oracle = LinearLogOracle([1.0])
        # f'(3) = 2/3, f''(3) = 1/9: 3 - 6 < 0
        with pytest.raises(DomainViolationError):
            standard_newton_step(oracle, [3.0])

    def test_standard_step_contracts(self):
        oracle = LinearLogOracle([1.0])
        x = np.array([1.2])
        lam = oracle.local(x).lam
        lam_next = oracle.local(standard_newton_step(oracle, x)).lam
        assert lam_next <= (lam / (1.0 - lam)) ** 2


class TestDnm:
    @pytest.mark.parametrize("name,params", SOLVER_INSTANCES)
    def test_converges(self, name, params):
        inst = zoo(name, **params)
        x, trace = dnm_solve(inst.oracle(), inst.start)
        assert trace.status == "converged"
        assert trace.records[-1].lam <= 1e-10 / inst.M_f
        assert inst.oracle().value(x) == pytest.approx(inst.f_star, abs=1e-9)
        assert damped_iterations(trace) <= inst.delta() / omega(0.5) + 1

    def test_switch_iteration(self):
        inst = zoo("linear-log", n=3, spread=50.0)
        _, trace = dnm_solve(inst.oracle(), inst.start)
        k = trace.switch_iteration
        assert k is not None and k > 0
        assert trace.records[k].lam <= 0.5
        assert all(r.lam > 0.5 for r in trace.records[:k])
        assert all(r.stage != "damped" for r in trace.records[k:])

    def test_already_optimal(self):
        inst = zoo("scalar-xlnx", x0=1.0)
        _, trace = dnm_solve(inst.oracle(), inst.start)
        assert trace.iterations == 0
        assert trace.status == "converged"

    def test_iteration_cap(self):
        inst = zoo("linear-log", n=3, spread=1e4)
        _, trace = dnm_solve(inst.oracle(), inst.start, SolverConfiguration(max_iters=3))
        assert trace.status == "max_iters"
        assert trace.iterations == 3

    @pytest.mark.parametrize("name,params", SOLVER_INSTANCES)
    def test_trace_guarantees(self, name, params):
        inst = zoo(name, **params)
        _, trace = dnm_solve(inst.oracle(), inst.start)
        for check in (decrease_check(trace, inst.M_f), quadratic_contraction_check(trace, inst.M_f),
                      superlinear_bound_check(trace, inst.M_f, inst.f_star)):
            assert check.ok, check.details

    def test_rejects_bad_target(self):
        with pytest.raises(ValueError):
            dnm_solve(LinearLogOracle([1.0]), [2.0], SolverConfiguration(target_lambda=0.9))

    def test_time_limit(self):
        inst = zoo("linear-log", n=3, spread=1e4)
        _, trace = dnm_solve(inst.oracle(), inst.start, SolverConfiguration(time_limit=1e-9))
        assert trace.status == "timeout"
        assert trace.records[-1].stage == "final"
        assert trace.iterations <= 1

    @pytest.mark.parametrize("limit", [0.0, -1.0])
    def test_rejects_bad_time_limit(self, limit):
        with pytest.raises(ValueError):
            SolverConfiguration(time_limit=limit)
