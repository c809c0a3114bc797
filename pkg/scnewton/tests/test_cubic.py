"""Cubic regularized Newton and the multi-stage restart wrapper."""

import math

import numpy as np
import pytest

from scnewton.cubic import (
    crnm_solve,
    cubic_model,
    cubic_step,
    cubic_step_details,
    fit_rate_constant,
    in_quadratic_region,
    multistage_bounds,
    multistage_solve,
    rate_envelope_check,
    restart_plan,
    sc_constant_from_lipschitz,
    stage_halving_check,
    stage_length_check,
)
from scnewton.configuration import SolverConfiguration
from scnewton.errors import ScalarDomainError
from scnewton.oracles import FunctionOracle
from scnewton.scalar import omega_star
from scnewton.state import RestartPlan
from scnewton.zoo import zoo


def _quadratic(H, g0):
    H = np.asarray(H, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    return FunctionOracle(len(g0), 0.0, lambda x: float(g0 @ x + 0.5 * x @ (H @ x)),
                          lambda x: g0 + H @ x, lambda x: H)


def _stationarity(oracle, x, M, details):
    _, g, H = oracle.evaluate(np.asarray(x, dtype=float))
    h = details.point - x
    return g + H @ h + 0.5 * M * details.r * h


class TestCubicStep:
    def test_half_square(self):
        # h + h^2/2 + |h|^3 is minimized at h = (1 - sqrt(13))/6
        oracle = _quadratic([[1.0]], [0.0])
        x_next = cubic_step(oracle, [1.0], 6.0)
        assert x_next[0] == pytest.approx(0.565741, abs=1e-6)

    def test_model_decreases(self):
        oracle = _quadratic([[2.0, 0.5], [0.5, 1.0]], [1.0, -1.0])
        x = np.array([0.3, 0.2])
        details = cubic_step_details(oracle, x, 3.0)
        assert details.model_decrease > 0
        assert cubic_model(oracle, x, details.point, 3.0) == pytest.approx(
            oracle.value(x) - details.model_decrease)
        assert details.secular_residual < 1e-10
        np.testing.assert_allclose(_stationarity(oracle, x, 3.0, details), 0.0, atol=1e-9)

    def test_indefinite_hessian(self):
        oracle = _quadratic([[-1.0, 0.0], [0.0, 2.0]], [1.0, 1.0])
        x = np.zeros(2)
        details = cubic_step_details(oracle, x, 1.0)
        # H + (M r/2) I must be positive semidefinite at the global minimizer
        assert details.r >= 2.0
        np.testing.assert_allclose(_stationarity(oracle, x, 1.0, details), 0.0, atol=1e-8)

    def test_hard_case(self):
        oracle = _quadratic([[-1.0, 0.0], [0.0, 2.0]], [0.0, 1.0])
        details = cubic_step_details(oracle, np.zeros(2), 1.0)
        assert details.r == pytest.approx(2.0)
        assert np.linalg.norm(details.point) == pytest.approx(2.0)
        assert details.point[1] == pytest.approx(-1.0 / 3.0)

    def test_stationary_point(self):
        oracle = _quadratic([[1.0]], [0.0])
        details = cubic_step_details(oracle, [0.0], 1.0)
        assert details.r == 0.0
        assert details.point[0] == 0.0

    def test_rejects_nonpositive_M(self):
        with pytest.raises(ScalarDomainError):
            cubic_step(_quadratic([[1.0]], [0.0]), [1.0], 0.0)


class TestConstants:
    def test_sc_constant(self):
        assert sc_constant_from_lipschitz(4.0, 2.0) == 0.125
        with pytest.raises(ScalarDomainError):
            sc_constant_from_lipschitz(0.0, 1.0)
        with pytest.raises(ScalarDomainError):
            sc_constant_from_lipschitz(1.0, -1.0)

    def test_region_matches_sc_threshold(self):
        oracle = zoo("lse-reg").oracle()
        assert oracle.M_f ** 2 * oracle.region_threshold == pytest.approx(0.125)

    def test_region_test(self):
        oracle = zoo("lse-reg").oracle()
        inside, surrogate = in_quadratic_region(oracle, 1.0 + 0.5 * oracle.region_threshold, 10.0, 1.0)
        assert inside and not surrogate
        lam = 0.5 / oracle.M_f
        inside, surrogate = in_quadratic_region(oracle, 0.0, lam, None)
        assert surrogate
        assert inside == (omega_star(0.5) <= 0.125)


class TestRestartPlan:
    def test_stage_lengths(self):
        plan = RestartPlan(p=2.0, c=1.0, k_p=10, target=0.0).extend(3)
        assert plan.stage_lengths == [10, 9, 8]

    def test_stage_length_check(self):
        plan = RestartPlan(p=2.0, c=1.0, k_p=10, target=0.0).extend(8)
        assert plan.stage_lengths == [10, 9, 8, 6, 5, 5, 4, 3]
        assert stage_length_check(plan).ok

    def test_first_stage_length(self):
        # ceil(sqrt(2^3.5)) = 4
        assert restart_plan(2.0, 1.0, 1.0, 1.0).k_p == 4
        assert restart_plan(2.0, 1.0, 1.0, 0.0).k_p == 1
        assert restart_plan(3.0, 1.0, 1.0, 1.0, stages=2).stage_lengths == [3, 3]

    def test_bounds(self):
        plan = RestartPlan(p=2.0, c=1.0, k_p=10, target=0.0)
        bounds = multistage_bounds(plan, 4.0)
        assert bounds["stages"] == pytest.approx(6.0)
        q = 2.0 ** 0.25
        assert bounds["iterations"] == pytest.approx(6.0 + 10 * q / (q - 1.0))
        assert bounds["order"] == pytest.approx(math.sqrt(2.0))
        assert multistage_bounds(plan, 0.0)["order"] == 0.0


class TestSolvers:
    @pytest.mark.parametrize("name", ["lse-reg", "logistic-l2"])
    def test_crnm_enters_region(self, name):
        inst = zoo(name, seed=1)
        oracle = inst.oracle()
        x, trace = crnm_solve(oracle, inst.start, f_star=inst.f_star)
        assert trace.status == "converged"
        assert oracle.value(x) - inst.f_star <= oracle.region_threshold
        assert "surrogate" not in trace.records[-1].flags
        values = trace.values()
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_crnm_surrogate_test(self):
        inst = zoo("lse-reg", seed=1)
        oracle = inst.oracle()
        x, trace = crnm_solve(oracle, inst.start)
        final = trace.records[-1]
        assert "surrogate" in final.flags
        assert trace.status == "converged"
        assert omega_star(oracle.M_f * final.lam) <= 0.125
        # the surrogate implies the exact region test
        assert oracle.value(x) - inst.f_star <= oracle.region_threshold

    def test_rate_envelope(self):
        inst = zoo("lse-reg", seed=2)
        oracle = inst.oracle()
        _, trace = crnm_solve(oracle, inst.start, f_star=inst.f_star)
        R = float(np.linalg.norm(inst.start - inst.array("x_star")))
        c = fit_rate_constant(trace, inst.f_star, oracle.H_f, R)
        assert c >= 0
        assert rate_envelope_check(trace, inst.f_star, oracle.H_f, R, c).ok

    def test_multistage(self):
        inst = zoo("lse-reg", seed=1)
        oracle = inst.oracle()
        x, trace, plan = multistage_solve(oracle, inst.start, f_star=inst.f_star)
        assert trace.status == "converged"
        assert oracle.value(x) - inst.f_star <= oracle.region_threshold
        assert len(plan.stage_lengths) == len(trace.stage_boundaries)
        assert stage_length_check(plan).ok
        assert stage_halving_check(trace, inst.f_star).ok

    def test_multistage_needs_lower_bound(self):
        inst = zoo("lse-reg")
        with pytest.raises(ScalarDomainError):
            multistage_solve(inst.oracle(), inst.start)

    def test_multistage_iteration_budget(self):
        inst = zoo("lse-reg", seed=1, start_radius=32.0)
        oracle = inst.oracle()
        _, trace, plan = multistage_solve(oracle, inst.start, f_star=inst.f_star,
                                          config=SolverConfiguration(max_iters=3))
        assert trace.status == "max_iters"
        assert trace.iterations == 3
        assert trace.records[-1].stage == "final"
        assert plan.stage_lengths[0] == plan.length(1)

    def test_crnm_time_limit(self):
        inst = zoo("lse-reg", seed=1, start_radius=32.0)
        _, trace = crnm_solve(inst.oracle(), inst.start, SolverConfiguration(time_limit=1e-9),
                              f_star=inst.f_star)
        assert trace.status == "timeout"
        assert trace.iterations <= 1

    def test_multistage_time_limit(self):
        inst = zoo("lse-reg", seed=1, start_radius=32.0)
        _, trace, _ = multistage_solve(inst.oracle(), inst.start, f_star=inst.f_star,
                                       config=SolverConfiguration(time_limit=1e-9))
        assert trace.status == "timeout"
        assert trace.iterations <= 1
