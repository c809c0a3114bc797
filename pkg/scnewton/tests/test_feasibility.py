"""Feasibility through the dual, depth estimation and the LP reduction."""

import math

import numpy as np
import pytest

from scnewton.configuration import MethodType
from scnewton.errors import DimensionMismatchError, RankDeficientError
from scnewton.feasibility import (
    FeasibilityInstance,
    dual_pathfollow_exact,
    feasibility_bound_check,
    feasibility_depth,
    feasibility_via_dual,
    gauss_jordan_normal_form,
    independent_rows,
    lp_to_feasibility,
    path_iterations,
    predicted_orders,
    sigma_star_bound_check,
    solve_lp_via_embedding,
    strategy_comparison,
)
from scnewton.newton import dnm_solve
from scnewton.zoo import BoxBarrier, zoo


def _slab(n=2, eps=0.1):
    return FeasibilityInstance.from_problem(zoo("box-slab", n=n, eps=eps))


class TestInstance:
    def test_from_problem(self):
        inst = _slab(3, 0.05)
        assert inst.nu == 6.0
        assert inst.eps_depth == 0.05
        assert inst.A.shape == (1, 3)
        # y = 0 maps to the center of the box
        np.testing.assert_allclose(inst.primal_point(np.zeros(1)), 0.0, atol=1e-12)
        assert inst.residual(np.zeros(3)) == pytest.approx(0.95)

    def test_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            FeasibilityInstance(barrier=BoxBarrier(2), A=[[1.0, 1.0, 1.0]], b=[0.5])
        with pytest.raises(ValueError):
            FeasibilityInstance(barrier=BoxBarrier(2), A=[[1.0, 1.0]], b=[0.5], eps_depth=0.0)


class TestStrategies:
    @pytest.mark.parametrize("solver", [MethodType.FEAS_DNM, MethodType.FEAS_PFS])
    def test_via_dual_on_slab(self, solver):
        inst = _slab()
        x, trace = feasibility_via_dual(inst, solver)
        assert trace.status == "converged"
        assert trace.method == solver.value
        assert inst.residual(x) <= 1e-6
        np.testing.assert_allclose(x, [0.9, 0.9], atol=1e-6)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_via_dual_on_planted_instance(self, seed):
        inst = FeasibilityInstance.from_problem(zoo("box-feasibility", seed=seed))
        x, trace = feasibility_via_dual(inst)
        assert trace.status == "converged"
        assert inst.residual(x) <= 1e-6
        assert inst.barrier.in_domain(x)

    def test_rejects_other_solvers(self):
        with pytest.raises(ValueError):
            feasibility_via_dual(_slab(), MethodType.CRNM)

    def test_dual_pathfollow(self):
        inst = _slab()
        x, trace = dual_pathfollow_exact(inst)
        assert trace.status == "converged"
        assert inst.residual(x) <= 1e-6
        path = trace.stage_records("path")
        assert path and path[-1].residual >= 1.0
        assert all(r.residual < 1.0 for r in path[:-1])
        sigmas = [r.t for r in path]
        assert all(b > a for a, b in zip(sigmas, sigmas[1:]))
        assert path_iterations(trace) == len(path)

    def test_dual_pathfollow_zero_rhs(self):
        inst = FeasibilityInstance(barrier=BoxBarrier(2), A=[[1.0, -1.0]], b=[0.0])
        x, trace = dual_pathfollow_exact(inst)
        np.testing.assert_array_equal(x, [0.0, 0.0])
        assert trace.iterations == 0

    def test_strategy_comparison(self):
        inst = _slab(4, 0.01)
        rows = strategy_comparison(inst)
        assert [r.strategy for r in rows] == ["feas-dnm", "feas-pfs", "feas-dual-pf"]
        for row in rows:
            assert row.status == "converged"
            assert row.residual <= 1e-6
            assert row.iterations > 0
        orders = predicted_orders(8.0, 0.01)
        assert [r.predicted_order for r in rows] == [orders[r.strategy] for r in rows]

    def test_predicted_orders(self):
        orders = predicted_orders(4.0, math.exp(-1.0))
        assert orders["feas-dnm"] == pytest.approx(4.0)
        assert orders["feas-pfs"] == pytest.approx(2.0)
        assert orders["feas-dual-pf"] == pytest.approx(2.0 * (math.log(4.0) + 1.0))


class TestDepth:
    def test_slab_depth(self):
        inst = _slab(2, 0.1)
        assert feasibility_depth(inst, resolution=1e-4) == pytest.approx(0.1, abs=1e-3)

    def test_infeasible_slice(self):
        inst = FeasibilityInstance(barrier=BoxBarrier(2), A=[[0.5, 0.5]], b=[1.5])
        assert feasibility_depth(inst, resolution=1e-3) == 0.0

    def test_bounds_hold_at_solution(self):
        inst = _slab(3, 0.1)
        x_star = zoo("box-slab", n=3, eps=0.1).array("x_star")
        assert feasibility_bound_check(inst, x_star).ok
        y_star, trace = dnm_solve(inst.dual_objective(), np.zeros(1))
        assert trace.status == "converged"
        assert sigma_star_bound_check(inst, y_star).ok

    def test_bounds_without_depth_are_empty(self):
        inst = FeasibilityInstance(barrier=BoxBarrier(2), A=[[1.0, 0.0]], b=[0.2])
        assert feasibility_bound_check(inst, [0.2, 0.0]).checked == 0


class TestLpReduction:
    def test_gauss_jordan(self):
        A = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        b = np.array([1.0, 2.0])
        R, Mb, M, perm = gauss_jordan_normal_form(A, b)
        np.testing.assert_allclose(R[:, :2], np.eye(2))
        np.testing.assert_allclose(M @ A[:, perm], R, atol=1e-12)
        np.testing.assert_allclose(M @ b, Mb)
        assert sorted(perm) == [0, 1, 2]

    def test_gauss_jordan_rank_deficient(self):
        with pytest.raises(RankDeficientError):
            gauss_jordan_normal_form([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])

    def test_independent_rows(self):
        keep = independent_rows(np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]))
        assert len(keep) == 2
        assert 2 in keep
        assert independent_rows(np.zeros((0, 3))).size == 0

    def test_embedding_shapes(self):
        inst = zoo("lp-random", seed=0)
        embedding = lp_to_feasibility(inst.array("A"), inst.array("b"), inst.array("c"))
        n, m = 6, 3
        assert embedding.Q_matrix.shape == (n + 1, 2 * n + 1)
        assert embedding.reduced_matrix.shape == (n + 1, 2 * n)
        assert embedding.dimension == 2 * n
        assert embedding.m == m
        feasibility = embedding.feasibility_instance(1e-2)
        assert feasibility.barrier.dim == 2 * n

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [0, 1])
    def test_solve_random_lp(self, seed):
        inst = zoo("lp-random", seed=seed)
        A, b, c = inst.array("A"), inst.array("b"), inst.array("c")
        x, y, s, info = solve_lp_via_embedding(A, b, c, tol=1e-6)
        assert abs(info["gap"]) <= 1e-6
        assert info["primal_residual"] <= 1e-6
        assert np.all(x >= 0)
        assert np.all(s >= 0)
        assert float(c @ x) == pytest.approx(inst.f_star, abs=1e-5)
