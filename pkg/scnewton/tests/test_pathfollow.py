"""Path-following scheme and its adaptive variant."""

import numpy as np
import pytest

from scnewton.configuration import ConstantsVariant, SolverConfiguration
from scnewton.errors import CenteringLostError, InvalidConstantsError
from scnewton.pathfollow import (
    adaptive_pfs_iterate,
    adaptive_step_accounting,
    centering_residual,
    path_decrease_check,
    pfs_iterate,
    pfs_rate,
    pfs_solve,
    pfs_superlinear_check,
)
from scnewton.state import PFS_CONSTANTS, CenteredPair, PathConstants
from scnewton.zoo import LinearLogOracle, zoo

from .test_config import SOLVER_INSTANCES


def _start_pair():
    # f = x - ln x from x0 = 2: c = -f'(2) = -1/2
    return CenteredPair(t=1.0, x=[2.0], residual=0.0, c=[-0.5])


class TestIterate:
    def test_one_iterate_on_xlnx(self):
        oracle = LinearLogOracle([1.0])
        pair = pfs_iterate(oracle, _start_pair())
        assert pair.t == pytest.approx(0.8875)
        assert pair.x[0] == pytest.approx(1.775)
        assert pair.residual <= PFS_CONSTANTS.beta
        assert centering_residual(oracle, [0.5], pair.t, pair.x) == pytest.approx(pair.residual)

    def test_rejects_invalid_constants(self):
        bad = PathConstants(beta=0.026, gamma=0.2, variant=ConstantsVariant.PFS)
        with pytest.raises(InvalidConstantsError) as info:
            pfs_iterate(LinearLogOracle([1.0]), _start_pair(), bad)
        assert "newton_contraction" in info.value.report.violated

    def test_rejects_uncentered_input(self):
        pair = CenteredPair(t=0.5, x=[2.0], residual=0.0, c=[-0.5])
        with pytest.raises(CenteringLostError):
            pfs_iterate(LinearLogOracle([1.0]), pair)

    def test_t_clamps_at_zero(self):
        oracle = LinearLogOracle([1.0])
        # ||c||* at x = 1.01 is tiny, so the step overshoots t = 0.01
        x = 1.01
        c = -(1.0 - 1.0 / x) / 0.01
        pair = pfs_iterate(oracle, CenteredPair(t=0.01, x=[x], residual=0.0, c=[c]))
        assert pair.t == 0.0

    def test_adaptive_iterate_doubles_when_possible(self):
        oracle = LinearLogOracle([1.0])
        pair, gamma, tries = adaptive_pfs_iterate(oracle, _start_pair(), PFS_CONSTANTS.gamma)
        assert gamma >= PFS_CONSTANTS.gamma
        assert tries >= 1
        assert pair.residual <= PFS_CONSTANTS.beta * (1 + 1e-9)


class TestSolve:
    @pytest.mark.parametrize("name,params", SOLVER_INSTANCES)
    @pytest.mark.parametrize("adaptive", [False, True])
    def test_converges(self, name, params, adaptive):
        inst = zoo(name, **params)
        x, report = pfs_solve(inst.oracle(), inst.start, f_star=inst.f_star, adaptive=adaptive)
        assert report.trace.status == "converged"
        assert inst.oracle().value(x) == pytest.approx(inst.f_star, abs=1e-9)
        ts = report.t_sequence
        assert all(b <= a for a, b in zip(ts, ts[1:]))
        assert report.rate_check is not None and report.rate_check.ok

    def test_decrease_and_superlinear_bounds(self):
        inst = zoo("linear-log", n=3, spread=40.0)
        _, report = pfs_solve(inst.oracle(), inst.start, f_star=inst.f_star)
        beta, gamma = PFS_CONSTANTS.beta, PFS_CONSTANTS.gamma
        assert report.n_path > 0
        assert path_decrease_check(report, (gamma - 2 * beta) / 2.0).ok
        assert pfs_superlinear_check(report, report.f0 - inst.f_star).ok

    def test_rate_bound(self):
        rate = pfs_rate(PFS_CONSTANTS, 1.0)
        assert rate(0, 1.0) == 1.0
        assert rate(10, 1.0) < rate(5, 1.0) < 1.0
        assert rate(3, 0.0) == 0.0

    def test_adaptive_accounting(self):
        inst = zoo("linear-log", n=3, spread=40.0)
        _, report = pfs_solve(inst.oracle(), inst.start, adaptive=True)
        assert adaptive_step_accounting(report).ok
        path = report.trace.stage_records("path")
        assert path
        assert all(r.gamma >= PFS_CONSTANTS.gamma for r in path)
        assert all(r.tries >= 1 for r in path)

    def test_quadratic_region_start_skips_path(self):
        inst = zoo("scalar-xlnx", x0=1.2)
        _, report = pfs_solve(inst.oracle(), inst.start)
        assert report.n_path == 0
        assert report.trace.switch_iteration == 0

    def test_iteration_cap(self):
        inst = zoo("linear-log", n=3, spread=1e3)
        _, report = pfs_solve(inst.oracle(), inst.start, config=SolverConfiguration(max_iters=2))
        assert report.trace.status == "max_iters"
        assert report.n_path == 2

    def test_start_point_is_not_modified(self):
        inst = zoo("linear-log", n=3)
        x0 = inst.start.copy()
        pfs_solve(inst.oracle(), x0)
        np.testing.assert_array_equal(x0, inst.start)

    def test_time_limit(self):
        inst = zoo("linear-log", n=3, spread=1e4)
        _, report = pfs_solve(inst.oracle(), inst.start, config=SolverConfiguration(time_limit=1e-9))
        assert report.trace.status == "timeout"
        assert report.n_path <= 1
