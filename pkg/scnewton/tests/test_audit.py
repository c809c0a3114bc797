"""Numerical audits of oracles, barriers and traces."""

import math

import numpy as np
import pytest

from scnewton.audit import (
    audit_instance,
    constants_reports,
    self_concordance_check,
    function_bounds_check,
    sample_pairs,
    sample_points,
    summarize,
    trace_checks,
)
from scnewton.configuration import MethodType
from scnewton.cubic import multistage_solve
from scnewton.newton import dnm_solve
from scnewton.oracles import FunctionOracle
from scnewton.pathfollow import pfs_solve
from scnewton.zoo import LinearLogOracle, zoo

from .test_config import TestConfig


def _neg_log(M_f):
    return FunctionOracle(1, M_f, lambda x: -math.log(x[0]), lambda x: np.array([-1.0 / x[0]]),
                          lambda x: np.array([[1.0 / x[0] ** 2]]), domain=lambda x: x[0] > 0)


class TestSampling:
    def test_points_stay_in_domain(self):
        oracle = LinearLogOracle([1.0, 2.0])
        rng = np.random.default_rng(TestConfig.TEST_SEED)
        points = sample_points(oracle, [3.0, 0.2], rng, 50)
        assert len(points) == 50
        assert all(oracle.in_domain(x) for x in points)

    def test_pairs_within_dikin_ellipsoid(self):
        oracle = LinearLogOracle([1.0])
        rng = np.random.default_rng(TestConfig.TEST_SEED)
        pairs = sample_pairs(oracle, sample_points(oracle, [2.0], rng, 30), rng)
        assert pairs
        for x, y, dist in pairs:
            assert dist < 0.9
            assert oracle.geometry(x).primal_norm(y - x) == pytest.approx(dist)


class TestOracleChecks:
    def test_wrong_constant_is_flagged(self):
        rng = np.random.default_rng(TestConfig.TEST_SEED)
        points = [np.array([x]) for x in (0.5, 1.0, 3.0)]
        assert self_concordance_check(_neg_log(1.0), points, rng).ok
        assert not self_concordance_check(_neg_log(0.5), points, rng).ok

    def test_function_bounds(self):
        oracle = LinearLogOracle([2.0])
        rng = np.random.default_rng(TestConfig.TEST_SEED)
        pairs = sample_pairs(oracle, sample_points(oracle, [1.0], rng, 40), rng)
        check = function_bounds_check(oracle, pairs)
        assert check.ok
        assert check.checked >= len(pairs)

    @pytest.mark.parametrize("name,params", [
        ("scalar-xlnx", {}),
        ("linear-log", {"n": 3}),
        ("box-barrier", {"n": 2, "shift": 0.5}),
        ("lse-reg", {"n": 3, "m": 6}),
        ("simplex-entropy", {"n": 3}),
    ])
    def test_audit_instance(self, name, params):
        reports = audit_instance(zoo(name, **params), cases=TestConfig.TEST_CASES, seed=TestConfig.TEST_SEED)
        assert reports
        failing = [r for r in reports if not r.ok]
        assert not failing, failing

    def test_audit_barrier_and_restriction(self):
        reports = audit_instance(zoo("box-slab", n=3), cases=TestConfig.TEST_CASES, seed=TestConfig.TEST_SEED)
        names = {r.name for r in reports}
        assert {"barrier_gradient", "conjugate_barrier", "restricted_gradient_fd"} <= names
        assert all(r.ok for r in reports)

    def test_constants(self):
        reports = constants_reports()
        assert len(reports) == 3
        assert all(r.ok for r in reports)


class TestTraceChecks:
    def test_dnm(self):
        inst = zoo("linear-log", n=3, spread=30.0)
        _, trace = dnm_solve(inst.oracle(), inst.start)
        checks = trace_checks(MethodType.DNM, trace, inst.M_f, inst.f_star)
        assert [c.name for c in checks][:2] == ["damped_decrease", "newton_contraction"]
        assert all(r.ok for r in summarize(checks))

    def test_adaptive_pfs(self):
        inst = zoo("linear-log", n=3, spread=30.0)
        _, report = pfs_solve(inst.oracle(), inst.start, f_star=inst.f_star, adaptive=True)
        checks = trace_checks(MethodType.ADAPTIVE_PFS, report.trace, inst.M_f, inst.f_star, report=report)
        assert len(checks) == 4
        assert all(c.ok for c in checks)

    def test_multistage(self):
        inst = zoo("lse-reg", seed=1)
        _, trace, plan = multistage_solve(inst.oracle(), inst.start, f_star=inst.f_star)
        checks = trace_checks(MethodType.MULTISTAGE_CRNM, trace, inst.M_f, inst.f_star, plan=plan)
        assert [c.name for c in checks] == ["stage_lengths", "stage_halving"]
        assert all(c.ok for c in checks)

    def test_other_methods_have_no_checks(self):
        inst = zoo("scalar-xlnx")
        _, trace = dnm_solve(inst.oracle(), inst.start)
        assert trace_checks(MethodType.CRNM, trace, inst.M_f) == []
