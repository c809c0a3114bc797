"""A priori bounds."""

import math

import numpy as np
import pytest

from scnewton.complexity import (
    barrier_bound,
    dnm_bound,
    estimate_complexity,
    level_set_diameter,
    pcpfs_bound,
    pfs_bound,
)
from scnewton.oracles import FunctionOracle
from scnewton.scalar import omega
from scnewton.state import BARRIER_PC_CONSTANTS
from scnewton.zoo import LinearLogOracle, zoo


class TestBounds:
    def test_dnm(self):
        assert dnm_bound(omega(0.5)) == pytest.approx(1.0)
        assert dnm_bound(-1.0) == 0.0

    def test_path_bounds(self):
        assert pfs_bound(0.0, 1.0, 1.0) == 0.0
        small, large = pfs_bound(1.0, 1.0, 10.0), pfs_bound(100.0, 1.0, 10.0)
        assert 0 < small < large
        assert pcpfs_bound(100.0, 1.0, 10.0) > 0

    def test_barrier(self):
        gamma = BARRIER_PC_CONSTANTS.gamma
        assert barrier_bound(4.0, math.exp(2.0)) == pytest.approx(4.0 / gamma)
        assert barrier_bound(4.0, 0.5) == 0.0
        assert barrier_bound(4.0, 0.0) == 0.0


class TestDiameter:
    def test_scalar_level_set(self):
        # {x - ln x <= 2 - ln 2} = [0.406375, 2], measured in the norm |h|/2 at x0 = 2
        D = level_set_diameter(LinearLogOracle([1.0]), [2.0], n_dirs=4)
        assert D == pytest.approx(0.796813, abs=1e-4)

    def test_unbounded_level_set(self):
        oracle = FunctionOracle(1, 1.0, lambda x: -math.log(x[0]), lambda x: np.array([-1.0 / x[0]]),
                                lambda x: np.array([[1.0 / x[0] ** 2]]), domain=lambda x: x[0] > 0)
        assert level_set_diameter(oracle, [1.0], n_dirs=2) == math.inf


class TestEstimate:
    def test_scalar(self):
        estimate = estimate_complexity(zoo("scalar-xlnx"), n_dirs=4)
        assert estimate.delta == pytest.approx(1.0 - math.log(2.0))
        assert estimate.D == pytest.approx(0.796813, abs=1e-4)
        assert set(estimate.bounds) == {"dnm", "pfs", "pcpfs"}

    def test_lipschitz_instance(self):
        inst = zoo("lse-reg", seed=0)
        estimate = estimate_complexity(inst, n_dirs=8)
        assert {"dnm", "multistage_stages", "multistage_iterations"} <= set(estimate.bounds)
        assert estimate.bounds["multistage_iterations"] >= estimate.bounds["multistage_stages"]

    def test_barrier_instance(self):
        estimate = estimate_complexity(zoo("box-barrier", n=2, shift=0.5), n_dirs=4, eps=1e-6)
        assert estimate.nu == 4.0
        assert estimate.bounds["barrier"] == pytest.approx(barrier_bound(4.0, 4.0e6))

    def test_given_diameter(self):
        estimate = estimate_complexity(zoo("scalar-xlnx"), D=3.0)
        assert estimate.D == 3.0
        assert estimate.bounds["pfs"] == pytest.approx(pfs_bound(1.0 - math.log(2.0), 1.0, 3.0))
