"""Scalar calculus and admissibility of the path constants."""

import math

import numpy as np
import pytest

from scnewton.configuration import ConstantsVariant
from scnewton.errors import ScalarDomainError
from scnewton.scalar import (
    barrier_complexity_constant,
    contraction_limit,
    dimensionless,
    kappa,
    omega,
    omega_inverse,
    omega_prime,
    omega_star,
    omega_star_inverse,
    omega_star_prime,
    pcpfs_complexity_constant,
    pfs_complexity_constant,
    validate_constants,
)
from scnewton.state import BARRIER_PC_CONSTANTS, PCPFS_CONSTANTS, PFS_CONSTANTS, PathConstants


class TestOmega:
    def test_values(self):
        assert omega(0.0) == 0.0
        assert omega(1.0) == pytest.approx(1.0 - math.log(2.0), rel=1e-15)
        assert omega(0.5) == pytest.approx(0.0945348918918356, rel=1e-12)
        assert omega_star(0.5) == pytest.approx(-0.5 + math.log(2.0), rel=1e-12)

    def test_small_arguments_keep_relative_precision(self):
        for tau in (1e-5, 1e-8, 1e-12):
            assert omega(tau) == pytest.approx(tau * tau / 2.0, rel=1e-4)
            assert omega_star(tau) == pytest.approx(tau * tau / 2.0, rel=1e-4)

    def test_derivatives(self):
        assert omega_prime(1.0) == 0.5
        assert omega_star_prime(0.5) == 1.0

    def test_domain_errors(self):
        with pytest.raises(ScalarDomainError):
            omega(-0.1)
        with pytest.raises(ScalarDomainError):
            omega_star(1.0)
        with pytest.raises(ScalarDomainError):
            omega_star(-1e-3)
        with pytest.raises(ScalarDomainError):
            omega_inverse(-1.0)

    def test_inverses(self):
        for v in (1e-14, 1e-6, 0.01, 0.5, 3.0, 40.0):
            assert omega(omega_inverse(v)) == pytest.approx(v, rel=1e-10)
        for v in (1e-14, 1e-6, 0.01, 0.5, 3.0):
            tau = omega_star_inverse(v)
            assert 0.0 <= tau < 1.0
            assert omega_star(tau) == pytest.approx(v, rel=1e-9)
        assert omega_inverse(0.0) == 0.0
        assert omega_star_inverse(0.0) == 0.0

    def test_omega_star_inverse_saturates(self):
        assert omega_star_inverse(1e6) == pytest.approx(1.0 - 1e-15, abs=1e-15)

    def test_sandwich(self):
        for tau in np.linspace(0.0, 0.99, 50):
            assert omega(tau) <= tau * tau / 2.0 + 1e-16 <= omega_star(tau) + 2e-16

    def test_dimensionless(self):
        assert dimensionless(2.0, 0.25) == 0.5
        with pytest.raises(AssertionError):
            dimensionless(2.0, -1.0, check=True)


class TestConstants:
    def test_default_sets_validate(self):
        for consts in (PFS_CONSTANTS, PCPFS_CONSTANTS, BARRIER_PC_CONSTANTS):
            report = validate_constants(consts)
            assert report.ok, report.violated

    def test_pfs_conditions(self):
        report = validate_constants(PFS_CONSTANTS)
        assert {c.name for c in report.conditions} == {
            "newton_contraction", "positive_progress", "decrease_margin"}
        assert report.slack("newton_contraction") > 0
        assert PFS_CONSTANTS.gamma <= contraction_limit(PFS_CONSTANTS.beta)

    def test_rejected_pfs_pairs(self):
        too_long = validate_constants(PathConstants(beta=0.026, gamma=0.2, variant=ConstantsVariant.PFS))
        assert not too_long.ok
        assert "newton_contraction" in too_long.violated
        no_progress = validate_constants(PathConstants(beta=0.06, gamma=0.1, variant=ConstantsVariant.PFS))
        assert "positive_progress" in no_progress.violated

    def test_out_of_range(self):
        report = validate_constants(PathConstants(beta=1.5, gamma=0.1, variant=ConstantsVariant.PFS))
        assert not report.ok
        assert report.violated == ["ranges"]
        report = validate_constants(PathConstants(beta=0.01, gamma=1.2, variant=ConstantsVariant.PCPFS))
        assert not report.ok

    def test_kappa(self):
        assert kappa(0.0015, 0.158) == pytest.approx(0.035068, abs=5e-6)
        assert validate_constants(PCPFS_CONSTANTS).kappa == pytest.approx(kappa(0.0015, 0.158))

    def test_complexity_constants(self):
        assert 17.10 <= pfs_complexity_constant() <= 17.15
        assert 13.40 <= pcpfs_complexity_constant() <= 13.50
        assert 3.93 <= barrier_complexity_constant() <= 3.95

    def test_parse(self):
        consts = PathConstants.parse("0.026,0.1125", ConstantsVariant.PFS)
        assert consts == PFS_CONSTANTS
