"""
Univariate functions governing self-concordant analysis.

omega(t) = t - ln(1 + t) is the lower model of the function decrease and
omega_star(t) = -t - ln(1 - t) the upper one. Every bound in the toolkit is a
composition of these two maps evaluated at a dimensionless argument (a product
of M_f with a local norm), so all of them accept and return plain floats.

The module also checks the admissibility of the (beta, gamma) pairs used by
the path-following schemes.
"""

import math
from typing import Callable, List

import numpy as np
from scipy.optimize import brentq

from .configuration import ConstantsVariant
from .errors import RootFindingError, ScalarDomainError
from .state import ConditionCheck, PathConstants, ValidationReport

# Below this argument the closed forms lose relative precision; use series.
_SERIES_CUTOFF = 1e-4
_STAR_UPPER = 1.0 - 1e-15


def omega(tau: float) -> float:
    """omega(tau) = tau - ln(1 + tau), tau >= 0."""
    if not tau >= 0:
        raise ScalarDomainError("omega", tau, "tau >= 0")
    if tau < _SERIES_CUTOFF:
        return tau * tau * (0.5 - tau * (1.0 / 3.0 - tau * (0.25 - tau / 5.0)))
    return tau - math.log1p(tau)


def omega_star(tau: float) -> float:
    """omega_*(tau) = -tau - ln(1 - tau), 0 <= tau < 1."""
    if not 0 <= tau < 1:
        raise ScalarDomainError("omega_star", tau, "0 <= tau < 1")
    if tau < _SERIES_CUTOFF:
        return tau * tau * (0.5 + tau * (1.0 / 3.0 + tau * (0.25 + tau / 5.0)))
    return -tau - math.log1p(-tau)


def omega_prime(tau: float) -> float:
    if not tau >= 0:
        raise ScalarDomainError("omega_prime", tau, "tau >= 0")
    return tau / (1.0 + tau)


def omega_star_prime(tau: float) -> float:
    if not 0 <= tau < 1:
        raise ScalarDomainError("omega_star_prime", tau, "0 <= tau < 1")
    return tau / (1.0 - tau)


def _polish(fn: Callable[[float], float], dfn: Callable[[float], float],
            tau: float, lo: float, hi: float, steps: int = 2) -> float:
    """A couple of Newton corrections kept inside [lo, hi]."""
    for _ in range(steps):
        d = dfn(tau)
        if d <= 0:
            break
        candidate = tau - fn(tau) / d
        if not lo <= candidate <= hi:
            break
        tau = candidate
    return tau


def omega_star_inverse(v: float) -> float:
    """Return tau in [0, 1) with omega_star(tau) = v.

    omega_star(tau) >= tau^2/2, so the root lies below sqrt(2v); the bracket
    [0, min(sqrt(2v), 1 - 1e-15)] is searched by Brent's method and the result
    polished by Newton steps. Values beyond omega_star(1 - 1e-15) saturate.
    """
    if not v >= 0:
        raise ScalarDomainError("omega_star_inverse", v, "v >= 0")
    if v == 0:
        return 0.0
    if v < 1e-12:
        # omega_star(t) = t^2/2 + t^3/3 + ...; two fixed-point corrections suffice
        tau = math.sqrt(2.0 * v)
        tau = math.sqrt(2.0 * v / (1.0 + 2.0 * tau / 3.0))
        return tau
    hi = min(math.sqrt(2.0 * v), _STAR_UPPER)
    if omega_star(hi) <= v:
        return hi
    history: List[tuple] = []

    def residual(t: float) -> float:
        r = omega_star(t) - v
        history.append((t, r))
        return r

    try:
        tau = brentq(residual, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise RootFindingError(f"omega_star_inverse({v!r}) failed: {exc}", history) from exc
    return _polish(lambda t: omega_star(t) - v, omega_star_prime, tau, 0.0, hi)


def omega_inverse(v: float) -> float:
    """Return tau >= 0 with omega(tau) = v."""
    if not v >= 0:
        raise ScalarDomainError("omega_inverse", v, "v >= 0")
    if v == 0:
        return 0.0
    # omega(tau) <= tau^2/2 gives the lower end, doubling finds the upper one
    lo = math.sqrt(2.0 * v) if v < 1e-8 else 0.0
    hi = max(2.0 * math.sqrt(v), 1.0)
    while omega(hi) < v:
        hi *= 2.0
    history: List[tuple] = []

    def residual(t: float) -> float:
        r = omega(t) - v
        history.append((t, r))
        return r

    if residual(lo) >= 0:
        return lo
    try:
        tau = brentq(residual, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise RootFindingError(f"omega_inverse({v!r}) failed: {exc}", history) from exc
    return _polish(lambda t: omega(t) - v, omega_prime, tau, lo, hi)


def dimensionless(M_f: float, quantity: float, check: bool = False) -> float:
    """Product M_f * quantity, the only admissible argument of omega/omega_star.

    With check=True the product is asserted to be a finite nonnegative number,
    which catches callers mixing a raw norm with a scaled one.
    """
    value = M_f * quantity
    if check:
        assert M_f >= 0 and quantity >= 0 and math.isfinite(value), (
            f"non-dimensionless argument M_f={M_f!r}, quantity={quantity!r}"
        )
    return value


def contraction_limit(beta: float) -> float:
    """Largest admissible PFS step: sqrt(beta)/(1 + sqrt(beta)) - beta."""
    s = math.sqrt(beta)
    return s / (1.0 + s) - beta


def kappa(beta: float, gamma: float) -> float:
    """Progress constant of the predictor-corrector scheme."""
    return gamma / 2.0 - beta / (1.0 - gamma) ** 2 - gamma ** 2 / (1.0 - gamma) ** 3


def corrector_argument(beta: float, gamma: float) -> float:
    """Residual bound after the predictor: beta/(1-gamma) + (gamma/(1-gamma))^2."""
    return beta / (1.0 - gamma) + (gamma / (1.0 - gamma)) ** 2


def _check(name: str, lhs: float, rhs: float) -> ConditionCheck:
    return ConditionCheck(name=name, lhs=lhs, rhs=rhs, slack=rhs - lhs, ok=bool(lhs <= rhs))


def validate_constants(c: PathConstants) -> ValidationReport:
    """Check every admissibility inequality of c and report its slack."""
    beta, gamma = c.beta, c.gamma
    conditions: List[ConditionCheck] = []
    k = None
    if not (math.isfinite(beta) and math.isfinite(gamma)) or not 0 < beta < 1 or gamma <= 0:
        conditions.append(ConditionCheck(name="ranges", lhs=beta, rhs=1.0, slack=-1.0, ok=False))
        return ValidationReport(beta=beta, gamma=gamma, variant=c.variant, ok=False, conditions=conditions)

    if c.variant is ConstantsVariant.PFS:
        conditions.append(_check("newton_contraction", gamma, contraction_limit(beta)))
        conditions.append(_check("positive_progress", 2.0 * beta, gamma))
        margin_lhs = omega_star(beta + gamma) if beta + gamma < 1 else math.inf
        conditions.append(_check("decrease_margin", margin_lhs, gamma * (1.0 - 2.0 * beta) / 4.0))
    else:
        if gamma >= 1:
            conditions.append(ConditionCheck(name="ranges", lhs=gamma, rhs=1.0, slack=1.0 - gamma, ok=False))
            return ValidationReport(beta=beta, gamma=gamma, variant=c.variant, ok=False, conditions=conditions)
        k = kappa(beta, gamma)
        if c.variant is ConstantsVariant.PCPFS:
            conditions.append(_check("predictor_progress", 0.0, k))
        arg = corrector_argument(beta, gamma)
        lhs = omega_star_prime(arg) if arg < 1 else math.inf
        conditions.append(_check("corrector_recentering", lhs, math.sqrt(beta)))

    ok = all(cond.ok for cond in conditions)
    return ValidationReport(beta=beta, gamma=gamma, variant=c.variant, ok=ok, conditions=conditions, kappa=k)


def pfs_complexity_constant(beta: float = 0.026, gamma: float = 0.1125) -> float:
    """sqrt(2/(gamma (gamma - 2 beta))), the leading PFS constant."""
    return math.sqrt(2.0 / (gamma * (gamma - 2.0 * beta)))


def pcpfs_complexity_constant(beta: float = 0.0015, gamma: float = 0.158) -> float:
    """1/sqrt(gamma kappa), the leading PCPFS constant."""
    return 1.0 / math.sqrt(gamma * kappa(beta, gamma))


def barrier_complexity_constant(gamma: float = 0.254) -> float:
    """1/gamma, the leading constant of the barrier predictor-corrector schemes."""
    return 1.0 / gamma
