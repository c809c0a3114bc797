"""
Newton steps and the Damped Newton Method.

The damped step x - [H]^{-1} g / (1 + M_f lambda) decreases f by at least
omega(M_f lambda)/M_f^2 from any point, so the damped phase reaches the
quadratic region {lambda <= 1/(2 M_f)} in at most M_f^2 (f(x0) - f*)/omega(1/2)
steps. Inside it the driver switches to full standard steps.
"""

import logging
import time
from typing import Optional, Tuple

import numpy as np

from .configuration import SolverConfiguration
from .errors import DomainViolationError
from .oracles import LocalModel, ScOracle
from .scalar import dimensionless, omega, omega_star_inverse
from .state import BoundCheck, SolveTrace

logger = logging.getLogger(__name__)

NewtonConfig = SolverConfiguration


def _model(oracle: ScOracle, x) -> LocalModel:
    return x if isinstance(x, LocalModel) else oracle.local(x)


def standard_newton_step(oracle: ScOracle, x) -> np.ndarray:
    """x - [H(x)]^{-1} grad f(x); raises DomainViolationError if it leaves the domain."""
    local = _model(oracle, x)
    x_next = local.x - local.newton_direction
    if not oracle.in_domain(x_next):
        raise DomainViolationError("standard Newton step left the domain", x_next.tolist())
    return x_next


def damped_newton_step(oracle: ScOracle, x) -> np.ndarray:
    """x - [H(x)]^{-1} grad f(x) / (1 + M_f lambda_f(x))."""
    local = _model(oracle, x)
    x_next = local.x - local.newton_direction / (1.0 + oracle.M_f * local.lam)
    if not oracle.in_domain(x_next):
        raise DomainViolationError("damped Newton step left the domain", x_next.tolist())
    return x_next


def dnm_solve(
    oracle: ScOracle, x0, config: Optional[SolverConfiguration] = None
) -> Tuple[np.ndarray, SolveTrace]:
    """Run damped steps until lambda_f <= target_lambda, then standard steps.

    The trace holds one record per visited point; a record's stage names the
    step taken from that point ("damped", "standard" or "final").
    """
    config = config or SolverConfiguration()
    target, finish = config.resolve(oracle.M_f)
    M = oracle.M_f
    trace = SolveTrace(method="dnm")
    start = time.perf_counter()

    x = np.atleast_1d(np.asarray(x0, dtype=float))
    local = oracle.local(x)
    for k in range(config.max_iters + 1):
        lam = local.lam
        if trace.switch_iteration is None and lam <= target:
            trace.switch_iteration = k
        if lam <= finish:
            trace.add(value=local.value, lam=lam, stage="final", wall_time=time.perf_counter() - start)
            trace.status = "converged"
            break
        if k == config.max_iters or config.expired(start):
            trace.add(value=local.value, lam=lam, stage="final", wall_time=time.perf_counter() - start)
            trace.status = "max_iters" if k == config.max_iters else "timeout"
            break

        flags = []
        if lam > target:
            stage = "damped"
            x_next = local.x - local.newton_direction / (1.0 + dimensionless(M, lam, config.debug_units))
            step_norm = lam / (1.0 + M * lam)
        else:
            stage = "standard"
            x_next = local.x - local.newton_direction
            step_norm = lam
            if not oracle.in_domain(x_next):
                # the declared M_f does not describe the function here
                logger.warning("standard step left the domain at iteration %d; taking a damped step", k)
                flags.append("fallback-damped")
                stage = "damped"
                x_next = local.x - local.newton_direction / (1.0 + M * lam)
                step_norm = lam / (1.0 + M * lam)
        trace.add(value=local.value, lam=lam, step_norm=step_norm, stage=stage,
                  wall_time=time.perf_counter() - start, flags=flags)
        logger.debug("dnm %4d %-8s f=%.12g lambda=%.3e", k, stage, local.value, lam)
        if not oracle.in_domain(x_next):
            trace.status = "failed"
            trace.message = f"step from iteration {k} left the domain"
            logger.warning(trace.message)
            return local.x, trace
        local = oracle.local(x_next)

    logger.info("dnm finished: %s after %d steps (switch at %s)", trace.status, trace.iterations,
                trace.switch_iteration)
    return local.x, trace


def damped_iterations(trace: SolveTrace) -> int:
    """Number of damped steps taken before the quadratic region."""
    return sum(1 for r in trace.records if r.stage == "damped")


def superlinear_bound_check(trace: SolveTrace, M_f: float, f_star: float, tol: float = 1e-12) -> BoundCheck:
    """Check M^2 D_{k+1} <= M^2 D_k - omega(omega_*^{-1}(M^2 D_k)) on damped steps with M lambda <= 1."""
    check = BoundCheck(name="dnm_superlinear")
    if M_f <= 0:
        return check
    records = trace.records
    for k in range(len(records) - 1):
        rec, nxt = records[k], records[k + 1]
        if rec.stage != "damped" or M_f * rec.lam > 1.0:
            continue
        gap = M_f ** 2 * max(rec.value - f_star, 0.0)
        gap_next = M_f ** 2 * (nxt.value - f_star)
        bound = gap - omega(omega_star_inverse(gap))
        check.record(gap_next, bound, tol, iteration=float(k))
    return check


def decrease_check(trace: SolveTrace, M_f: float, tol: float = 1e-9) -> BoundCheck:
    """f(x_+) <= f(x) - omega(M_f lambda)/M_f^2 after every damped step."""
    check = BoundCheck(name="damped_decrease")
    records = trace.records
    for k in range(len(records) - 1):
        rec = records[k]
        if rec.stage != "damped":
            continue
        gain = omega(M_f * rec.lam) / M_f ** 2 if M_f > 0 else 0.5 * rec.lam ** 2
        check.record(records[k + 1].value, rec.value - gain, tol, iteration=float(k))
    return check


def quadratic_contraction_check(trace: SolveTrace, M_f: float, tol: float = 1e-9) -> BoundCheck:
    """lambda(x_+) <= 2 M_f lambda^2 after damped steps and
    lambda(x_+) <= (1/M_f) (M_f lambda/(1 - M_f lambda))^2 after standard ones."""
    check = BoundCheck(name="newton_contraction")
    records = trace.records
    for k in range(len(records) - 1):
        rec, nxt = records[k], records[k + 1]
        if rec.stage == "damped":
            bound = 2.0 * M_f * rec.lam ** 2
        elif rec.stage == "standard" and M_f * rec.lam < 1.0:
            u = M_f * rec.lam
            bound = (u / (1.0 - u)) ** 2 / M_f if M_f > 0 else 0.0
        else:
            continue
        check.record(nxt.lam, bound, tol, iteration=float(k))
    return check
