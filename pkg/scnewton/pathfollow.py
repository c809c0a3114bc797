"""
Path-following for general self-concordant functions.

## Central path

With c = -grad f(x0), the family f_t(x) = f(x) + t <c, x> has the minimizer
x(t) with x(1) = x0 and x(0) = x*. A pair (t, x) is centered when

    lambda_{f_t}(x) = ||grad f(x) + t c||*_x <= beta / M_f.

## Core Workflow:
1. **Path phase**: decrease t by gamma/(M_f ||c||*_x) (clamped at 0) and
   recenter with one standard Newton step on f_{t+}. Stops once x enters the
   quadratic region {lambda_f(x) <= 1/(2 M_f)} or t reaches 0.
2. **Finishing phase**: standard Newton steps on f until lambda_f <= 1e-10/M_f.

The same driver runs the predictor-corrector iterate (`predcorr.py`) and the
adaptive variants, which search the step length by halving from twice the
previous one.

## Important Notes

**Centering check**: every iterate verifies its output residual. A violation
raises CenteringLostError, which means the declared M_f is wrong.

**Norm of c**: ||c||*_x is recomputed at the current point each iterate.

**D**: the level-set diameter only enters reported bounds, never the algorithm.
"""

import logging
import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from .configuration import SolverConfiguration
from .errors import CenteringLostError, DomainViolationError, InvalidConstantsError
from .oracles import LocalModel, ScOracle
from .scalar import validate_constants
from .state import PFS_CONSTANTS, BoundCheck, CenteredPair, PathConstants, PfsReport, SolveTrace

logger = logging.getLogger(__name__)

# t below this after an update is clamped to exactly 0
T_CLAMP = 1e-15

# (pair, local model at pair.x, step length) -> (new pair, local model at new x)
PathStep = Callable[[ScOracle, CenteredPair, LocalModel, float, PathConstants], Tuple[CenteredPair, LocalModel]]


def centering_residual(oracle: ScOracle, x0_grad, t: float, x) -> float:
    """||grad f(x) - t grad f(x0)||*_x."""
    local = oracle.local(x)
    return local.geometry.dual_norm(local.gradient - t * np.asarray(x0_grad, dtype=float))


def _shifted_residual(local: LocalModel, c: np.ndarray, t: float) -> float:
    return local.geometry.dual_norm(local.gradient + t * c)


def _next_t(t: float, gamma: float, M_f: float, c_norm: float) -> float:
    if M_f <= 0 or c_norm <= 0:
        return 0.0
    t_next = t - gamma / (M_f * c_norm)
    return 0.0 if t_next <= T_CLAMP else t_next


def centering_bound(consts: PathConstants, M_f: float, tol: float = 1e-9) -> float:
    """beta/M_f plus the relative slack allowed by the checks."""
    if M_f <= 0:
        return math.inf
    return consts.beta / M_f * (1.0 + tol) + 1e-14


def recenter(oracle: ScOracle, y: np.ndarray, local_y: LocalModel, c: np.ndarray, t: float,
                consts: PathConstants, tol: float, where: str) -> Tuple[CenteredPair, LocalModel]:
    """One standard Newton step on f_t from y, then verify the centering condition."""
    direction = local_y.geometry.solve_direction(local_y.gradient + t * c)
    x_next = y - direction
    if not oracle.in_domain(x_next):
        raise DomainViolationError(f"{where}: corrector step left the domain", x_next.tolist())
    local_next = oracle.local(x_next)
    residual = _shifted_residual(local_next, c, t)
    bound = centering_bound(consts, oracle.M_f, tol)
    if residual > bound:
        raise CenteringLostError(residual, bound, where)
    return CenteredPair(t=t, x=x_next, residual=residual, c=c), local_next


def _pfs_step(oracle, pair, local, gamma, consts, tol=1e-9):
    c_norm = local.geometry.dual_norm(pair.c)
    t_next = _next_t(pair.t, gamma, oracle.M_f, c_norm)
    return recenter(oracle, pair.x, local, pair.c, t_next, consts, tol, "pfs_iterate")


def require_valid_constants(consts: PathConstants) -> None:
    report = validate_constants(consts)
    if not report.ok:
        raise InvalidConstantsError(report)


def pfs_iterate(oracle: ScOracle, pair: CenteredPair, consts: PathConstants = PFS_CONSTANTS) -> CenteredPair:
    """One path-following iterate: shrink t, then one standard Newton step on f_{t+}."""
    require_valid_constants(consts)
    local = oracle.local(pair.x)
    if oracle.M_f > 0 and _shifted_residual(local, pair.c, pair.t) > centering_bound(consts, oracle.M_f):
        raise CenteringLostError(_shifted_residual(local, pair.c, pair.t),
                                 centering_bound(consts, oracle.M_f), "pfs_iterate input")
    return _pfs_step(oracle, pair, local, consts.gamma, consts)[0]


def _adaptive(step: PathStep, oracle: ScOracle, pair: CenteredPair, local: LocalModel,
              gamma_prev: float, consts: PathConstants) -> Tuple[CenteredPair, LocalModel, float, int]:
    """Try gamma = 2^{1-i} gamma_prev (floored at consts.gamma) for i = 0, 1, ..."""
    floor = consts.gamma
    i = 0
    while True:
        gamma = max(2.0 ** (1 - i) * gamma_prev, floor)
        try:
            new_pair, new_local = step(oracle, pair, local, gamma, consts)
            return new_pair, new_local, gamma, i + 1
        except (CenteringLostError, DomainViolationError):
            if gamma <= floor:
                raise
            logger.debug("adaptive step gamma=%.4g rejected", gamma)
        i += 1


def adaptive_pfs_iterate(oracle: ScOracle, pair: CenteredPair, gamma_prev: float,
                         consts: PathConstants = PFS_CONSTANTS) -> Tuple[CenteredPair, float, int]:
    """Adaptive path-following iterate; returns (pair, gamma_used, tries)."""
    require_valid_constants(consts)
    new_pair, _, gamma, tries = _adaptive(_pfs_step, oracle, pair, oracle.local(pair.x), gamma_prev, consts)
    return new_pair, gamma, tries


def run_path(
    oracle: ScOracle,
    x0,
    consts: PathConstants,
    config: Optional[SolverConfiguration],
    step: PathStep,
    method: str,
    adaptive: bool = False,
    f_star: Optional[float] = None,
    D: Optional[float] = None,
    rate: Optional[Callable[[int, float], float]] = None,
) -> Tuple[np.ndarray, PfsReport]:
    """Shared driver of the path-following family.

    `rate(N, f0 - f*)` returns the a priori bound on t_N checked while the
    iterates stay outside the quadratic region.
    """
    require_valid_constants(consts)
    config = config or SolverConfiguration()
    target, finish = config.resolve(oracle.M_f)
    trace = SolveTrace(method=method)
    start = time.perf_counter()

    local = oracle.local(x0)
    c = -local.gradient.copy()
    f0, lambda0 = local.value, local.lam
    pair = CenteredPair(t=1.0, x=local.x, residual=0.0, c=c)
    t_sequence: List[float] = [1.0]
    gamma_prev = consts.gamma
    n_path = 0

    def elapsed() -> float:
        return time.perf_counter() - start

    # Path phase
    while local.lam > target and pair.t > 0 and local.lam > finish:
        if n_path >= config.max_iters:
            trace.status = "max_iters"
            break
        if config.expired(start):
            trace.status = "timeout"
            break
        c_norm = local.geometry.dual_norm(c)
        record = dict(value=local.value, lam=local.lam, t=pair.t, c_norm=c_norm,
                      residual=pair.residual, stage="path", wall_time=elapsed())
        if adaptive:
            pair, local, gamma_prev, tries = _adaptive(step, oracle, pair, local, gamma_prev, consts)
            record.update(gamma=gamma_prev, tries=tries)
        else:
            pair, local = step(oracle, pair, local, consts.gamma, consts)
            record.update(gamma=consts.gamma, tries=1)
        trace.add(**record)
        t_sequence.append(pair.t)
        n_path += 1
        logger.debug("%s %4d t=%.6e lambda=%.3e f=%.12g", method, n_path, pair.t, local.lam, local.value)

    # Finishing phase: standard Newton on f itself
    trace.switch_iteration = len(trace.records) if local.lam <= target else None
    k = 0
    while trace.status not in ("max_iters", "timeout"):
        if local.lam <= finish:
            break
        if k >= config.max_iters:
            trace.status = "max_iters"
            break
        if config.expired(start):
            trace.status = "timeout"
            break
        if trace.switch_iteration is None and local.lam <= target:
            trace.switch_iteration = len(trace.records)
        x_next = local.x - local.newton_direction
        flags = []
        stage = "standard"
        if not oracle.in_domain(x_next):
            logger.warning("%s: finishing step left the domain; damping it", method)
            x_next = local.x - local.newton_direction / (1.0 + oracle.M_f * local.lam)
            flags.append("fallback-damped")
            stage = "damped"
        trace.add(value=local.value, lam=local.lam, t=0.0, step_norm=local.lam, stage=stage,
                  wall_time=elapsed(), flags=flags)
        local = oracle.local(x_next)
        k += 1
    trace.add(value=local.value, lam=local.lam, t=pair.t if k == 0 else 0.0, stage="final", wall_time=elapsed())

    report = PfsReport(trace=trace, n_path=n_path, t_sequence=t_sequence, constants=consts,
                       f0=f0, lambda0=lambda0, M_f=oracle.M_f, D_bound=D)
    if f_star is not None and rate is not None:
        gap = f0 - f_star
        check = BoundCheck(name=f"{method}_rate")
        for N in range(1, n_path + 1):
            bound = rate(N, gap)
            report.predicted_t.append(bound)
            check.record(t_sequence[N], bound, 1e-12, N=float(N))
        report.rate_check = check
    logger.info("%s finished: %s, %d path iterations, %d total", method, trace.status, n_path, trace.iterations)
    return local.x, report


def pfs_rate(consts: PathConstants, M_f: float) -> Callable[[int, float], float]:
    """t_N <= exp(-gamma (gamma - 2 beta) N^2 / (2 M_f^2 (f0 - f*)))."""
    beta, gamma = consts.beta, consts.gamma

    def bound(N: int, gap: float) -> float:
        if gap <= 0:
            return 0.0
        return math.exp(-gamma * (gamma - 2.0 * beta) * N * N / (2.0 * M_f ** 2 * gap))

    return bound


def pfs_solve(
    oracle: ScOracle,
    x0,
    consts: PathConstants = PFS_CONSTANTS,
    config: Optional[SolverConfiguration] = None,
    f_star: Optional[float] = None,
    D: Optional[float] = None,
    adaptive: bool = False,
) -> Tuple[np.ndarray, PfsReport]:
    """Path-following scheme from (1, x0) to the quadratic region, then Newton to the finish tolerance."""
    return run_path(oracle, x0, consts, config, _pfs_step, "adaptive-pfs" if adaptive else "pfs",
                    adaptive=adaptive, f_star=f_star, D=D, rate=pfs_rate(consts, oracle.M_f))


def pfs_superlinear_check(report: PfsReport, f0_minus_fstar: float) -> BoundCheck:
    """t_{N+1} <= (1 - tau (N+1)/(f0 - f*))^{N+1}, tau = gamma (gamma - 2 beta)/(2 M_f^2),
    for path iterates N while N + 1 < (f0 - f*)/tau."""
    check = BoundCheck(name="pfs_superlinear")
    beta, gamma = report.constants.beta, report.constants.gamma
    if report.M_f <= 0 or f0_minus_fstar <= 0:
        return check
    tau = gamma * (gamma - 2.0 * beta) / (2.0 * report.M_f ** 2)
    for N in range(report.n_path):
        if N + 1 >= f0_minus_fstar / tau:
            break
        bound = (1.0 - tau * (N + 1) / f0_minus_fstar) ** (N + 1)
        check.record(report.t_sequence[N + 1], bound, 1e-12, N=float(N))
    return check


def path_decrease_check(report: PfsReport, per_unit: float, tol: float = 1e-9) -> BoundCheck:
    """f(x_k) - f(x_{k+1}) >= per_unit * t_k ||c||*_{x_k} on path iterates with t_{k+1} > 0.

    per_unit is (gamma - 2 beta)/(2 M_f) for PFS and kappa/M_f for PCPFS.
    """
    check = BoundCheck(name=f"{report.trace.method}_decrease")
    records = report.trace.records
    for k, rec in enumerate(records[:-1]):
        if rec.stage != "path" or report.t_sequence[k + 1] <= 0:
            continue
        gain = per_unit * rec.t * rec.c_norm
        check.record(records[k + 1].value, rec.value - gain, tol, iteration=float(k))
    return check


def adaptive_step_accounting(report: PfsReport, gamma_hat: Optional[float] = None,
                             gamma_initial: Optional[float] = None) -> BoundCheck:
    """Sum of step halvings over k adaptive iterates <= (k - 1) + log2(4 gamma_{-1}/gamma_hat)."""
    check = BoundCheck(name="adaptive_accounting")
    gamma_hat = gamma_hat or report.constants.gamma
    gamma_initial = gamma_initial or report.constants.gamma
    tries = [r.tries for r in report.trace.records if r.stage == "path" and r.tries is not None]
    if not tries:
        return check
    halvings = sum(t - 1 for t in tries)
    check.record(float(halvings), len(tries) - 1 + math.log2(4.0 * gamma_initial / gamma_hat), 0.0)
    return check
