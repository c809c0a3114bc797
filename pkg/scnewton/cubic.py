"""
Cubic regularized Newton steps and the multi-stage restart scheme.

For f strongly convex with modulus sigma_f and an H_f-Lipschitz Hessian
(both in the norm ||h||^2 = <B h, h>), f is self-concordant with
M_f = H_f/(2 sigma_f^{3/2}) and the region of quadratic convergence of the
cubic method is

    Q_f = {x : f(x) - f* <= sigma_f^3/(2 H_f^2)} = {x : M_f^2 (f(x) - f*) <= 1/8}.

## Core Workflow:
1. **Step**: T_M(x) minimizes f(x) + <g, h> + 1/2 <H h, h> + M/6 ||h||^3.
   With H V = B V diag(l), V^T B V = I the minimizer is
   h(r) = -V diag(1/(l + M r/2)) V^T g where r = ||h(r)||, a scalar equation
   solved with brentq.
2. **CRNM**: repeat the step with M = H_f until the iterate enters Q_f.
3. **Multi-stage**: a method with rate f(x_k) - f* <= c H_f R^3/k^p is
   restarted after t_k = ceil(k_p/2^{(k-1)/(2p)}) iterations, which halves
   the gap each stage.

## Important Notes

**Unknown f***: the Q_f test then uses omega_*(M_f lambda_f(x)) <= 1/8, a
sufficient condition; such records carry the "surrogate" flag.

**p = 3 and p = 3.5** are supported for bound reporting only.
"""

import logging
import math
import time
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .configuration import SolverConfiguration
from .errors import DimensionMismatchError, RootFindingError, ScalarDomainError
from .linops import SpdMatrix
from .oracles import OracleValue, ScOracle
from .scalar import omega_star
from .state import BoundCheck, RestartPlan, SolveTrace

logger = logging.getLogger(__name__)

# Default rate constant c in f(x_k) - f* <= c H_f R^3 / k^p for the cubic method
DEFAULT_RATE_CONSTANT = 13.5
SECULAR_TOL = 1e-10


def sc_constant_from_lipschitz(sigma_f: float, H_f: float) -> float:
    """M_f = H_f/(2 sigma_f^{3/2})."""
    if sigma_f <= 0:
        raise ScalarDomainError("sigma_f", sigma_f, "sigma_f > 0")
    if H_f < 0:
        raise ScalarDomainError("H_f", H_f, "H_f >= 0")
    return H_f / (2.0 * sigma_f ** 1.5)


class LipschitzStrongOracle(ScOracle):
    """A strongly convex oracle with Lipschitz Hessian; M_f is derived from (sigma_f, H_f)."""

    def __init__(self, base: ScOracle, sigma_f: float, H_f: float, metric=None):
        M_f = sc_constant_from_lipschitz(sigma_f, H_f)
        super().__init__(base.dim, M_f)
        self.base = base
        self.sigma_f = float(sigma_f)
        self.H_f = float(H_f)
        self.metric = SpdMatrix(np.eye(base.dim) if metric is None else metric)
        if self.metric.dimension != base.dim:
            raise DimensionMismatchError((base.dim, base.dim), self.metric.shape, "metric")

    def in_domain(self, x) -> bool:
        return self.base.in_domain(x)

    def _evaluate(self, x) -> OracleValue:
        return self.base._evaluate(x)

    def norm(self, h) -> float:
        h = np.asarray(h, dtype=float)
        return math.sqrt(max(float(h @ (self.metric @ h)), 0.0))

    @property
    def region_threshold(self) -> float:
        """sigma_f^3/(2 H_f^2), the Q_f threshold on f - f*."""
        return math.inf if self.H_f == 0 else self.sigma_f ** 3 / (2.0 * self.H_f ** 2)


class CubicStep(NamedTuple):
    point: np.ndarray
    r: float
    model_decrease: float
    secular_residual: float
    history: List[Tuple[float, float]]


def _metric(oracle: ScOracle, metric) -> np.ndarray:
    if metric is not None:
        return metric.entries if isinstance(metric, SpdMatrix) else np.asarray(metric, dtype=float)
    if isinstance(oracle, LipschitzStrongOracle):
        return oracle.metric.entries
    return np.eye(oracle.dim)


def cubic_step_details(oracle: ScOracle, x, M: float, metric=None) -> CubicStep:
    """Global minimizer of the cubic model at x, with diagnostics."""
    if M <= 0:
        raise ScalarDomainError("M", M, "M > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    value, g, H = oracle.evaluate(x)
    B = _metric(oracle, metric)
    levels, V = eigh(0.5 * (H + H.T), B)
    g_hat = V.T @ g
    g_norm = float(np.linalg.norm(g_hat))
    if g_norm == 0.0:
        return CubicStep(x.copy(), 0.0, 0.0, 0.0, [])

    lowest = float(levels[0])
    edge = max(0.0, -2.0 * lowest / M)
    hi = edge + math.sqrt(2.0 * g_norm / M)
    # keep H + (M r/2) B strictly positive definite on the bracket
    lo = 0.0 if lowest > 0 else edge * (1.0 + 1e-12) + 1e-15 * hi
    history: List[Tuple[float, float]] = []

    def secular(r: float) -> float:
        shifted = levels + 0.5 * M * r
        with np.errstate(divide="ignore"):
            norm = float(np.linalg.norm(g_hat / shifted))
        history.append((r, norm - r))
        return norm - r

    while secular(hi) > 0:
        hi *= 2.0
        if len(history) > 200:
            raise RootFindingError("cubic step: no upper bracket for the secular equation", history)
    if lowest <= 0 and secular(lo) <= 0:
        # hard case: g has no component on the bottom eigenvector; fill it to reach ||h|| = r
        r = edge
        shifted = levels + 0.5 * M * r
        w = np.zeros_like(g_hat)
        w[1:] = -g_hat[1:] / shifted[1:]
        w[0] = math.sqrt(max(r * r - float(w @ w), 0.0))
    else:
        try:
            r = brentq(secular, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        except (RuntimeError, ValueError) as exc:
            raise RootFindingError(f"cubic step secular solve failed: {exc}", history) from exc
        w = -g_hat / (levels + 0.5 * M * r)
    h = V @ w
    point = x + h
    model_decrease = -(float(g @ h) + 0.5 * float(h @ (H @ h)) + M / 6.0 * r ** 3)
    return CubicStep(point, float(r), model_decrease, abs(float(np.linalg.norm(w)) - r), history)


def cubic_step(oracle: ScOracle, x, M: float, metric=None) -> np.ndarray:
    """T_M(x) = argmin_y f(x) + <g, y - x> + 1/2 <H (y - x), y - x> + M/6 ||y - x||^3."""
    return cubic_step_details(oracle, x, M, metric).point


def cubic_model(oracle: ScOracle, x, y, M: float, metric=None) -> float:
    """Q(x, y) + M/6 ||y - x||^3."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(y, dtype=float) - x
    value, g, H = oracle.evaluate(x)
    B = _metric(oracle, metric)
    r = math.sqrt(max(float(h @ (B @ h)), 0.0))
    return value + float(g @ h) + 0.5 * float(h @ (H @ h)) + M / 6.0 * r ** 3


def in_quadratic_region(oracle: LipschitzStrongOracle, value: float, lam: float,
                        f_star: Optional[float]) -> Tuple[bool, bool]:
    """(inside Q_f, decided by the surrogate test)."""
    if f_star is not None:
        return value - f_star <= oracle.region_threshold, False
    u = oracle.M_f * lam
    return (u < 1.0 and omega_star(u) <= 0.125), True


def _cubic_iterations(oracle: LipschitzStrongOracle, x, M: float, count: int, trace: SolveTrace,
                      stage: str, clock: float, stop: Optional[Callable[[float, float], bool]] = None,
                      config: Optional[SolverConfiguration] = None):
    """Run up to `count` cubic steps, appending one record per visited point.

    Stops early, returning (local, False), once `config` reports its time limit expired.
    """
    local = oracle.local(x)
    for _ in range(count):
        if stop is not None and stop(local.value, local.lam):
            return local, True
        if config is not None and config.expired(clock):
            return local, False
        details = cubic_step_details(oracle, local.x, M)
        trace.add(value=local.value, lam=local.lam, step_norm=details.r, stage=stage,
                  wall_time=time.perf_counter() - clock)
        logger.debug("crnm %-8s f=%.12g lambda=%.3e r=%.3e", stage, local.value, local.lam, details.r)
        local = oracle.local(details.point)
    return local, False


def crnm_solve(
    oracle: LipschitzStrongOracle,
    x0,
    config: Optional[SolverConfiguration] = None,
    f_star: Optional[float] = None,
    M: Optional[float] = None,
) -> Tuple[np.ndarray, SolveTrace]:
    """Cubic regularized Newton with M = H_f until the iterate enters Q_f."""
    config = config or SolverConfiguration()
    M = oracle.H_f if M is None else M
    trace = SolveTrace(method="crnm")
    clock = time.perf_counter()
    surrogate = f_star is None
    if surrogate:
        logger.warning("crnm: f* unknown, testing Q_f through omega_*(M_f lambda) <= 1/8")

    def stop(value, lam):
        return in_quadratic_region(oracle, value, lam, f_star)[0]

    local, entered = _cubic_iterations(oracle, x0, M, config.max_iters, trace, "cubic", clock, stop, config)
    if not entered and not stop(local.value, local.lam):
        trace.status = "timeout" if config.expired(clock) else "max_iters"
    trace.switch_iteration = len(trace.records) if trace.status == "converged" else None
    final = trace.add(value=local.value, lam=local.lam, stage="final", wall_time=time.perf_counter() - clock)
    if surrogate:
        final.flags.append("surrogate")
    logger.info("crnm finished: %s after %d steps", trace.status, trace.iterations)
    return local.x, trace


## Rates and restarts

def fit_rate_constant(trace: SolveTrace, f_star: float, H_f: float, R: float, p: float = 2.0) -> float:
    """Smallest c with f(x_k) - f* <= c H_f R^3/k^p along the trace (k >= 1)."""
    if H_f <= 0 or R <= 0:
        raise ScalarDomainError("H_f R^3", H_f * R ** 3, "> 0")
    values = trace.values()
    ratios = [(values[k] - f_star) * k ** p / (H_f * R ** 3) for k in range(1, len(values))]
    return float(max(ratios, default=0.0))


def rate_envelope_check(trace: SolveTrace, f_star: float, H_f: float, R: float, c: float,
                        p: float = 2.0, tol: float = 1e-12) -> BoundCheck:
    """f(x_k) - f* <= c H_f R^3/k^p for k >= 1."""
    check = BoundCheck(name="crnm_rate_envelope")
    values = trace.values()
    for k in range(1, len(values)):
        check.record(values[k] - f_star, c * H_f * R ** 3 / k ** p, tol, iteration=float(k))
    return check


def first_stage_length(p: float, c: float, M_f: float, gap: float) -> int:
    """First integer k with 2^{5/2} c M_f gap^{3/2}/k^p <= gap/2."""
    if p <= 0:
        raise ScalarDomainError("p", p, "p > 0")
    if gap <= 0 or M_f <= 0:
        return 1
    return max(1, math.ceil((2.0 ** 3.5 * c * M_f * math.sqrt(gap)) ** (1.0 / p) - 1e-12))


def restart_plan(p: float, c: float, M_f: float, gap: float, target: float = 0.0, stages: int = 0) -> RestartPlan:
    """Stage schedule t_k = ceil(k_p/2^{(k-1)/(2p)}) for a gap f(x0) - f~."""
    plan = RestartPlan(p=p, c=c, k_p=first_stage_length(p, c, M_f, gap), target=target)
    return plan.extend(stages) if stages else plan


def multistage_bounds(plan: RestartPlan, delta: float) -> dict:
    """Bounds on the number of stages and inner iterations.

    delta = H_f^2 (f(x0) - f*)/sigma_f^3 = 4 M_f^2 (f(x0) - f*).
    """
    log_delta = math.log2(delta) if delta > 0 else -math.inf
    q = 2.0 ** (1.0 / (2.0 * plan.p))
    stages = max(0.0, 4.0 + log_delta)
    return {
        "stages": stages,
        "iterations": stages + plan.k_p * q / (q - 1.0),
        "order": delta ** (1.0 / (2.0 * plan.p)) if delta > 0 else 0.0,
    }


def stage_length_check(plan: RestartPlan) -> BoundCheck:
    """t_{k+1}^p >= (1/2)^{k/2} k_p^p and the stage lengths are non-increasing."""
    check = BoundCheck(name="stage_lengths")
    lengths = plan.stage_lengths
    for k, length in enumerate(lengths):
        check.record(0.5 ** (k / 2.0) * plan.k_p ** plan.p, length ** plan.p, 1e-9, stage=float(k + 1))
        if k > 0:
            check.record(float(length), float(lengths[k - 1]), 0.0, stage=float(k + 1))
    return check


def multistage_solve(
    oracle: LipschitzStrongOracle,
    x0,
    p: float = 2.0,
    c: float = DEFAULT_RATE_CONSTANT,
    f_lower: Optional[float] = None,
    f_star: Optional[float] = None,
    max_stages: int = 64,
    base: Optional[Callable[..., Tuple[object, bool]]] = None,
    config: Optional[SolverConfiguration] = None,
) -> Tuple[np.ndarray, SolveTrace, RestartPlan]:
    """Restart the base method after t_k iterations until the stage end lies in Q_f.

    k_p uses f(x0) - f~ with f~ = f_lower (or f* when known). The base method
    defaults to the cubic step with M = H_f, which has p = 2. `config.max_iters`
    caps the inner steps summed over all stages; the last stage is cut short to
    fit, and the planned lengths stay in the plan.
    """
    config = config or SolverConfiguration()
    f_tilde = f_lower if f_lower is not None else f_star
    if f_tilde is None:
        raise ScalarDomainError("f_lower", math.nan, "a lower bound on f* is required")
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    gap0 = oracle.value(x) - f_tilde
    plan = restart_plan(p, c, oracle.M_f, gap0, oracle.region_threshold)
    trace = SolveTrace(method="multistage-crnm")
    clock = time.perf_counter()
    run = base or (lambda o, y, count, tr, stage: _cubic_iterations(o, y, o.H_f, count, tr, stage, clock,
                                                                   config=config))

    local = oracle.local(x)
    k = 0
    used = 0
    while True:
        inside, surrogate = in_quadratic_region(oracle, local.value, local.lam, f_star)
        if inside:
            break
        if k >= max_stages:
            trace.status = "stage_cap"
            break
        if used >= config.max_iters:
            trace.status = "max_iters"
            break
        if config.expired(clock):
            trace.status = "timeout"
            break
        k += 1
        length = plan.length(k)
        plan.stage_lengths.append(length)
        length = min(length, config.max_iters - used)
        used += length
        local, _ = run(oracle, local.x, length, trace, f"stage-{k}")
        trace.stage_boundaries.append(len(trace.records))
        logger.debug("multistage stage %d (%d steps): f=%.12g", k, length, local.value)
    final = trace.add(value=local.value, lam=local.lam, stage="final", wall_time=time.perf_counter() - clock)
    if f_star is None:
        final.flags.append("surrogate")
    logger.info("multistage finished: %s, %d stages, %d inner steps", trace.status, k, trace.iterations)
    return local.x, trace, plan


def stage_halving_check(trace: SolveTrace, f_star: float, tol: float = 1e-12) -> BoundCheck:
    """f(y_k) - f* <= (1/2)^k (f(y_0) - f*) at stage ends."""
    check = BoundCheck(name="stage_halving")
    values = trace.values()
    if values.size == 0:
        return check
    gap0 = values[0] - f_star
    for k, boundary in enumerate(trace.stage_boundaries, start=1):
        if boundary < values.size:
            check.record(values[boundary] - f_star, 0.5 ** k * gap0, tol, stage=float(k))
    return check
