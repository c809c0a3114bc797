"""
Predictor-corrector schemes for linear objectives over barrier domains.

## Core Workflow:
1. **Primal**: min <c, x> over a bounded Q with a nu-self-concordant barrier F.
   The pair (t, x) follows argmin F + t<c, .> with t growing by
   gamma/||c||*_x; stopping uses the certificate (nu + (beta + sqrt(nu)) beta/(1 - beta))/t.
2. **Dual**: max -<c, x> s.t. B x = 0, x in Q, rewritten with A = [-c^T; B] and
   b = e_1 as max alpha s.t. A x = alpha b. The scheme follows the central
   path of min {Phi(u) : <b, u> = sigma}, Phi(u) = F_*(A^T u), and recovers a
   feasible primal point whose objective equals the multiplier estimate t(u).

## Important Notes

**Starting points**: the primal scheme starts from any x with
||grad F(x)||*_x <= beta, found by damped Newton on F. The dual scheme starts
at (sigma, u) = (0, 0), which needs grad F(0) = 0.

**Dual oracle**: grad Phi(u) = A x(A^T u) and Hess Phi(u) = A [Hess F(x)]^{-1} A^T
come from the conjugate oracle; no closed form of F_* is needed.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .configuration import SolverConfiguration
from .errors import CenteringLostError, DimensionMismatchError, DomainViolationError
from .linops import LocalGeometry
from .oracles import BarrierOracle, ConjugateOracle, LinearImageOracle, LocalModel
from .pathfollow import centering_bound, recenter, require_valid_constants
from .state import BARRIER_PC_CONSTANTS, BoundCheck, PathConstants, SolveTrace

logger = logging.getLogger(__name__)


@dataclass(kw_only=True)
class PrimalBarrierProblem:
    """min <c, x> over the closure of dom F."""

    barrier: BarrierOracle
    c: np.ndarray
    consts: PathConstants = BARRIER_PC_CONSTANTS

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        if self.c.shape != (self.barrier.dim,):
            raise DimensionMismatchError((self.barrier.dim,), self.c.shape, "objective")
        require_valid_constants(self.consts)

    @property
    def nu(self) -> float:
        return self.barrier.nu


@dataclass(kw_only=True)
class DualBarrierProblem:
    """max -<c, x> s.t. B x = 0, x in Q, solved through its dual central path."""

    barrier: BarrierOracle
    c: np.ndarray
    B: Optional[np.ndarray] = None
    consts: PathConstants = BARRIER_PC_CONSTANTS
    inner_tol: float = 1e-12
    A: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)
    phi: LinearImageOracle = field(init=False)

    def __post_init__(self):
        n = self.barrier.dim
        self.c = np.asarray(self.c, dtype=float)
        B = np.zeros((0, n)) if self.B is None else np.atleast_2d(np.asarray(self.B, dtype=float))
        if self.c.shape != (n,) or B.shape[1] != n:
            raise DimensionMismatchError((n,), (self.c.shape, B.shape), "objective/constraints")
        self.B = B
        self.A = np.vstack([-self.c[None, :], B])
        self.b = np.zeros(self.A.shape[0])
        self.b[0] = 1.0
        self.phi = LinearImageOracle(ConjugateOracle(self.barrier, inner_tol=self.inner_tol), self.A)
        require_valid_constants(self.consts)

    @property
    def nu(self) -> float:
        return self.barrier.nu


class DualPoint:
    """Phi and its local geometry at u, together with the primal point x(A^T u)."""

    def __init__(self, prob: DualBarrierProblem, u):
        self.u = np.asarray(u, dtype=float)
        result, self.x, self.primal = prob.phi.evaluate_at(self.u)
        self.value, self.gradient = result.value, result.gradient
        self.geometry = LocalGeometry(result.hessian)
        self.t = optimal_shift(self.geometry, self.gradient, prob.b)
        self.lam = self.geometry.dual_norm(self.gradient - self.t * prob.b)


## Primal scheme

def primal_certificate(nu: float, t: float, beta: float) -> float:
    """Accuracy certificate (nu + (beta + sqrt(nu)) beta/(1 - beta))/t of a centered (t, x)."""
    if t <= 0:
        return math.inf
    return (nu + (beta + math.sqrt(nu)) * beta / (1.0 - beta)) / t


def center_barrier(barrier: BarrierOracle, beta: float, max_iters: int = 500, x0=None) -> np.ndarray:
    """Damped Newton on F until ||grad F(x)||*_x <= beta."""
    x = barrier.start_point() if x0 is None else np.asarray(x0, dtype=float)
    for _ in range(max_iters):
        local = barrier.local(x)
        if local.lam <= beta:
            return local.x
        step = local.newton_direction
        x = local.x - (step / (1.0 + local.lam) if local.lam > 0.25 else step)
    raise CenteringLostError(barrier.local(x).lam, beta, "center_barrier")


def primal_residual(prob: PrimalBarrierProblem, t: float, x) -> float:
    local = prob.barrier.local(x)
    return local.geometry.dual_norm(local.gradient + t * prob.c)


def primal_pc_iterate(prob: PrimalBarrierProblem, t: float, x, tol: float = 1e-9) -> Tuple[float, np.ndarray]:
    """Predictor along -[Hess F]^{-1} c while t grows by gamma/||c||*_x, then one Newton corrector."""
    barrier, c, consts = prob.barrier, prob.c, prob.consts
    local: LocalModel = barrier.local(x)
    residual = local.geometry.dual_norm(local.gradient + t * c)
    if residual > centering_bound(consts, 1.0, tol):
        raise CenteringLostError(residual, consts.beta, "primal_pc_iterate input")
    step = consts.gamma / local.geometry.dual_norm(c)
    t_next = t + step
    y = local.x - step * local.geometry.solve_direction(c)
    if not barrier.in_domain(y):
        raise DomainViolationError("primal predictor left the domain", y.tolist())
    pair, _ = recenter(barrier, y, barrier.local(y), c, t_next, consts, tol, "primal_pc_iterate")
    return t_next, pair.x


def primal_pc_solve(
    prob: PrimalBarrierProblem,
    eps: float,
    start: Optional[Tuple[float, np.ndarray]] = None,
    config: Optional[SolverConfiguration] = None,
) -> Tuple[np.ndarray, float, SolveTrace]:
    """Run primal_pc_iterate until the certificate drops to eps.

    Returns (x, certificate, trace) with <c, x> - min <c, .> <= certificate.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    config = config or SolverConfiguration()
    consts = prob.consts
    if start is None:
        t, x = 0.0, center_barrier(prob.barrier, consts.beta)
    else:
        t, x = float(start[0]), np.asarray(start[1], dtype=float)
    trace = SolveTrace(method="primal-pc")
    clock = time.perf_counter()
    certificate = primal_certificate(prob.nu, t, consts.beta)
    k = 0
    while True:
        trace.add(value=float(prob.c @ x), lam=primal_residual(prob, t, x), t=t, certificate=certificate,
                  stage="path", wall_time=time.perf_counter() - clock)
        if certificate <= eps:
            break
        if k >= config.max_iters:
            trace.status = "max_iters"
            break
        if config.expired(clock):
            trace.status = "timeout"
            break
        t, x = primal_pc_iterate(prob, t, x, config.centering_tol)
        certificate = primal_certificate(prob.nu, t, consts.beta)
        k += 1
    trace.records[-1].stage = "final"
    logger.info("primal-pc finished after %d iterations, certificate %.3e", k, certificate)
    return x, certificate, trace


def primal_path_point(prob: PrimalBarrierProblem, t: float, tol: float = 1e-12, max_iters: int = 500) -> np.ndarray:
    """High-accuracy x(t) = argmin F + t <c, .>."""
    x = center_barrier(prob.barrier, 0.25)
    for _ in range(max_iters):
        local = prob.barrier.local(x)
        g = local.gradient + t * prob.c
        d = local.geometry.solve_direction(g)
        lam = float(np.sqrt(max(g @ d, 0.0)))
        if lam <= tol:
            return local.x
        x = local.x - (d / (1.0 + lam) if lam > 0.25 else d)
    return x


def primal_growth_check(trace: SolveTrace, nu: float, consts: PathConstants, tol: float = 1e-12) -> BoundCheck:
    """t_{k+1} >= t_k (1 + gamma/(beta + sqrt(nu))) for t_k > 0."""
    check = BoundCheck(name="primal_t_growth")
    factor = 1.0 + consts.gamma / (consts.beta + math.sqrt(nu))
    ts = [r.t for r in trace.records]
    for k in range(len(ts) - 1):
        if ts[k] > 0:
            check.record(ts[k] * factor, ts[k + 1], tol * ts[k], iteration=float(k))
    return check


## Dual scheme

def optimal_shift(geometry: LocalGeometry, gradient, b) -> float:
    """argmin_t ||gradient - t b||*, that is <b, H^{-1} g>/<b, H^{-1} b>."""
    hb = geometry.solve_direction(b)
    denominator = float(b @ hb)
    if denominator <= 0:
        raise CenteringLostError(denominator, 0.0, "optimal_shift: ||b||* vanished")
    return float(hb @ gradient) / denominator


def dual_t_of_u(prob: DualBarrierProblem, u) -> float:
    """t(u) minimizing ||grad Phi(u) - t b||*_u."""
    return DualPoint(prob, u).t


def dual_lambda(prob: DualBarrierProblem, u) -> Tuple[float, float]:
    """(lambda(u), t(u))."""
    point = DualPoint(prob, u)
    return point.lam, point.t


def dual_certificate(nu: float, sigma: float, beta: float) -> float:
    """(nu + 2 beta (1 - beta) sqrt(nu)/(1 - 2 beta))/sigma."""
    if sigma <= 0:
        return math.inf
    return (nu + 2.0 * beta * (1.0 - beta) * math.sqrt(nu) / (1.0 - 2.0 * beta)) / sigma


def dual_pc_iterate(prob: DualBarrierProblem, sigma: float, u, tol: float = 1e-9) -> Tuple[float, np.ndarray]:
    """Predictor v = u + (gamma/||b||*_u) [Hess Phi(u)]^{-1} b, then the equality-constrained Newton corrector."""
    consts, b = prob.consts, prob.b
    here = DualPoint(prob, u)
    if here.lam > centering_bound(consts, 1.0, tol):
        raise CenteringLostError(here.lam, consts.beta, "dual_pc_iterate input")
    hb = here.geometry.solve_direction(b)
    v = here.u + consts.gamma / math.sqrt(float(b @ hb)) * hb
    if not prob.phi.in_domain(v):
        raise DomainViolationError("dual predictor left the domain", v.tolist())
    sigma_next = float(b @ v)
    there = DualPoint(prob, v)
    # multiplier t(v) keeps <b, u+> = <b, v>
    u_next = v - there.geometry.solve_direction(there.gradient - there.t * b)
    lam_next, _ = dual_lambda(prob, u_next)
    bound = centering_bound(consts, 1.0, tol)
    if lam_next > bound:
        raise CenteringLostError(lam_next, bound, "dual_pc_iterate")
    return sigma_next, u_next


def recover_primal(prob: DualBarrierProblem, u) -> np.ndarray:
    """x_hat = argmin {||x - x(u)||^2_{x(u)} : A x = t(u) b}.

    Closed form x - [Hess F(x)]^{-1} A^T [Hess Phi(u)]^{-1} (grad Phi(u) - t(u) b).
    """
    point = DualPoint(prob, u)
    w = point.geometry.solve_direction(point.gradient - point.t * prob.b)
    return point.x - point.primal.geometry.solve_direction(prob.A.T @ w)


def dual_pc_solve(
    prob: DualBarrierProblem, eps: float, config: Optional[SolverConfiguration] = None
) -> Tuple[float, np.ndarray, SolveTrace]:
    """Follow the dual path from (0, 0) until the certificate is <= eps.

    Returns (alpha_estimate, x_feasible, trace); |alpha* - alpha_estimate| <= eps.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    config = config or SolverConfiguration()
    consts = prob.consts
    sigma, u = 0.0, np.zeros(prob.A.shape[0])
    trace = SolveTrace(method="dual-pc")
    clock = time.perf_counter()
    k = 0
    while True:
        point = DualPoint(prob, u)
        certificate = dual_certificate(prob.nu, sigma, consts.beta)
        trace.add(value=point.t, lam=point.lam, t=sigma, certificate=certificate,
                  step_norm=point.geometry.primal_norm(point.u), stage="path",
                  wall_time=time.perf_counter() - clock)
        if certificate <= eps:
            break
        if k >= config.max_iters:
            trace.status = "max_iters"
            break
        if config.expired(clock):
            trace.status = "timeout"
            break
        sigma, u = dual_pc_iterate(prob, sigma, u, config.centering_tol)
        k += 1
    trace.records[-1].stage = "final"
    x_hat = recover_primal(prob, u)
    logger.info("dual-pc finished after %d iterations, alpha ~ %.10g", k, point.t)
    return point.t, x_hat, trace


def dual_growth_check(trace: SolveTrace, nu: float, consts: PathConstants, tol: float = 1e-12) -> BoundCheck:
    """sigma_{k+1} >= sigma_k (1 + gamma/sqrt(nu)) for sigma_k > 0."""
    check = BoundCheck(name="dual_sigma_growth")
    factor = 1.0 + consts.gamma / math.sqrt(nu)
    sigmas = [r.t for r in trace.records]
    for k in range(len(sigmas) - 1):
        if sigmas[k] > 0:
            check.record(sigmas[k] * factor, sigmas[k + 1], tol * sigmas[k], iteration=float(k))
    return check


def dual_norm_bound_check(trace: SolveTrace, nu: float, tol: float = 1e-8) -> BoundCheck:
    """||u||_u <= sqrt(nu) along the dual iterates (stored as step_norm)."""
    check = BoundCheck(name="dual_u_norm")
    for r in trace.records:
        check.record(r.step_norm or 0.0, math.sqrt(nu), tol, iteration=float(r.iteration))
    return check
