"""
Feasibility problems: find x in Q with A x = b.

The problem is solved as min F(x) s.t. A x = b for a nu-self-concordant
barrier F of Q with F(0) = 0 and grad F(0) = 0, through its dual

    min_y  Phi~(y) = F_*(A^T y) - <b, y>,

starting from y = 0. Phi~(0) - Phi~* = F(x*) <= nu ln(1/eps), where eps is the
feasibility depth, so the three strategies cost O(nu ln(1/eps)) (damped
Newton), O(sqrt(nu ln(1/eps))) (path-following) and O(sqrt(nu) ln(nu/eps))
(dual path-following).

Linear programs reduce to this form through the homogeneous self-dual
embedding, see `lp_to_feasibility`.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import qr

from .barrier_methods import optimal_shift
from .configuration import MethodType, SolverConfiguration
from .errors import (
    CenteringLostError,
    DimensionMismatchError,
    DomainViolationError,
    NotPositiveDefiniteError,
    RankDeficientError,
    ScNewtonError,
)
from .linops import LocalGeometry
from .newton import dnm_solve
from .oracles import BarrierOracle, ConjugateOracle, LinearImageOracle, ShiftedOracle
from .pathfollow import pfs_solve
from .state import BARRIER_PC_CONSTANTS, BoundCheck, SolveTrace, StrategyRow
from .zoo import SimplexBarrier

logger = logging.getLogger(__name__)

# Stopping rule of the feasibility solves
FEASIBILITY_TOL = 1e-8
INNER_TOL = 1e-10


@dataclass(kw_only=True)
class FeasibilityInstance:
    """x in Q, A x = b, with a barrier F of Q centered at the origin."""

    barrier: BarrierOracle
    A: np.ndarray
    b: np.ndarray
    eps_depth: Optional[float] = None
    phi: LinearImageOracle = field(init=False)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if self.A.shape != (self.b.size, self.barrier.dim):
            raise DimensionMismatchError((self.b.size, self.barrier.dim), self.A.shape, "constraint matrix")
        if self.eps_depth is not None and self.eps_depth <= 0:
            raise ValueError(f"feasibility depth must be positive, got {self.eps_depth}")
        self.phi = LinearImageOracle(ConjugateOracle(self.barrier), self.A)

    @property
    def nu(self) -> float:
        return self.barrier.nu

    def dual_objective(self) -> ShiftedOracle:
        """Phi~(y) = F_*(A^T y) - <b, y>."""
        return ShiftedOracle(self.phi, self.b, -1.0)

    def primal_point(self, y) -> np.ndarray:
        """x(y) = grad F_*(A^T y), inside Q for every y."""
        return self.phi.primal_point(y)

    def residual(self, x) -> float:
        return float(np.linalg.norm(self.A @ x - self.b))

    @classmethod
    def from_problem(cls, instance) -> "FeasibilityInstance":
        """Build from a zoo ProblemInstance carrying A, b and a barrier."""
        return cls(barrier=instance.barrier(), A=instance.array("A"), b=instance.array("b"),
                   eps_depth=instance.eps_depth)


def _failed_trace(method: str, exc: Exception) -> SolveTrace:
    trace = SolveTrace(method=method, status="failed", message=str(exc))
    logger.warning("%s failed: %s", method, exc)
    return trace


def feasibility_via_dual(
    inst: FeasibilityInstance, solver: MethodType = MethodType.FEAS_DNM, config: Optional[SolverConfiguration] = None
) -> Tuple[np.ndarray, SolveTrace]:
    """Minimize Phi~ from y = 0 with damped Newton or path-following; return (x(y), trace)."""
    solver = MethodType(solver)
    config = config or SolverConfiguration(quad_finish_tol=INNER_TOL)
    objective = inst.dual_objective()
    y0 = np.zeros(inst.A.shape[0])
    try:
        if solver in (MethodType.FEAS_DNM, MethodType.DNM):
            y, trace = dnm_solve(objective, y0, config)
        elif solver in (MethodType.FEAS_PFS, MethodType.PFS):
            y, report = pfs_solve(objective, y0, config=config)
            trace = report.trace
        else:
            raise ValueError(f"feasibility_via_dual supports damped Newton and PFS, not {solver.value}")
    except (DomainViolationError, NotPositiveDefiniteError, CenteringLostError) as exc:
        return inst.primal_point(y0), _failed_trace(solver.value, exc)
    trace.method = solver.value
    x = inst.primal_point(y)
    if trace.status == "converged" and inst.residual(x) > FEASIBILITY_TOL * max(1.0, np.linalg.norm(inst.b)):
        trace.message = f"constraint residual {inst.residual(x):.3e} above tolerance"
        logger.warning(trace.message)
    return x, trace


def _constrained_minimize(inst: FeasibilityInstance, z, tol: float, max_iters: int = 200) -> Tuple[np.ndarray, int, float]:
    """argmin {Phi(z) : <b, z> fixed} by damped Newton on the affine slice through z.

    Returns (z, steps, multiplier) where grad Phi(z) ~ multiplier * b.
    """
    b = inst.b
    for step in range(max_iters + 1):
        result = inst.phi.evaluate(z)
        geometry = LocalGeometry(result.hessian)
        multiplier = optimal_shift(geometry, result.gradient, b)
        g = result.gradient - multiplier * b
        direction = geometry.solve_direction(g)
        lam = math.sqrt(max(float(g @ direction), 0.0))
        if lam <= tol:
            return z, step, multiplier
        z = z - (direction / (1.0 + lam) if lam > 0.25 else direction)
    raise CenteringLostError(lam, tol, "dual_pathfollow_exact inner solve")


def dual_pathfollow_exact(
    inst: FeasibilityInstance, gamma: float = BARRIER_PC_CONSTANTS.gamma, config: Optional[SolverConfiguration] = None
) -> Tuple[np.ndarray, SolveTrace]:
    """Follow y_sigma = argmin {Phi(y) : <b, y> = sigma} from sigma = 0 with sigma+ = sigma + gamma ||b||*_y.

    On the path grad Phi(y_sigma) = alpha_sigma b with alpha increasing in
    sigma; alpha reaches 1 exactly at sigma* = <b, y*>. The loop stops at the
    first alpha >= 1 and a final Newton polish on Phi~ lands on y*.
    """
    config = config or SolverConfiguration()
    trace = SolveTrace(method=MethodType.FEAS_DUAL_PF.value)
    clock = time.perf_counter()
    b = inst.b
    y = np.zeros(b.size)
    if np.linalg.norm(b) == 0:
        trace.add(value=0.0, lam=0.0, t=0.0, stage="final")
        return inst.primal_point(y), trace
    sigma, alpha = 0.0, 0.0
    try:
        while alpha < 1.0:
            if len(trace.records) >= config.max_iters:
                trace.status = "max_iters"
                break
            if config.expired(clock):
                trace.status = "timeout"
                break
            geometry = LocalGeometry(inst.phi.hessian(y))
            hb = geometry.solve_direction(b)
            b_norm = math.sqrt(float(b @ hb))
            sigma_next = sigma + gamma * b_norm
            # move onto the slice <b, z> = sigma_next along [Hess]^{-1} b
            z = y + (sigma_next - float(b @ y)) / (b_norm ** 2) * hb
            y, inner, alpha = _constrained_minimize(inst, z, INNER_TOL)
            sigma = sigma_next
            trace.add(value=inst.phi.value(y) - float(b @ y), lam=abs(1.0 - alpha), t=sigma,
                      residual=alpha, tries=inner, stage="path", wall_time=time.perf_counter() - clock)
            logger.debug("dual-pf sigma=%.6e alpha=%.6f inner=%d", sigma, alpha, inner)
        objective = inst.dual_objective()
        for _ in range(100):
            local = objective.local(y)
            if local.lam <= INNER_TOL:
                break
            y = y - (local.newton_direction / (1.0 + local.lam) if local.lam > 0.25 else local.newton_direction)
            trace.add(value=local.value, lam=local.lam, t=float(b @ y), stage="finish",
                      wall_time=time.perf_counter() - clock)
    except (DomainViolationError, NotPositiveDefiniteError, CenteringLostError) as exc:
        trace.status = "failed"
        trace.message = str(exc)
        logger.warning("dual path-following failed: %s", exc)
        return inst.primal_point(y), trace
    trace.add(value=inst.dual_objective().value(y), lam=0.0, t=float(b @ y), stage="final",
              wall_time=time.perf_counter() - clock)
    return inst.primal_point(y), trace


def path_iterations(trace: SolveTrace) -> int:
    """Path-phase iterations of a trace (all steps for damped Newton)."""
    path = [r for r in trace.records if r.stage == "path"]
    return len(path) if path else trace.iterations


## Depth and bounds

def _too_shallow(inst: FeasibilityInstance, b, floor: float, max_iters: int = 500) -> bool:
    """True if Q cap {A x = b} is empty or shallower than the depth matching `floor`."""
    candidate = FeasibilityInstance(barrier=inst.barrier, A=inst.A, b=b)
    objective = candidate.dual_objective()
    y = np.zeros(b.size)
    try:
        for _ in range(max_iters):
            local = objective.local(y)
            if local.value < floor:
                return True
            if local.lam <= FEASIBILITY_TOL:
                return False
            y = y - local.newton_direction / (1.0 + local.lam)
    except (DomainViolationError, NotPositiveDefiniteError):
        return True
    return True


def feasibility_depth(inst: FeasibilityInstance, resolution: float = 1e-6) -> float:
    """eps = max {delta : (1 - delta) Q cap {A x = b} nonempty}, by bisection.

    (1 - delta) Q meets {A x = b} iff Q meets {A x = b/(1 - delta)}. The inner
    check declares a slice too shallow once Phi~ drops below -nu ln(1/resolution).
    """
    floor = -inst.nu * math.log(1.0 / resolution)
    if _too_shallow(inst, inst.b, floor):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _too_shallow(inst, inst.b / (1.0 - mid), floor):
            hi = mid
        else:
            lo = mid
    return lo


def feasibility_bound_check(inst: FeasibilityInstance, x_star, eps: Optional[float] = None, tol: float = 1e-6) -> BoundCheck:
    """1/eps >= 1 + <grad F(x*), x*>/nu and F(x*) - F(0) <= nu ln(1/eps)."""
    eps = eps if eps is not None else inst.eps_depth
    check = BoundCheck(name="feasibility_depth_bounds")
    if eps is None:
        return check
    local = inst.barrier.local(x_star)
    check.record(1.0 + float(local.gradient @ local.x) / inst.nu, 1.0 / eps, tol, bound=1.0)
    check.record(local.value - inst.barrier.value(np.zeros(inst.barrier.dim)), inst.nu * math.log(1.0 / eps),
                 tol, bound=2.0)
    return check


def sigma_star_bound_check(inst: FeasibilityInstance, y_star, eps: Optional[float] = None, tol: float = 1e-6) -> BoundCheck:
    """sigma* = <b, y*> <= nu (1/eps - 1)."""
    eps = eps if eps is not None else inst.eps_depth
    check = BoundCheck(name="sigma_star_bound")
    if eps is not None:
        check.record(float(inst.b @ y_star), inst.nu * (1.0 / eps - 1.0), tol)
    return check


## Strategy comparison

def predicted_orders(nu: float, eps: float) -> dict:
    log_inv = math.log(1.0 / eps)
    return {
        MethodType.FEAS_DNM.value: nu * log_inv,
        MethodType.FEAS_PFS.value: math.sqrt(nu * log_inv),
        MethodType.FEAS_DUAL_PF.value: math.sqrt(nu) * math.log(nu / eps),
    }


def strategy_comparison(inst: FeasibilityInstance, config: Optional[SolverConfiguration] = None) -> List[StrategyRow]:
    """Run the three dual strategies on one instance and tabulate them against their predicted orders."""
    eps = inst.eps_depth if inst.eps_depth is not None else feasibility_depth(inst)
    orders = predicted_orders(inst.nu, max(eps, 1e-300))
    rows = []
    runs = (
        (MethodType.FEAS_DNM, lambda: feasibility_via_dual(inst, MethodType.FEAS_DNM, config)),
        (MethodType.FEAS_PFS, lambda: feasibility_via_dual(inst, MethodType.FEAS_PFS, config)),
        (MethodType.FEAS_DUAL_PF, lambda: dual_pathfollow_exact(inst, config=config)),
    )
    for method, run in runs:
        x, trace = run()
        rows.append(StrategyRow(strategy=method.value, iterations=path_iterations(trace),
                                predicted_order=orders[method.value], residual=inst.residual(x),
                                status=trace.status))
    return rows


## LP reduction

def gauss_jordan_normal_form(A, b, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Row operations M and a column permutation with M A[:, perm] = (I_m, B).

    Returns (R, Mb, M, perm) with R = (I_m, B). Dependent rows raise RankDeficientError.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    R = A.copy()
    M = np.eye(m)
    perm = np.arange(n)
    rows = np.arange(m)
    scale = max(float(np.max(np.abs(A))) if A.size else 1.0, 1.0)
    for i in range(m):
        block = np.abs(R[i:, i:])
        r, col = np.unravel_index(np.argmax(block), block.shape)
        if block[r, col] <= tol * scale:
            raise RankDeficientError(sorted(int(k) for k in rows[i:]))
        r, col = r + i, col + i
        R[[i, r]] = R[[r, i]]
        M[[i, r]] = M[[r, i]]
        rows[[i, r]] = rows[[r, i]]
        R[:, [i, col]] = R[:, [col, i]]
        perm[[i, col]] = perm[[col, i]]
        pivot = R[i, i]
        R[i] /= pivot
        M[i] /= pivot
        for k in range(m):
            if k != i and R[k, i] != 0.0:
                factor = R[k, i]
                R[k] -= factor * R[i]
                M[k] -= factor * M[i]
    R[:, :m] = np.eye(m)
    return R, M @ np.asarray(b, dtype=float), M, perm


@dataclass(kw_only=True)
class SelfDualEmbedding:
    """min <c, x> s.t. A x = b, x >= 0 as Q z = 0, z = (x, s, tau) >= 0.

    Rows of Q, in the permuted coordinates where A = (I_m, B):
      gap:    <c, x> + <b, s_1> - tau <b, c_1> = 0
      primal: A x - tau b = 0
      dual:   s_2 - B^T s_1 - tau (c_2 - B^T c_1) = 0
    Fixing sum(z) = 1 and eliminating tau gives the reduced system
    (Q_bar - q_bar e^T) z_bar = -q_bar over {z_bar >= 0, sum(z_bar) <= 1}.
    """

    Q_matrix: np.ndarray
    reduced_matrix: np.ndarray
    reduced_rhs: np.ndarray
    M: np.ndarray
    perm: np.ndarray
    n: int
    m: int
    c_perm: np.ndarray

    @property
    def dimension(self) -> int:
        return 2 * self.n

    def relaxed_rhs(self, mu: float) -> np.ndarray:
        """Right-hand side with the gap row set to mu instead of 0."""
        rhs = self.reduced_rhs.copy()
        rhs[0] += mu
        return rhs

    def feasibility_instance(self, mu: float = 0.0) -> FeasibilityInstance:
        """Feasibility problem over the simplex, shifted so its analytic center is the origin."""
        barrier = SimplexBarrier(self.dimension)
        matrix, rhs = self.reduced_matrix, self.relaxed_rhs(mu)
        keep = independent_rows(matrix)
        matrix, rhs = matrix[keep], rhs[keep]
        return FeasibilityInstance(barrier=barrier, A=matrix, b=rhs - matrix @ barrier.center)

    def recover(self, z_bar) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
        """Map z_bar back to (x, y, s, tau) of the original LP."""
        z_bar = np.asarray(z_bar, dtype=float)
        n, m = self.n, self.m
        tau = 1.0 - float(np.sum(z_bar))
        if tau <= 0:
            raise DomainViolationError("embedding solution has tau <= 0; no finite LP optimum recovered")
        x_perm = z_bar[:n] / tau
        s_perm = z_bar[n:] / tau
        y_perm = self.c_perm[:m] - s_perm[:m]
        x = np.empty(n)
        s = np.empty(n)
        x[self.perm] = x_perm
        s[self.perm] = s_perm
        return x, self.M.T @ y_perm, s, tau


def independent_rows(matrix, tol: Optional[float] = None) -> np.ndarray:
    """Indices of a maximal set of linearly independent rows (pivoted QR of the transpose)."""
    matrix = np.atleast_2d(matrix)
    if matrix.shape[0] == 0:
        return np.arange(0)
    _, r, pivots = qr(matrix.T, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return np.arange(0)
    tol = tol if tol is not None else max(matrix.shape) * np.finfo(float).eps * 1e3
    rank = int(np.sum(diag > tol * diag[0]))
    return np.sort(pivots[:rank])


def lp_to_feasibility(A, b, c) -> SelfDualEmbedding:
    """Homogeneous self-dual embedding of min <c, x> s.t. A x = b, x >= 0."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise DimensionMismatchError((m, n), (b.shape, c.shape), "LP data")
    R, b_red, M, perm = gauss_jordan_normal_form(A, b)
    B = R[:, m:]
    c_perm = c[perm]
    c1, c2 = c_perm[:m], c_perm[m:]

    Q = np.zeros((n + 1, 2 * n + 1))
    Q[0, :n] = c_perm
    Q[0, n:n + m] = b_red
    Q[0, -1] = -float(b_red @ c1)
    Q[1:m + 1, :n] = R
    Q[1:m + 1, -1] = -b_red
    Q[m + 1:, n:n + m] = -B.T
    Q[m + 1:, n + m:2 * n] = np.eye(n - m)
    Q[m + 1:, -1] = -(c2 - B.T @ c1)

    q_bar = Q[:, -1]
    reduced = Q[:, :-1] - np.outer(q_bar, np.ones(2 * n))
    logger.debug("self-dual embedding: Q %s, reduced dimension %d", Q.shape, 2 * n)
    return SelfDualEmbedding(Q_matrix=Q, reduced_matrix=reduced, reduced_rhs=-q_bar, M=M, perm=perm,
                             n=n, m=m, c_perm=c_perm)


def solve_lp_via_embedding(
    A, b, c, tol: float = 1e-6, mu0: float = 1e-2, shrink: float = 0.1, max_rounds: int = 30,
    config: Optional[SolverConfiguration] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
    """Solve an LP through its embedding with the gap row relaxed to mu > 0.

    Each round minimizes the simplex barrier over the relaxed slice (warm
    started from the previous dual point) and recovers (x, y, s) with duality
    gap mu/tau. mu shrinks geometrically until the gap is <= tol.
    """
    embedding = lp_to_feasibility(A, b, c)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    config = config or SolverConfiguration(quad_finish_tol=INNER_TOL)
    mu = mu0
    y_dual = None
    info = {"rounds": 0, "iterations": 0, "gap": math.inf, "mu": mu}
    x = y = s = None
    for round_ in range(1, max_rounds + 1):
        inst = embedding.feasibility_instance(mu)
        start = np.zeros(inst.A.shape[0]) if y_dual is None or y_dual.size != inst.A.shape[0] else y_dual
        y_dual, trace = dnm_solve(inst.dual_objective(), start, config)
        if trace.status != "converged":
            raise ScNewtonError(f"embedding round {round_} ended with status {trace.status}")
        z_bar = inst.primal_point(y_dual) + inst.barrier.center
        x, y, s, tau = embedding.recover(z_bar)
        gap = float(c @ x - b @ y)
        info.update(rounds=round_, iterations=info["iterations"] + trace.iterations, gap=gap, mu=mu, tau=tau,
                    primal_residual=float(np.linalg.norm(A @ x - b)),
                    dual_residual=float(np.linalg.norm(s + A.T @ y - c)))
        logger.debug("embedding round %d: mu=%.1e tau=%.4f gap=%.3e", round_, mu, tau, gap)
        if abs(gap) <= tol:
            break
        mu *= shrink
    logger.info("LP via embedding: %d rounds, %d Newton steps, gap %.3e", info["rounds"], info["iterations"],
                info["gap"])
    return x, y, s, info
