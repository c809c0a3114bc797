"""A priori iteration bounds and the quantities they depend on."""

import logging
import math
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .cubic import DEFAULT_RATE_CONSTANT, multistage_bounds, restart_plan
from .oracles import ScOracle
from .scalar import kappa, omega, omega_inverse
from .state import BARRIER_PC_CONSTANTS, PCPFS_CONSTANTS, PFS_CONSTANTS, ComplexityEstimate, PathConstants

logger = logging.getLogger(__name__)

# Level sets wider than this along a direction count as unbounded
UNBOUNDED_STEP = 1e8


def dnm_bound(delta: float) -> float:
    """Damped Newton steps to reach the quadratic region: delta/omega(1/2)."""
    return max(delta, 0.0) / omega(0.5)


def _path_log_term(delta: float, M_f: float, D: float, beta: float) -> float:
    if delta <= 0 or D <= 0:
        return 0.0
    argument = M_f * D * omega_inverse(delta) / omega((1.0 - beta) * (1.0 - 2.0 * beta) / 2.0)
    return max(math.log(argument), 0.0)


def pfs_bound(delta: float, M_f: float, D: float, consts: PathConstants = PFS_CONSTANTS) -> float:
    """[2 delta/(gamma (gamma - 2 beta)) ln(M_f D omega^{-1}(delta)/omega((1-beta)(1-2beta)/2))]^{1/2}."""
    beta, gamma = consts.beta, consts.gamma
    return math.sqrt(2.0 * delta / (gamma * (gamma - 2.0 * beta)) * _path_log_term(delta, M_f, D, beta))


def pcpfs_bound(delta: float, M_f: float, D: float, consts: PathConstants = PCPFS_CONSTANTS) -> float:
    """[delta/(gamma kappa) ln(...)]^{1/2}, the predictor-corrector counterpart of pfs_bound."""
    beta, gamma = consts.beta, consts.gamma
    return math.sqrt(delta / (gamma * kappa(beta, gamma)) * _path_log_term(delta, M_f, D, beta))


def barrier_bound(nu: float, ratio: float, gamma: float = BARRIER_PC_CONSTANTS.gamma) -> float:
    """Leading term (sqrt(nu)/gamma) ln(ratio) of the barrier schemes; ratio = nu ||c||*/eps."""
    return math.sqrt(nu) / gamma * max(math.log(ratio), 0.0) if ratio > 0 else 0.0


def _boundary_step(oracle: ScOracle, x0: np.ndarray, f0: float, h: np.ndarray) -> float:
    """Largest s >= 0 with f(x0 + s h) <= f(x0), by bisection on the sublevel predicate."""

    def inside(s: float) -> bool:
        y = x0 + s * h
        return oracle.in_domain(y) and oracle.value(y) <= f0

    hi = 1.0
    while inside(hi):
        hi *= 2.0
        if hi > UNBOUNDED_STEP:
            return math.inf
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


def level_set_diameter(oracle: ScOracle, x0, n_dirs: int = 64, seed: int = 0) -> float:
    """Sampled D = max ||x - y||_{x0} over the sublevel set {f <= f(x0)}.

    Boundary points are found along random directions of unit x0-norm; the
    estimate is the largest pairwise distance between them (and x0).
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    local = oracle.local(x0)
    factor = local.geometry.factor
    rng = np.random.default_rng(seed)
    coords = [np.zeros(oracle.dim)]
    for _ in range(n_dirs):
        u = rng.standard_normal(oracle.dim)
        u /= np.linalg.norm(u)
        # ||h||_{x0} = ||L^T h|| = 1
        h = solve_triangular(factor.T, u, lower=False)
        for sign in (1.0, -1.0):
            s = _boundary_step(oracle, x0, local.value, sign * h)
            if math.isinf(s):
                logger.warning("level set looks unbounded; D = inf")
                return math.inf
            coords.append(sign * s * u)
    points = np.array(coords)
    gaps = points[:, None, :] - points[None, :, :]
    return float(np.max(np.linalg.norm(gaps, axis=-1)))


def estimate_complexity(instance, n_dirs: int = 64, eps: float = 1e-6, D: Optional[float] = None) -> ComplexityEstimate:
    """Bounds of every method on a zoo instance with known f*."""
    oracle = instance.oracle()
    M_f = oracle.M_f
    delta = instance.delta()
    estimate = ComplexityEstimate(delta=delta if delta is not None else math.nan, M_f=M_f, nu=instance.nu)
    if delta is None:
        return estimate
    if D is None and M_f > 0:
        D = level_set_diameter(oracle, instance.start, n_dirs=n_dirs, seed=instance.seed)
    estimate.D = D
    bounds = {"dnm": dnm_bound(delta)}
    if D is not None and math.isfinite(D) and M_f > 0:
        bounds["pfs"] = pfs_bound(delta, M_f, D)
        bounds["pcpfs"] = pcpfs_bound(delta, M_f, D)
    if instance.sigma_f and instance.H_f:
        gap = oracle.value(instance.start) - instance.f_star
        plan = restart_plan(2.0, DEFAULT_RATE_CONSTANT, M_f, gap)
        cubic_delta = instance.H_f ** 2 / instance.sigma_f ** 3 * gap
        stage_bounds = multistage_bounds(plan, cubic_delta)
        bounds["multistage_stages"] = stage_bounds["stages"]
        bounds["multistage_iterations"] = stage_bounds["iterations"]
    if instance.nu:
        bounds["barrier"] = barrier_bound(instance.nu, instance.nu / eps)
    estimate.bounds = bounds
    return estimate
