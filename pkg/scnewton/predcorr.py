"""
Predictor-corrector path-following.

The predictor moves along the tangent of the central path,
y = x + tau [H(x)]^{-1} c with tau = gamma/(M_f ||c||*_x), while t drops by
tau. One standard Newton step on f_{t+} from y then recenters. The local
geometry of x is reused for the predictor so each iterate costs two
factorizations.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from .configuration import SolverConfiguration
from .errors import DomainViolationError, ScalarDomainError
from .oracles import LocalModel, ScOracle
from .pathfollow import T_CLAMP, _adaptive, recenter, require_valid_constants, path_decrease_check, run_path
from .scalar import kappa
from .state import PCPFS_CONSTANTS, BoundCheck, CenteredPair, PathConstants, PfsReport, PredictorBound

logger = logging.getLogger(__name__)


def predictor_bound(lambda_before: float, tau: float, r: float, M_f: float) -> PredictorBound:
    """Bound on lambda_{f_{t - tau}}(x + tau [H]^{-1} c) given lambda_{f_t}(x) and r = ||c||*_x.

    Requires |tau| M_f r < 1.
    """
    u = abs(tau) * M_f * r
    if u >= 1.0:
        raise ScalarDomainError("tau M_f r", u, "|tau| M_f r < 1")
    ratio = u / (1.0 - u)
    bound = lambda_before * (1.0 + ratio) + (ratio ** 2 / M_f if M_f > 0 else 0.0)
    return PredictorBound(lambda_before=lambda_before, tau=tau, r=r, M_f=M_f, bound=bound)


def _pc_step(oracle: ScOracle, pair: CenteredPair, local: LocalModel, gamma: float,
             consts: PathConstants, tol: float = 1e-9) -> Tuple[CenteredPair, LocalModel]:
    c_norm = local.geometry.dual_norm(pair.c)
    if oracle.M_f <= 0 or c_norm <= 0:
        tau = pair.t
    else:
        tau = min(gamma / (oracle.M_f * c_norm), pair.t)
    t_next = pair.t - tau
    if t_next <= T_CLAMP:
        t_next, tau = 0.0, pair.t
    y = pair.x + tau * local.geometry.solve_direction(pair.c)
    if not oracle.in_domain(y):
        raise DomainViolationError("predictor left the domain", y.tolist())
    return recenter(oracle, y, oracle.local(y), pair.c, t_next, consts, tol, "pcpfs_iterate")


def pcpfs_iterate(oracle: ScOracle, pair: CenteredPair, consts: PathConstants = PCPFS_CONSTANTS) -> CenteredPair:
    """One predictor-corrector iterate from a centered pair."""
    require_valid_constants(consts)
    return _pc_step(oracle, pair, oracle.local(pair.x), consts.gamma, consts)[0]


def adaptive_pcpfs_iterate(oracle: ScOracle, pair: CenteredPair, gamma_prev: float,
                           consts: PathConstants = PCPFS_CONSTANTS) -> Tuple[CenteredPair, float, int]:
    """Adaptive predictor-corrector iterate; returns (pair, gamma_used, tries)."""
    require_valid_constants(consts)
    new_pair, _, gamma, tries = _adaptive(_pc_step, oracle, pair, oracle.local(pair.x), gamma_prev, consts)
    return new_pair, gamma, tries


def pcpfs_rate(consts: PathConstants, M_f: float):
    """t_N <= exp(-kappa gamma N^2 / (M_f^2 (f0 - f*)))."""
    k = kappa(consts.beta, consts.gamma)

    def bound(N: int, gap: float) -> float:
        if gap <= 0:
            return 0.0
        return math.exp(-k * consts.gamma * N * N / (M_f ** 2 * gap))

    return bound


def pcpfs_solve(
    oracle: ScOracle,
    x0,
    consts: PathConstants = PCPFS_CONSTANTS,
    config: Optional[SolverConfiguration] = None,
    f_star: Optional[float] = None,
    D: Optional[float] = None,
    adaptive: bool = False,
) -> Tuple[np.ndarray, PfsReport]:
    x, report = run_path(oracle, x0, consts, config, _pc_step, "adaptive-pcpfs" if adaptive else "pcpfs",
                         adaptive=adaptive, f_star=f_star, D=D, rate=pcpfs_rate(consts, oracle.M_f))
    report.kappa = kappa(consts.beta, consts.gamma)
    return x, report


def pc_decrease_check(report: PfsReport, tol: float = 1e-9) -> BoundCheck:
    """f(x_k) - f(x_{k+1}) >= (kappa/M_f) t_k ||c||*_{x_k} along the path phase."""
    k = report.kappa if report.kappa is not None else kappa(report.constants.beta, report.constants.gamma)
    return path_decrease_check(report, k / report.M_f, tol)
