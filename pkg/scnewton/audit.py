"""
Numerical audit of oracles and solver traces.

Every inequality the solvers rely on is checked here on sampled points, with
finite differences standing in for the derivatives an oracle does not expose.
Each check returns a `BoundCheck`; `audit_instance` bundles them into
`InvariantReport`s for the CLI (`scnewton audit`, `--verify`).

## Sampling

Points come from a random walk inside Dikin ellipsoids: from x the walk moves
to x + s h with ||h||_x = 1 and s < 1/M_f, which never leaves the domain of a
self-concordant function. Pairs (x, y) are drawn the same way with a chosen
range of M_f ||y - x||_x.

## Important Notes

**Tolerances**: finite-difference checks are relative to the local norm of
the tested quantity; the self-concordance check allows 5e-4 relative slack, the
trilinear check 1e-2.

**Declared constants**: a failing self-concordance check means the declared M_f
is wrong for the oracle, not that the oracle is broken.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .configuration import MethodType
from .cubic import stage_halving_check, stage_length_check
from .errors import UnknownProblemError
from .linops import compatibility_eigenvalues
from .newton import decrease_check, quadratic_contraction_check, superlinear_bound_check
from .oracles import AffineRestrictedOracle, BarrierOracle, ConjugateOracle, ScOracle
from .pathfollow import adaptive_step_accounting, path_decrease_check, pfs_superlinear_check
from .predcorr import pc_decrease_check
from .scalar import omega, omega_star, validate_constants
from .state import (
    BARRIER_PC_CONSTANTS,
    PCPFS_CONSTANTS,
    PFS_CONSTANTS,
    BoundCheck,
    InvariantReport,
    PfsReport,
    RestartPlan,
    SolveTrace,
)

logger = logging.getLogger(__name__)

GRADIENT_REL_TOL = 1e-5
HESSIAN_REL_TOL = 1e-4
SELF_CONCORDANCE_REL_TOL = 5e-4
TRILINEAR_REL_TOL = 1e-2
BOUND_TOL = 1e-9


def _unit_local(local, rng: np.random.Generator) -> np.ndarray:
    """Random direction h with ||h||_x = 1."""
    v = rng.standard_normal(local.x.size)
    return v / local.geometry.primal_norm(v)


def _radius(M_f: float, fraction: float) -> float:
    return fraction / M_f if M_f > 0 else fraction


def sample_points(oracle: ScOracle, start, rng: np.random.Generator, count: int,
                  fraction: float = 0.8) -> List[np.ndarray]:
    """Random walk of `count` points through Dikin ellipsoids starting at `start`."""
    x = np.atleast_1d(np.asarray(start, dtype=float))
    points = [x]
    while len(points) < count:
        local = oracle.local(points[-1])
        h = _unit_local(local, rng)
        y = local.x + rng.uniform(0.0, _radius(oracle.M_f, fraction)) * h
        points.append(y if oracle.in_domain(y) else local.x)
    return points


def sample_pairs(oracle: ScOracle, points: Iterable[np.ndarray], rng: np.random.Generator,
                 max_fraction: float = 0.9) -> List[Tuple[np.ndarray, np.ndarray, float]]:
    """(x, y, ||y - x||_x) with M_f ||y - x||_x drawn uniformly in (0, max_fraction)."""
    pairs = []
    for x in points:
        local = oracle.local(x)
        r = rng.uniform(0.0, _radius(oracle.M_f, max_fraction))
        y = x + r * _unit_local(local, rng)
        if oracle.in_domain(y):
            pairs.append((x, y, r))
    return pairs


def _scaled(fn, M_f: float, r: float) -> float:
    """fn(M_f r)/M_f^2, with the quadratic limit r^2/2 when M_f = 0."""
    return fn(M_f * r) / M_f ** 2 if M_f > 0 else 0.5 * r * r


## Finite-difference checks

def gradient_fd_check(oracle: ScOracle, points: Sequence[np.ndarray], rng: np.random.Generator,
                      rel_tol: float = GRADIENT_REL_TOL) -> BoundCheck:
    """<grad f(x), h> against central differences of f along unit local directions."""
    check = BoundCheck(name="gradient_fd")
    eps = 1e-5 / max(oracle.M_f, 1.0)
    for x in points:
        local = oracle.local(x)
        h = _unit_local(local, rng)
        fd = (oracle.value(x + eps * h) - oracle.value(x - eps * h)) / (2.0 * eps)
        exact = float(local.gradient @ h)
        check.record(abs(fd - exact), rel_tol * max(abs(exact), 1.0), 0.0)
    return check


def hessian_fd_check(oracle: ScOracle, points: Sequence[np.ndarray], rng: np.random.Generator,
                     rel_tol: float = HESSIAN_REL_TOL) -> BoundCheck:
    """H(x) h against central differences of the gradient, compared in ||.||*_x."""
    check = BoundCheck(name="hessian_fd")
    eps = 1e-5 / max(oracle.M_f, 1.0)
    for x in points:
        local = oracle.local(x)
        h = _unit_local(local, rng)
        fd = (oracle.gradient(x + eps * h) - oracle.gradient(x - eps * h)) / (2.0 * eps)
        error = local.geometry.dual_norm(fd - local.hessian @ h)
        check.record(error, rel_tol, 0.0)
    return check


def _third_derivative(oracle: ScOracle, x, h1, h2, h3, eps: float) -> float:
    """D^3 f(x)[h1, h2, h3] by central differences of the Hessian along h3."""
    forward = oracle.hessian(x + eps * h3)
    backward = oracle.hessian(x - eps * h3)
    return float(h1 @ (forward - backward) @ h2) / (2.0 * eps)


def self_concordance_check(oracle: ScOracle, points: Sequence[np.ndarray], rng: np.random.Generator,
                           rel_tol: float = SELF_CONCORDANCE_REL_TOL) -> BoundCheck:
    """|D^3 f(x)[h]^3| <= 2 M_f <H h, h>^{3/2} for unit local directions."""
    check = BoundCheck(name="self_concordance")
    eps = 1e-4 / max(oracle.M_f, 1.0)
    for x in points:
        h = _unit_local(oracle.local(x), rng)
        d3 = _third_derivative(oracle, x, h, h, h, eps)
        bound = 2.0 * oracle.M_f
        check.record(abs(d3), bound, rel_tol * bound + 1e-8)
    return check


def trilinear_check(oracle: ScOracle, points: Sequence[np.ndarray], rng: np.random.Generator,
                    triples: int = 3, rel_tol: float = TRILINEAR_REL_TOL) -> BoundCheck:
    """|D^3 f(x)[h1, h2, h3]| <= 2 M_f ||h1||_x ||h2||_x ||h3||_x."""
    check = BoundCheck(name="trilinear")
    eps = 1e-4 / max(oracle.M_f, 1.0)
    for x in points:
        local = oracle.local(x)
        for _ in range(triples):
            h1, h2, h3 = (_unit_local(local, rng) for _ in range(3))
            d3 = _third_derivative(oracle, x, h1, h2, h3, eps)
            bound = 2.0 * oracle.M_f
            check.record(abs(d3), bound, rel_tol * bound + 1e-8)
    return check


## Inequalities of self-concordant functions

def compatibility_check(oracle: ScOracle, pairs, tol: float = 1e-8) -> BoundCheck:
    """(1 - r)^2 H(x) <= H(y) <= H(x)/(1 - r)^2 with r = M_f ||y - x||_x < 1."""
    check = BoundCheck(name="hessian_compatibility")
    M = oracle.M_f
    for x, y, dist in pairs:
        r = M * dist
        if r >= 1.0:
            continue
        eig = compatibility_eigenvalues(oracle.hessian(x), oracle.hessian(y))
        lower, upper = (1.0 - r) ** 2, 1.0 / (1.0 - r) ** 2
        check.record(float(eig.max()), upper, tol * upper)
        check.record(lower, float(eig.min()), tol)
    return check


def norm_compatibility_check(oracle: ScOracle, pairs, tol: float = 1e-9) -> BoundCheck:
    """||y - x||_y <= ||y - x||_x/(1 - M_f ||y - x||_x) when M_f ||y - x||_x <= 1/2."""
    check = BoundCheck(name="norm_compatibility")
    for x, y, dist in pairs:
        if oracle.M_f * dist > 0.5:
            continue
        at_y = oracle.geometry(y).primal_norm(y - x)
        check.record(at_y, dist / (1.0 - oracle.M_f * dist), tol * max(dist, 1.0))
    return check


def function_bounds_check(oracle: ScOracle, pairs, tol: float = BOUND_TOL) -> BoundCheck:
    """Lower bound with omega everywhere; upper bound with omega_* while M_f r < 1."""
    check = BoundCheck(name="function_bounds")
    M = oracle.M_f
    for x, y, dist in pairs:
        fx, gx, _ = oracle.evaluate(x)
        fy = oracle.value(y)
        linear = fx + float(gx @ (y - x))
        slack = tol * (1.0 + abs(fx))
        check.record(linear + _scaled(omega, M, dist), fy, slack)
        if M * dist < 1.0:
            check.record(fy, linear + _scaled(omega_star, M, dist), slack)
    return check


def gradient_difference_check(oracle: ScOracle, pairs, tol: float = BOUND_TOL) -> BoundCheck:
    """||grad f(y) - grad f(x)||*_x <= r/(1 - M_f r), r = ||y - x||_x < 1/M_f."""
    check = BoundCheck(name="gradient_difference")
    M = oracle.M_f
    for x, y, dist in pairs:
        if M * dist >= 1.0:
            continue
        local = oracle.local(x)
        diff = local.geometry.dual_norm(oracle.gradient(y) - local.gradient)
        check.record(diff, dist / (1.0 - M * dist), tol * max(dist, 1.0))
    return check


def gap_bound_check(oracle: ScOracle, points, f_star: float, tol: float = BOUND_TOL) -> BoundCheck:
    """f(x) - f* <= omega_*(M_f lambda)/M_f^2 where M_f lambda < 1."""
    check = BoundCheck(name="gap_bound")
    M = oracle.M_f
    for x in points:
        local = oracle.local(x)
        if M * local.lam >= 1.0:
            continue
        check.record(local.value - f_star, _scaled(omega_star, M, local.lam), tol * (1.0 + abs(f_star)))
    return check


def distance_bound_check(oracle: ScOracle, points, x_star, tol: float = 1e-8) -> BoundCheck:
    """||x - x*||_x <= lambda/(1 - M_f lambda) where M_f lambda < 1."""
    check = BoundCheck(name="distance_bound")
    x_star = np.asarray(x_star, dtype=float)
    M = oracle.M_f
    for x in points:
        local = oracle.local(x)
        if M * local.lam >= 1.0:
            continue
        dist = local.geometry.primal_norm(x - x_star)
        check.record(dist, local.lam / (1.0 - M * local.lam), tol * max(dist, 1.0))
    return check


## Barriers

def barrier_gradient_check(barrier: BarrierOracle, points, tol: float = 1e-8) -> BoundCheck:
    """<[H]^{-1} grad F, grad F> <= nu."""
    check = BoundCheck(name="barrier_gradient")
    for x in points:
        check.record(barrier.local(x).lam ** 2, barrier.nu, tol * barrier.nu)
    return check


def barrier_direction_check(barrier: BarrierOracle, points, targets, tol: float = 1e-8) -> BoundCheck:
    """<grad F(x), y - x> <= nu for x interior and y in the domain."""
    check = BoundCheck(name="barrier_direction")
    for x in points:
        g = barrier.gradient(x)
        for y in targets:
            check.record(float(g @ (np.asarray(y) - x)), barrier.nu, tol * barrier.nu)
    return check


def conjugate_barrier_check(barrier: BarrierOracle, covectors, tol: float = 1e-8) -> BoundCheck:
    """<u, Hess F_*(u) u> <= nu on the domain of the conjugate."""
    check = BoundCheck(name="conjugate_barrier")
    conjugate = ConjugateOracle(barrier)
    for u in covectors:
        result, _, _ = conjugate.evaluate_at(u)
        check.record(float(u @ result.hessian @ u), barrier.nu, tol * barrier.nu)
    return check


## Suites

def audit_oracle(oracle: ScOracle, start, rng: np.random.Generator, cases: int = 200,
                 f_star: Optional[float] = None, x_star=None) -> List[BoundCheck]:
    """Run every oracle-level check on `cases` sampled points."""
    points = sample_points(oracle, start, rng, cases)
    pairs = sample_pairs(oracle, points, rng)
    checks = [
        gradient_fd_check(oracle, points, rng),
        hessian_fd_check(oracle, points, rng),
        self_concordance_check(oracle, points, rng),
        trilinear_check(oracle, points[: max(cases // 10, 3)], rng),
        compatibility_check(oracle, pairs),
        norm_compatibility_check(oracle, pairs),
        function_bounds_check(oracle, pairs),
        gradient_difference_check(oracle, pairs),
    ]
    if x_star is not None and f_star is not None:
        near = sample_points(oracle, x_star, rng, cases, fraction=0.3)
        checks.append(gap_bound_check(oracle, near, f_star))
        checks.append(distance_bound_check(oracle, near, x_star))
    return checks


def audit_barrier(barrier: BarrierOracle, rng: np.random.Generator, cases: int = 200) -> List[BoundCheck]:
    """Barrier inequalities plus the gradient/Hessian identities of its conjugate."""
    points = sample_points(barrier, barrier.start_point(), rng, cases)
    covectors = [barrier.gradient(x) for x in points]
    conjugate = ConjugateOracle(barrier)
    dual_checks = [gradient_fd_check(conjugate, covectors[: cases // 4 or 1], rng),
                   hessian_fd_check(conjugate, covectors[: cases // 4 or 1], rng)]
    for check in dual_checks:
        check.name = f"conjugate_{check.name}"
    return [
        barrier_gradient_check(barrier, points),
        barrier_direction_check(barrier, points[: max(cases // 10, 2)], points[-max(cases // 10, 2):]),
        conjugate_barrier_check(barrier, [scale * rng.standard_normal(barrier.dim)
                                          for scale in rng.uniform(0.0, 5.0, cases // 4 or 1)]),
        *dual_checks,
    ]


def audit_restriction(oracle: ScOracle, A, x_feasible, rng: np.random.Generator, cases: int = 50) -> List[BoundCheck]:
    """Chain-rule consistency of the oracle restricted to {A x = A x_feasible}."""
    restricted = AffineRestrictedOracle(oracle, A=A, x0=x_feasible)
    points = sample_points(restricted, np.zeros(restricted.dim), rng, cases)
    checks = [gradient_fd_check(restricted, points, rng), hessian_fd_check(restricted, points, rng)]
    for check in checks:
        check.name = f"restricted_{check.name}"
    return checks


def constants_reports() -> List[InvariantReport]:
    """The three default (beta, gamma) sets must validate."""
    reports = []
    for consts in (PFS_CONSTANTS, PCPFS_CONSTANTS, BARRIER_PC_CONSTANTS):
        validation = validate_constants(consts)
        reports.append(InvariantReport(name=f"constants_{consts.variant.value}",
                                       checked=len(validation.conditions),
                                       violations=len(validation.violated)))
    return reports


def audit_instance(instance, cases: int = 200, seed: int = 0) -> List[InvariantReport]:
    """Oracle, barrier and restriction audits of one zoo instance."""
    rng = np.random.default_rng(seed)
    checks: List[BoundCheck] = []
    try:
        oracle = instance.oracle()
    except UnknownProblemError:
        oracle = None
    if oracle is not None:
        checks += audit_oracle(oracle, instance.start, rng, cases, instance.f_star, instance.array("x_star"))
    if instance.nu is not None:
        barrier = instance.barrier()
        checks += audit_barrier(barrier, rng, cases)
        x_star = instance.array("x_star")
        A = instance.array("A")
        if A is not None and x_star is not None and barrier.in_domain(x_star):
            checks += audit_restriction(barrier, A, x_star, rng, max(cases // 4, 10))
    logger.info("audit %s: %d checks", instance.name, len(checks))
    return [InvariantReport.from_check(c) for c in checks]


## Trace checks

def trace_checks(
    method: MethodType,
    trace: SolveTrace,
    M_f: float,
    f_star: Optional[float] = None,
    report: Optional[PfsReport] = None,
    plan: Optional[RestartPlan] = None,
) -> List[BoundCheck]:
    """Per-iteration guarantees of the method that produced `trace`."""
    checks: List[BoundCheck] = []
    if method is MethodType.DNM:
        checks += [decrease_check(trace, M_f), quadratic_contraction_check(trace, M_f)]
        if f_star is not None:
            checks.append(superlinear_bound_check(trace, M_f, f_star))
    elif report is not None and method in (MethodType.PFS, MethodType.ADAPTIVE_PFS):
        beta, gamma = report.constants.beta, report.constants.gamma
        checks.append(path_decrease_check(report, (gamma - 2.0 * beta) / (2.0 * M_f)))
        if f_star is not None:
            checks.append(pfs_superlinear_check(report, report.f0 - f_star))
    elif report is not None and method in (MethodType.PCPFS, MethodType.ADAPTIVE_PCPFS):
        checks.append(pc_decrease_check(report))
    if report is not None:
        if report.rate_check is not None:
            checks.append(report.rate_check)
        if method in (MethodType.ADAPTIVE_PFS, MethodType.ADAPTIVE_PCPFS):
            checks.append(adaptive_step_accounting(report))
    if method is MethodType.MULTISTAGE_CRNM and plan is not None:
        checks.append(stage_length_check(plan))
        if f_star is not None:
            checks.append(stage_halving_check(trace, f_star))
    return checks


def summarize(checks: Iterable[BoundCheck]) -> List[InvariantReport]:
    return [InvariantReport.from_check(c) for c in checks]
