"""
Problem zoo: the named test and benchmark instances.

Every instance is a `ProblemInstance` that stores only plain data (scalar
parameters and arrays) so it can be written to and read from a JSON problem
file without loss. Oracles are rebuilt from that data through a registry, so a
loaded instance evaluates exactly like the freshly generated one.

Available names:

- scalar-xlnx: f(x) = a x - ln x, M_f = 1 (a = 1 gives x* = 1, f* = 1)
- linear-log: f(x) = sum(a_i x_i - ln x_i), the n-dimensional version
- box-barrier: F(x) = -sum ln(1 - x_i^2) on [-1, 1]^n, nu = 2n, plus an
  optional linear shift <c, x> (the shifted objective has known optimum)
- simplex-barrier: -sum ln z_i - ln(1 - sum z_i), nu = n + 1, shifted so the
  analytic center sits at the origin with F(0) = 0
- simplex-entropy: sum of z ln z - ln z over the n + 1 simplex coordinates, the
  entropy-like barrier, centered the same way (nu <= 1.17 (n + 1))
- lse-reg: mu * logsumexp((A x - b)/mu) + sigma/2 ||x||^2
- logistic-l2: sum log(1 + exp(-y_i <a_i, x>)) + sigma/2 ||x||^2
- lp-random: min <c, x> s.t. A x = b, x >= 0 with primal and dual strictly
  feasible by construction and the optimum found by vertex enumeration
- box-feasibility: random A with a planted solution inside the box
- box-slab: mean(x) = 1 - eps on the box, feasibility depth exactly eps
"""

import itertools
import json
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr
from scipy.optimize import brentq, minimize
from scipy.special import expit, log_expit, logsumexp, softmax

from .cubic import LipschitzStrongOracle
from .errors import DomainViolationError, ProblemFileError, RootFindingError, UnknownProblemError
from .oracles import BOUNDARY_MARGIN, BarrierOracle, FunctionOracle, OracleValue, ScOracle, ShiftedOracle

logger = logging.getLogger(__name__)

PROBLEM_SCHEMA = "scnewton.problem/1"

# sup over (0, 1] of (z ln z + z - 1)^2 / (1 + z), attained near z = 0.08
ENTROPIC_NU_PER_TERM = 1.17


## Oracles

class LinearLogOracle(ScOracle):
    """f(x) = sum(a_i x_i - ln x_i) on the positive orthant, M_f = 1."""

    def __init__(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        super().__init__(a.size, 1.0)
        self.a = a

    def in_domain(self, x) -> bool:
        return bool(np.all(np.isfinite(x)) and np.all(x > BOUNDARY_MARGIN))

    def _evaluate(self, x):
        value = float(self.a @ x - np.sum(np.log(x)))
        return OracleValue(value, self.a - 1.0 / x, np.diag(1.0 / x ** 2))


class BoxBarrier(BarrierOracle):
    """F(x) = -sum ln(1 - x_i^2), a 2n-self-concordant barrier of [-1, 1]^n."""

    def __init__(self, n: int):
        super().__init__(n, 2.0 * n, analytic_center=np.zeros(n))

    def in_domain(self, x) -> bool:
        return bool(np.all(np.isfinite(x)) and np.all(np.abs(x) < 1.0 - BOUNDARY_MARGIN))

    def _evaluate(self, x):
        q = 1.0 - x ** 2
        value = -float(np.sum(np.log1p(-x) + np.log1p(x)))
        gradient = 2.0 * x / q
        hessian = np.diag(2.0 * (1.0 + x ** 2) / q ** 2)
        return OracleValue(value, gradient, hessian)

    def conjugate_point(self, s):
        # 2x/(1 - x^2) = s  <=>  x = s/(1 + sqrt(1 + s^2))
        s = np.asarray(s, dtype=float)
        return s / (1.0 + np.sqrt(1.0 + s * s))


class SimplexBarrier(BarrierOracle):
    """-sum ln z_i - ln(1 - sum z_i) for z = center + x, minus its value at the center.

    The domain is the interior of the simplex {z >= 0, sum z <= 1} moved so that
    its analytic center e/(n+1) is the origin, hence F(0) = 0 and grad F(0) = 0.
    """

    def __init__(self, n: int):
        super().__init__(n, n + 1.0, analytic_center=np.zeros(n))
        self.center = np.full(n, 1.0 / (n + 1.0))
        self.offset = (n + 1.0) * math.log(n + 1.0)

    def _split(self, x):
        z = self.center + x
        w = 1.0 - float(np.sum(z))
        return z, w

    def in_domain(self, x) -> bool:
        if not np.all(np.isfinite(x)):
            return False
        z, w = self._split(x)
        return bool(np.all(z > BOUNDARY_MARGIN) and w > BOUNDARY_MARGIN)

    def _evaluate(self, x):
        z, w = self._split(x)
        value = -float(np.sum(np.log(z))) - math.log(w) - self.offset
        gradient = -1.0 / z + 1.0 / w
        hessian = np.diag(1.0 / z ** 2) + np.full((self.dim, self.dim), 1.0 / w ** 2)
        return OracleValue(value, gradient, hessian)

    def conjugate_point(self, s):
        # s = -1/z + 1/w. With theta = 1/w: z_i = 1/(theta - s_i) and
        # 1/theta + sum_i 1/(theta - s_i) = 1 fixes theta > max(0, max s).
        s = np.asarray(s, dtype=float)
        lo = max(0.0, float(np.max(s)))
        gaps = lo - s

        def excess(delta: float) -> float:
            return 1.0 / (lo + delta) + float(np.sum(1.0 / (gaps + delta))) - 1.0

        hi = self.dim + 2.0
        small = 1.0
        history = []
        while excess(small) <= 0:
            small *= 0.5
            history.append((small, excess(small)))
            if small < 1e-300:
                raise RootFindingError("simplex conjugate: no bracket", history)
        if small >= hi:
            small = 0.5 * hi
        try:
            delta = brentq(excess, small, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        except (RuntimeError, ValueError) as exc:
            raise RootFindingError(f"simplex conjugate failed: {exc}", history) from exc
        z = 1.0 / (gaps + delta)
        return z - self.center


class EntropicSimplexBarrier(SimplexBarrier):
    """sum phi(z_i) + phi(1 - sum z_i) with phi(z) = z ln z - ln z, centered like `SimplexBarrier`.

    phi is self-concordant with M_f = 1 on z > 0 and phi'(z)^2 <= ENTROPIC_NU_PER_TERM * phi''(z)
    on (0, 1], so the sum is a barrier with nu = ENTROPIC_NU_PER_TERM * (n + 1).
    No closed-form conjugate point; the conjugate oracle falls back to its inner solve.
    """

    def __init__(self, n: int):
        super().__init__(n)
        self.nu = ENTROPIC_NU_PER_TERM * (n + 1.0)
        self.offset = n * math.log(n + 1.0)

    def _evaluate(self, x):
        z, w = self._split(x)
        terms = np.append(z, w)
        value = float(np.sum(terms * np.log(terms) - np.log(terms))) - self.offset
        first = np.log(terms) + 1.0 - 1.0 / terms
        second = 1.0 / terms + 1.0 / terms ** 2
        gradient = first[:-1] - first[-1]
        hessian = np.diag(second[:-1]) + np.full((self.dim, self.dim), second[-1])
        return OracleValue(value, gradient, hessian)

    def conjugate_point(self, s):
        return None


def lse_hessian_lipschitz(A, mu: float) -> float:
    """Declared Hessian Lipschitz constant 2 max_i ||a_i||^3 / mu^2."""
    norms = np.linalg.norm(np.atleast_2d(A), axis=1)
    return 2.0 * float(np.max(norms)) ** 3 / mu ** 2


def logistic_hessian_lipschitz(A) -> float:
    """sum_i ||a_i||^3 / (6 sqrt 3); |l'''| <= 1/(6 sqrt 3) for the logistic loss."""
    norms = np.linalg.norm(np.atleast_2d(A), axis=1)
    return float(np.sum(norms ** 3)) / (6.0 * math.sqrt(3.0))


def make_lse_oracle(A, b, mu: float, sigma: float) -> LipschitzStrongOracle:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)

    def value(x):
        return mu * float(logsumexp((A @ x - b) / mu)) + 0.5 * sigma * float(x @ x)

    def gradient(x):
        return A.T @ softmax((A @ x - b) / mu) + sigma * x

    def hessian(x):
        p = softmax((A @ x - b) / mu)
        weighted = A.T * p
        return (weighted @ A - np.outer(A.T @ p, A.T @ p)) / mu + sigma * np.eye(A.shape[1])

    base = FunctionOracle(A.shape[1], 0.0, value, gradient, hessian)
    return LipschitzStrongOracle(base, sigma, lse_hessian_lipschitz(A, mu))


def make_logistic_oracle(A, y, sigma: float) -> LipschitzStrongOracle:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y = np.asarray(y, dtype=float)

    def value(x):
        return -float(np.sum(log_expit(y * (A @ x)))) + 0.5 * sigma * float(x @ x)

    def gradient(x):
        margins = y * (A @ x)
        return -(A.T @ (y * expit(-margins))) + sigma * x

    def hessian(x):
        margins = y * (A @ x)
        weights = expit(margins) * expit(-margins)
        return (A.T * weights) @ A + sigma * np.eye(A.shape[1])

    base = FunctionOracle(A.shape[1], 0.0, value, gradient, hessian)
    return LipschitzStrongOracle(base, sigma, logistic_hessian_lipschitz(A))


## Instances

class ProblemInstance(BaseModel):
    """A fully specified zoo instance; arrays are stored as nested lists."""
    schema_version: str = PROBLEM_SCHEMA
    name: str = Field(description="Zoo name")
    params: Dict[str, Any] = Field(default_factory=dict, description="Scalar generation parameters")
    seed: int = 0
    dim: int
    M_f: float
    x0: List[float]
    f_star: Optional[float] = None
    x_star: Optional[List[float]] = None
    nu: Optional[float] = None
    sigma_f: Optional[float] = None
    H_f: Optional[float] = None
    eps_depth: Optional[float] = Field(default=None, description="Feasibility depth when known")
    A: Optional[List[List[float]]] = None
    b: Optional[List[float]] = None
    c: Optional[List[float]] = None
    y_star: Optional[List[float]] = None
    description: str = ""

    _oracle: Optional[ScOracle] = PrivateAttr(default=None)

    def array(self, field: str) -> Optional[np.ndarray]:
        value = getattr(self, field)
        return None if value is None else np.asarray(value, dtype=float)

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float)

    def oracle(self) -> ScOracle:
        """Objective oracle, rebuilt from the stored data on first use."""
        if self._oracle is None:
            factory = _ORACLES.get(self.name)
            if factory is None:
                raise UnknownProblemError(self.name, sorted(_ORACLES))
            self._oracle = factory(self)
        return self._oracle

    def barrier(self) -> BarrierOracle:
        """Barrier of the feasible set for barrier/feasibility instances."""
        factory = _BARRIERS.get(self.name)
        if factory is None:
            raise UnknownProblemError(f"{self.name} (no barrier)", sorted(_BARRIERS))
        return factory(self)

    def delta(self, x=None) -> Optional[float]:
        """Dimensionless gap M_f^2 (f(x) - f*) at x (default x0)."""
        if self.f_star is None:
            return None
        x = self.start if x is None else x
        return self.M_f ** 2 * max(self.oracle().value(x) - self.f_star, 0.0)


def _unit_direction(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _reference_minimum(oracle: ScOracle, x0: np.ndarray) -> Tuple[np.ndarray, float]:
    """High-accuracy minimizer by trust-region Newton plus pure Newton polish."""
    result = minimize(oracle.value, x0, jac=oracle.gradient, hess=oracle.hessian,
                      method="trust-exact", options={"gtol": 1e-13, "maxiter": 2000})
    x = np.asarray(result.x, dtype=float)
    for _ in range(5):
        _, g, h = oracle.evaluate(x)
        if np.linalg.norm(g) < 1e-15:
            break
        x = x - np.linalg.solve(h, g)
    return x, oracle.value(x)


def _scalar_xlnx(seed: int, a: float = 1.0, x0: float = 2.0) -> ProblemInstance:
    return ProblemInstance(
        name="scalar-xlnx", params={"a": a, "x0": x0}, seed=seed, dim=1, M_f=1.0,
        x0=[x0], x_star=[1.0 / a], f_star=1.0 + math.log(a),
        description="f(x) = a x - ln x",
    )


def _linear_log(seed: int, n: int = 3, scale: float = 1.0, spread: float = 10.0) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(-1.0, 1.0, n))
    x0 = spread / a * scale
    return ProblemInstance(
        name="linear-log", params={"n": n, "scale": scale, "spread": spread}, seed=seed, dim=n, M_f=1.0,
        x0=x0.tolist(), c=a.tolist(), x_star=(1.0 / a).tolist(), f_star=float(np.sum(1.0 + np.log(a))),
        description="f(x) = sum(a_i x_i - ln x_i)",
    )


def _box_barrier(seed: int, n: int = 1, shift: float = 0.0) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    c = shift * rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], n) if shift else np.zeros(n)
    barrier = BoxBarrier(n)
    x_star = barrier.conjugate_point(-c)
    f_star = barrier.value(x_star) + float(c @ x_star)
    return ProblemInstance(
        name="box-barrier", params={"n": n, "shift": shift}, seed=seed, dim=n, M_f=1.0, nu=2.0 * n,
        x0=np.zeros(n).tolist(), c=c.tolist(), x_star=x_star.tolist(), f_star=f_star,
        description="-sum ln(1 - x_i^2) + <c, x>",
    )


def _simplex_barrier(seed: int, n: int = 2) -> ProblemInstance:
    return ProblemInstance(
        name="simplex-barrier", params={"n": n}, seed=seed, dim=n, M_f=1.0, nu=n + 1.0,
        x0=np.zeros(n).tolist(), x_star=np.zeros(n).tolist(), f_star=0.0,
        description="log barrier of the simplex, centered at its analytic center",
    )


def _simplex_entropy(seed: int, n: int = 2) -> ProblemInstance:
    return ProblemInstance(
        name="simplex-entropy", params={"n": n}, seed=seed, dim=n, M_f=1.0, nu=ENTROPIC_NU_PER_TERM * (n + 1.0),
        x0=np.zeros(n).tolist(), x_star=np.zeros(n).tolist(), f_star=0.0,
        description="entropy-like barrier of the simplex, centered at its analytic center",
    )


def _lse_reg(seed: int, n: int = 4, m: int = 8, mu: float = 0.5, sigma: float = 0.1,
             start_radius: float = 4.0) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / math.sqrt(n)
    b = rng.standard_normal(m)
    oracle = make_lse_oracle(A, b, mu, sigma)
    x_star, f_star = _reference_minimum(oracle, np.zeros(n))
    x0 = x_star + start_radius * _unit_direction(rng, n)
    inst = ProblemInstance(
        name="lse-reg", params={"n": n, "m": m, "mu": mu, "sigma": sigma, "start_radius": start_radius},
        seed=seed, dim=n, M_f=oracle.M_f, x0=x0.tolist(), x_star=x_star.tolist(), f_star=f_star,
        sigma_f=sigma, H_f=oracle.H_f, A=A.tolist(), b=b.tolist(),
        description="mu*lse((A x - b)/mu) + sigma/2 ||x||^2",
    )
    inst._oracle = oracle
    return inst


def _logistic_l2(seed: int, n: int = 3, m: int = 20, sigma: float = 0.5,
                 start_radius: float = 2.0) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / math.sqrt(n)
    w_true = rng.standard_normal(n)
    y = np.where(A @ w_true + 0.3 * rng.standard_normal(m) >= 0, 1.0, -1.0)
    oracle = make_logistic_oracle(A, y, sigma)
    x_star, f_star = _reference_minimum(oracle, np.zeros(n))
    x0 = x_star + start_radius * _unit_direction(rng, n)
    inst = ProblemInstance(
        name="logistic-l2", params={"n": n, "m": m, "sigma": sigma, "start_radius": start_radius},
        seed=seed, dim=n, M_f=oracle.M_f, x0=x0.tolist(), x_star=x_star.tolist(), f_star=f_star,
        sigma_f=sigma, H_f=oracle.H_f, A=A.tolist(), b=y.tolist(),
        description="logistic loss + sigma/2 ||x||^2",
    )
    inst._oracle = oracle
    return inst


def enumerate_vertices(A, b, c, tol: float = 1e-10) -> Tuple[np.ndarray, float, np.ndarray]:
    """Brute-force optimum of min <c, x> s.t. A x = b, x >= 0 over basic solutions.

    Returns (x*, f*, y*) where y* solves A_B^T y = c_B for the optimal basis.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    best: Optional[Tuple[np.ndarray, float, np.ndarray]] = None
    for basis in itertools.combinations(range(n), m):
        cols = list(basis)
        A_B = A[:, cols]
        if abs(np.linalg.det(A_B)) < 1e-12:
            continue
        x_B = np.linalg.solve(A_B, b)
        if np.any(x_B < -tol):
            continue
        x = np.zeros(n)
        x[cols] = np.maximum(x_B, 0.0)
        value = float(c @ x)
        if best is None or value < best[1] - 1e-12:
            y = np.linalg.solve(A_B.T, c[cols])
            best = (x, value, y)
    if best is None:
        raise DomainViolationError("LP has no basic feasible solution")
    return best


def _lp_random(seed: int, n: int = 6, m: int = 3) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    x_feas = rng.uniform(0.5, 1.5, n)
    b = A @ x_feas
    y = rng.standard_normal(m)
    s = rng.uniform(0.5, 1.5, n)
    c = A.T @ y + s
    x_star, f_star, y_star = enumerate_vertices(A, b, c)
    return ProblemInstance(
        name="lp-random", params={"n": n, "m": m}, seed=seed, dim=n, M_f=0.0,
        x0=x_feas.tolist(), x_star=x_star.tolist(), f_star=f_star, y_star=y_star.tolist(),
        A=A.tolist(), b=b.tolist(), c=c.tolist(),
        description="min <c, x> s.t. A x = b, x >= 0",
    )


def _box_feasibility(seed: int, n: int = 4, k: int = 2, radius: float = 0.5) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, n))
    x_planted = rng.uniform(-radius, radius, n)
    b = A @ x_planted
    return ProblemInstance(
        name="box-feasibility", params={"n": n, "k": k, "radius": radius}, seed=seed, dim=n, M_f=1.0,
        nu=2.0 * n, x0=np.zeros(n).tolist(), A=A.tolist(), b=b.tolist(),
        eps_depth=None, description="find x in [-1,1]^n with A x = b (planted solution)",
    )


def _box_slab(seed: int, n: int = 2, eps: float = 0.1) -> ProblemInstance:
    A = np.full((1, n), 1.0 / n)
    b = np.array([1.0 - eps])
    return ProblemInstance(
        name="box-slab", params={"n": n, "eps": eps}, seed=seed, dim=n, M_f=1.0, nu=2.0 * n,
        x0=np.zeros(n).tolist(), A=A.tolist(), b=b.tolist(), eps_depth=eps,
        x_star=np.full(n, 1.0 - eps).tolist(),
        description="find x in [-1,1]^n with mean(x) = 1 - eps",
    )


_BUILDERS: Dict[str, Callable[..., ProblemInstance]] = {
    "scalar-xlnx": _scalar_xlnx,
    "linear-log": _linear_log,
    "box-barrier": _box_barrier,
    "simplex-barrier": _simplex_barrier,
    "simplex-entropy": _simplex_entropy,
    "lse-reg": _lse_reg,
    "logistic-l2": _logistic_l2,
    "lp-random": _lp_random,
    "box-feasibility": _box_feasibility,
    "box-slab": _box_slab,
}


def _objective_box(inst: ProblemInstance) -> ScOracle:
    return ShiftedOracle(BoxBarrier(inst.dim), inst.array("c"), 1.0)


_ORACLES: Dict[str, Callable[[ProblemInstance], ScOracle]] = {
    "scalar-xlnx": lambda inst: LinearLogOracle([inst.params.get("a", 1.0)]),
    "linear-log": lambda inst: LinearLogOracle(inst.array("c")),
    "box-barrier": _objective_box,
    "simplex-barrier": lambda inst: SimplexBarrier(inst.dim),
    "simplex-entropy": lambda inst: EntropicSimplexBarrier(inst.dim),
    "lse-reg": lambda inst: make_lse_oracle(inst.array("A"), inst.array("b"),
                                            inst.params["mu"], inst.params["sigma"]),
    "logistic-l2": lambda inst: make_logistic_oracle(inst.array("A"), inst.array("b"), inst.params["sigma"]),
    "box-feasibility": lambda inst: BoxBarrier(inst.dim),
    "box-slab": lambda inst: BoxBarrier(inst.dim),
}

_BARRIERS: Dict[str, Callable[[ProblemInstance], BarrierOracle]] = {
    "box-barrier": lambda inst: BoxBarrier(inst.dim),
    "simplex-barrier": lambda inst: SimplexBarrier(inst.dim),
    "simplex-entropy": lambda inst: EntropicSimplexBarrier(inst.dim),
    "box-feasibility": lambda inst: BoxBarrier(inst.dim),
    "box-slab": lambda inst: BoxBarrier(inst.dim),
}


def known_problems() -> List[str]:
    return sorted(_BUILDERS)


def zoo(name: str, seed: int = 0, **params) -> ProblemInstance:
    """Build the named instance; unknown names raise UnknownProblemError."""
    builder = _BUILDERS.get(name)
    if builder is None:
        raise UnknownProblemError(name, known_problems())
    instance = builder(seed, **params)
    logger.debug("zoo(%s, seed=%d, %s) -> dim %d", name, seed, params, instance.dim)
    return instance


## Problem files

def save_problem(instance: ProblemInstance, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(instance.model_dump_json(indent=2), encoding="utf-8")
    return path


def load_problem(path) -> ProblemInstance:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProblemFileError(f"cannot read problem file {path}: {exc}") from exc
    if data.get("schema_version") != PROBLEM_SCHEMA:
        raise ProblemFileError(f"{path}: unsupported schema {data.get('schema_version')!r}")
    return ProblemInstance.model_validate(data)


def read_lp_triplets(path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse the matrix-triplet LP format into (A, b, c).

    Lines: "dims m n", "c v_1 ... v_n", "b v_1 ... v_m", then one
    "A row col value" line per nonzero (0-based). '#' starts a comment.
    """
    m = n = None
    c = b = None
    entries: List[Tuple[int, int, float]] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ProblemFileError(f"cannot read LP file {path}: {exc}") from exc
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        try:
            if key == "dims":
                m, n = int(rest[0]), int(rest[1])
            elif key == "c":
                c = np.array([float(v) for v in rest])
            elif key == "b":
                b = np.array([float(v) for v in rest])
            elif key == "A":
                entries.append((int(rest[0]), int(rest[1]), float(rest[2])))
            else:
                raise ProblemFileError(f"{path}:{number}: unknown record {key!r}")
        except (IndexError, ValueError) as exc:
            raise ProblemFileError(f"{path}:{number}: malformed {key!r} record") from exc
    if m is None or c is None or b is None:
        raise ProblemFileError(f"{path}: missing dims, c or b record")
    if c.size != n or b.size != m:
        raise ProblemFileError(f"{path}: c has {c.size} entries, b has {b.size}; dims say {m}x{n}")
    A = np.zeros((m, n))
    for row, col, value in entries:
        if not (0 <= row < m and 0 <= col < n):
            raise ProblemFileError(f"{path}: entry ({row}, {col}) outside {m}x{n}")
        A[row, col] += value
    return A, b, c


def write_lp_triplets(path, A, b, c) -> Path:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    lines = [f"dims {m} {n}",
             "c " + " ".join(repr(float(v)) for v in c),
             "b " + " ".join(repr(float(v)) for v in b)]
    for row, col in zip(*np.nonzero(A)):
        lines.append(f"A {row} {col} {float(A[row, col])!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
