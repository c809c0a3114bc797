"""
Oracle abstractions for self-concordant functions.

An oracle answers (value, gradient, Hessian) queries at points of its domain
and carries the self-concordance constant M_f it was declared with. The
declared constant is trusted by the solvers; `audit.py` checks it.

Composition is the main tool here:

- `ShiftedOracle` adds a linear term t<c, x> (central path families).
- `ScaledOracle` multiplies by M_f^2 to make a function standard.
- `ConjugateOracle` evaluates the Fenchel conjugate through x(s), the
  maximizer of <s, x> - f(x), obtained in closed form when the primal oracle
  supplies one and by an inner damped Newton solve otherwise.
- `LinearImageOracle` composes a conjugate with a linear map, giving the dual
  objectives u -> F_*(A^T u) of the barrier and feasibility schemes.
- `AffineRestrictedOracle` restricts an oracle to {x : A x = b}.
"""

import logging
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DimensionMismatchError, DomainViolationError, ScalarDomainError
from .linops import LocalGeometry, orthonormal_null_space

logger = logging.getLogger(__name__)

# Barrier oracles report points this close to the boundary as outside
BOUNDARY_MARGIN = 1e-14


class OracleValue(NamedTuple):
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


class LocalModel:
    """Oracle answers at one point plus the Hessian factorization."""

    def __init__(self, x: np.ndarray, result: OracleValue, M_f: float):
        self.x = x
        self.value = float(result.value)
        self.gradient = result.gradient
        self.hessian = result.hessian
        self.M_f = M_f

    @cached_property
    def geometry(self) -> LocalGeometry:
        return LocalGeometry(self.hessian)

    @cached_property
    def lam(self) -> float:
        """lambda_f(x) = ||grad f(x)||*_x."""
        return self.geometry.dual_norm(self.gradient)

    @cached_property
    def newton_direction(self) -> np.ndarray:
        """[H]^{-1} grad f(x)."""
        return self.geometry.solve_direction(self.gradient)


class ScOracle(ABC):
    """A self-concordant function with declared constant M_f."""

    nu: Optional[float] = None

    def __init__(self, dim: int, M_f: float):
        if dim <= 0:
            raise DimensionMismatchError("positive dimension", dim, "oracle")
        if M_f < 0:
            raise ScalarDomainError("M_f", M_f, "M_f >= 0")
        self.dim = int(dim)
        self.M_f = float(M_f)

    def in_domain(self, x) -> bool:
        return bool(np.all(np.isfinite(x)))

    @abstractmethod
    def _evaluate(self, x: np.ndarray) -> OracleValue:
        """Value, gradient and Hessian at a point known to be in the domain."""

    def _point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise DimensionMismatchError((self.dim,), x.shape, "point")
        return x

    def evaluate(self, x) -> OracleValue:
        x = self._point(x)
        if not self.in_domain(x):
            raise DomainViolationError(f"{type(self).__name__}: point outside the domain", x.tolist())
        return self._evaluate(x)

    def value(self, x) -> float:
        return float(self.evaluate(x).value)

    def gradient(self, x) -> np.ndarray:
        return self.evaluate(x).gradient

    def hessian(self, x) -> np.ndarray:
        return self.evaluate(x).hessian

    def local(self, x) -> LocalModel:
        x = self._point(x)
        return LocalModel(x, self.evaluate(x), self.M_f)

    def geometry(self, x) -> LocalGeometry:
        return LocalGeometry(self.hessian(x))


class FunctionOracle(ScOracle):
    """Oracle assembled from plain callables."""

    def __init__(
        self,
        dim: int,
        M_f: float,
        value: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        hessian: Callable[[np.ndarray], np.ndarray],
        domain: Optional[Callable[[np.ndarray], bool]] = None,
    ):
        super().__init__(dim, M_f)
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self._domain = domain

    def in_domain(self, x) -> bool:
        if not super().in_domain(x):
            return False
        return True if self._domain is None else bool(self._domain(x))

    def _evaluate(self, x):
        return OracleValue(
            float(self._value(x)),
            np.atleast_1d(np.asarray(self._gradient(x), dtype=float)),
            np.atleast_2d(np.asarray(self._hessian(x), dtype=float)),
        )


class BarrierOracle(ScOracle):
    """A nu-self-concordant barrier (M_f = 1) of a convex set."""

    def __init__(self, dim: int, nu: float, analytic_center=None):
        super().__init__(dim, 1.0)
        if nu < 1:
            raise ScalarDomainError("nu", nu, "nu >= 1")
        self.nu = float(nu)
        self.analytic_center = None if analytic_center is None else np.asarray(analytic_center, dtype=float)

    def conjugate_point(self, s: np.ndarray) -> Optional[np.ndarray]:
        """x(s) = argmax <s, x> - F(x) in closed form, or None if unavailable."""
        return None

    def start_point(self) -> np.ndarray:
        if self.analytic_center is not None:
            return self.analytic_center.copy()
        return np.zeros(self.dim)


class ShiftedOracle(ScOracle):
    """f(x) + t <c, x>; same Hessian, same M_f, same domain."""

    def __init__(self, base: ScOracle, c, t: float):
        super().__init__(base.dim, base.M_f)
        self.base = base
        self.c = np.asarray(c, dtype=float)
        if self.c.shape != (base.dim,):
            raise DimensionMismatchError((base.dim,), self.c.shape, "shift covector")
        self.t = float(t)

    def in_domain(self, x) -> bool:
        return self.base.in_domain(x)

    def _evaluate(self, x):
        v, g, h = self.base._evaluate(x)
        return OracleValue(v + self.t * float(self.c @ x), g + self.t * self.c, h)


class ScaledOracle(ScOracle):
    """M_f^2 f, a standard self-concordant function."""

    def __init__(self, base: ScOracle):
        super().__init__(base.dim, 1.0)
        self.base = base
        self.scale = base.M_f ** 2

    def in_domain(self, x) -> bool:
        return self.base.in_domain(x)

    def _evaluate(self, x):
        v, g, h = self.base._evaluate(x)
        return OracleValue(self.scale * v, self.scale * g, self.scale * h)


class ConjugateOracle(ScOracle):
    """Fenchel conjugate f_*(s) = max_x <s, x> - f(x).

    grad f_*(s) = x(s) and Hess f_*(s) = [Hess f(x(s))]^{-1}.
    """

    def __init__(self, primal: ScOracle, inner_tol: float = 1e-12, max_inner: int = 500):
        super().__init__(primal.dim, primal.M_f)
        self.primal = primal
        self.inner_tol = inner_tol
        self.max_inner = max_inner
        self.nu = primal.nu

    def in_domain(self, s) -> bool:
        return bool(np.all(np.isfinite(s)))

    def _inner_start(self) -> np.ndarray:
        if isinstance(self.primal, BarrierOracle):
            return self.primal.start_point()
        return np.zeros(self.dim)

    def point(self, s) -> np.ndarray:
        """x(s), the maximizer defining the conjugate."""
        s = self._point(s)
        closed = self.primal.conjugate_point(s) if isinstance(self.primal, BarrierOracle) else None
        if closed is not None:
            return closed
        return self._inner_solve(s)

    def _inner_solve(self, s: np.ndarray) -> np.ndarray:
        # damped Newton on f(x) - <s, x>, which shares Hessian and M_f with f
        x = self._inner_start()
        M = self.M_f
        for _ in range(self.max_inner):
            local = self.primal.local(x)
            g = local.gradient - s
            direction = local.geometry.solve_direction(g)
            lam = float(np.sqrt(max(g @ direction, 0.0)))
            if lam <= self.inner_tol:
                return x
            step = direction / (1.0 + M * lam) if M * lam > 0.25 else direction
            x = x - step
            if not self.primal.in_domain(x):
                raise DomainViolationError("conjugate inner solve left the primal domain", x.tolist())
        raise DomainViolationError(
            f"conjugate maximizer not found in {self.max_inner} steps; s may lie outside dom f_*",
            s.tolist(),
        )

    def evaluate_at(self, s) -> tuple:
        """Return (OracleValue, x(s), LocalModel of the primal at x(s))."""
        s = self._point(s)
        x = self.point(s)
        local = self.primal.local(x)
        value = float(s @ x) - local.value
        inverse_hessian = local.geometry.solve_direction(np.eye(self.dim))
        inverse_hessian = 0.5 * (inverse_hessian + inverse_hessian.T)
        return OracleValue(value, x.copy(), inverse_hessian), x, local

    def _evaluate(self, s):
        return self.evaluate_at(s)[0]


class LinearImageOracle(ScOracle):
    """Phi(u) = f_*(A^T u) for a conjugate oracle f_* and an m x n matrix A."""

    def __init__(self, conjugate: ConjugateOracle, A):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[1] != conjugate.dim:
            raise DimensionMismatchError(("m", conjugate.dim), A.shape, "constraint matrix")
        super().__init__(A.shape[0], conjugate.M_f)
        self.conjugate = conjugate
        self.A = A
        self.nu = conjugate.nu

    def in_domain(self, u) -> bool:
        return self.conjugate.in_domain(self.A.T @ np.asarray(u, dtype=float))

    def evaluate_at(self, u) -> tuple:
        """Return (OracleValue, x(A^T u), primal LocalModel at that point)."""
        u = self._point(u)
        s = self.A.T @ u
        x = self.conjugate.point(s)
        local = self.conjugate.primal.local(x)
        value = float(s @ x) - local.value
        gradient = self.A @ x
        projected = local.geometry.solve_direction(self.A.T)
        hessian = self.A @ projected
        hessian = 0.5 * (hessian + hessian.T)
        return OracleValue(value, gradient, hessian), x, local

    def _evaluate(self, u):
        return self.evaluate_at(u)[0]

    def primal_point(self, u) -> np.ndarray:
        return self.conjugate.point(self.A.T @ self._point(u))


class AffineRestrictedOracle(ScOracle):
    """w -> f(x0 + N w) with N an orthonormal basis of ker(A)."""

    def __init__(self, base: ScOracle, A=None, b=None, x0=None, basis=None):
        if basis is None:
            if A is None:
                raise DimensionMismatchError("constraint matrix or basis", None, "restriction")
            A = np.atleast_2d(np.asarray(A, dtype=float))
            basis = orthonormal_null_space(A)
            if x0 is None:
                b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
                x0 = np.linalg.lstsq(A, b, rcond=None)[0]
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        if basis.shape[0] != base.dim or basis.shape[1] == 0:
            raise DimensionMismatchError((base.dim, "k>0"), basis.shape, "null-space basis")
        super().__init__(basis.shape[1], base.M_f)
        self.base = base
        self.basis = basis
        self.x0 = np.zeros(base.dim) if x0 is None else np.asarray(x0, dtype=float)

    def lift(self, w) -> np.ndarray:
        return self.x0 + self.basis @ np.asarray(w, dtype=float)

    def in_domain(self, w) -> bool:
        return self.base.in_domain(self.lift(w))

    def _evaluate(self, w):
        v, g, h = self.base._evaluate(self.lift(w))
        return OracleValue(v, self.basis.T @ g, self.basis.T @ h @ self.basis)


def lambda_f(oracle: ScOracle, x) -> float:
    """lambda_f(x) = ||grad f(x)||*_x."""
    return oracle.local(x).lam


def shifted_oracle(oracle: ScOracle, c, t: float) -> ScOracle:
    """Oracle of f(x) + t <c, x>."""
    return ShiftedOracle(oracle, c, t)


def normalize_to_standard(oracle: ScOracle) -> ScOracle:
    """Return M_f^2 f, whose self-concordance constant is 1."""
    if oracle.M_f <= 0:
        raise ScalarDomainError("normalize_to_standard", oracle.M_f, "M_f > 0")
    if oracle.M_f == 1.0:
        return oracle
    return ScaledOracle(oracle)
