"""
Dense SPD linear algebra behind the local norms.

A `LocalGeometry` wraps one Hessian and its lower Cholesky factor. It is
computed once and then answers the three questions every Newton-type step
asks: ||h||_x, ||s||*_x and [H]^{-1} s.
"""

import logging
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, eigh, eigvalsh, qr, solve_triangular
from scipy.linalg.lapack import dpocon

from .errors import DimensionMismatchError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
# Reciprocal condition below which solves are flagged
ILL_CONDITIONED_RCOND = 1e-11
# LAPACK estimates below this are confirmed with the exact spectrum
RCOND_CONFIRM = 1e-8


class SpdMatrix:
    """A symmetric positive-definite matrix with its Cholesky factor."""

    def __init__(self, entries, check_symmetry: bool = True):
        a = np.atleast_2d(np.asarray(entries, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError("square matrix", a.shape, "matrix")
        n = a.shape[0]
        if check_symmetry:
            scale = max(np.max(np.abs(a)), 1.0)
            if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
                raise NotPositiveDefiniteError(n, "matrix is not symmetric")
        self.entries = 0.5 * (a + a.T)
        self.dimension = n
        if not np.all(np.isfinite(self.entries)):
            raise NotPositiveDefiniteError(n, "non-finite entries")
        try:
            self.factor = cholesky(self.entries, lower=True, check_finite=False)
        except LinAlgError as exc:
            raise NotPositiveDefiniteError(n, str(exc)) from exc
        diag = np.diag(self.factor)
        if np.any(diag <= 0):
            raise NotPositiveDefiniteError(n, "zero pivot")
        self.rcond_estimate = self._rcond()
        self.ill_conditioned = self.rcond_estimate < ILL_CONDITIONED_RCOND
        if self.ill_conditioned:
            logger.warning("Hessian is ill-conditioned (rcond ~ %.1e)", self.rcond_estimate)

    def _rcond(self) -> float:
        """Reciprocal condition number.

        The LAPACK 1-norm estimate from the existing factor; estimates below
        `RCOND_CONFIRM` are replaced by the exact eigenvalue ratio.
        """
        anorm = float(np.linalg.norm(self.entries, 1))
        rcond, info = dpocon(self.factor, anorm, uplo="L")
        if info != 0 or not np.isfinite(rcond) or rcond < RCOND_CONFIRM:
            eigenvalues = eigvalsh(self.entries, check_finite=False)
            return float(eigenvalues[0] / eigenvalues[-1])
        return float(rcond)

    def __matmul__(self, other):
        return self.entries @ other

    @property
    def shape(self):
        return self.entries.shape


class LocalGeometry:
    """Local norms induced by a Hessian at a point."""

    def __init__(self, hessian, check_symmetry: bool = True):
        self.hessian = hessian if isinstance(hessian, SpdMatrix) else SpdMatrix(hessian, check_symmetry)
        self.factor = self.hessian.factor
        self.dimension = self.hessian.dimension

    @property
    def ill_conditioned(self) -> bool:
        return self.hessian.ill_conditioned

    def _check(self, v, what: str) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.dimension:
            raise DimensionMismatchError((self.dimension,), v.shape, what)
        return v

    def primal_norm(self, h) -> float:
        """||h||_x = <H h, h>^{1/2}."""
        h = self._check(h, "direction")
        return float(np.linalg.norm(self.factor.T @ h))

    def dual_norm(self, s) -> float:
        """||s||*_x = <s, H^{-1} s>^{1/2}, through one triangular solve."""
        s = self._check(s, "covector")
        w = solve_triangular(self.factor, s, lower=True, check_finite=False)
        return float(np.linalg.norm(w))

    def solve_direction(self, s, refine: bool = True) -> np.ndarray:
        """Solve H d = s; s may be a vector or a matrix of right-hand sides."""
        s = self._check(s, "right-hand side")
        d = cho_solve((self.factor, True), s, check_finite=False)
        if refine:
            residual = s - self.hessian.entries @ d
            d = d + cho_solve((self.factor, True), residual, check_finite=False)
        return d

    def residual(self, d, s) -> float:
        """Relative residual ||H d - s|| / ||s||."""
        s = np.asarray(s, dtype=float)
        norm = np.linalg.norm(s)
        r = np.linalg.norm(self.hessian.entries @ d - s)
        return float(r / norm) if norm > 0 else float(r)


def primal_norm(g: LocalGeometry, h) -> float:
    return g.primal_norm(h)


def dual_norm(g: LocalGeometry, s) -> float:
    return g.dual_norm(s)


def solve_direction(g: LocalGeometry, s) -> np.ndarray:
    return g.solve_direction(s)


def local_geometry(hessian, check_symmetry: bool = True) -> LocalGeometry:
    return LocalGeometry(hessian, check_symmetry)


def compatibility_eigenvalues(h_x, h_y) -> np.ndarray:
    """Generalized eigenvalues of H(y) relative to H(x).

    The compatibility sandwich (1 - r)^2 H(x) <= H(y) <= H(x)/(1 - r)^2 holds
    iff every eigenvalue lies in [(1 - r)^2, (1 - r)^{-2}].
    """
    hx = h_x.entries if isinstance(h_x, SpdMatrix) else np.asarray(h_x, dtype=float)
    hy = h_y.entries if isinstance(h_y, SpdMatrix) else np.asarray(h_y, dtype=float)
    return eigh(hy, hx, eigvals_only=True)


def orthonormal_null_space(a, rcond: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of ker(a) from a pivoted QR of a^T."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m, n = a.shape
    if m == 0:
        return np.eye(n)
    q, r, _ = qr(a.T, pivoting=True)
    diag = np.abs(np.diag(r))
    tol = (rcond if rcond is not None else max(m, n) * np.finfo(float).eps) * (diag[0] if diag.size else 1.0)
    rank = int(np.sum(diag > tol))
    return q[:, rank:]
