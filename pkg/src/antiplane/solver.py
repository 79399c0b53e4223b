"""Newton iteration, conjugate gradients and the stability constant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import ScalarField
from .model import EnergyModel, grad, gram_matrix, hessian

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    pass


class IndefiniteHessian(SolverError):
    """CG met a direction of nonpositive curvature."""


class BreakdownError(SolverError):
    """The eigenvalue iteration failed to converge."""


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float


def conjugate_gradient(A, b: np.ndarray, rtol: float = 1e-10, atol: float = 0.0,
                       maxiter: Optional[int] = None, x0: Optional[np.ndarray] = None,
                       jacobi: bool = True) -> CGResult:
    """Preconditioned CG for ``A x = b`` with ``A`` symmetric positive definite.

    Stops when ``|r| <= max(rtol * |b|, atol)``.  Raises
    :class:`IndefiniteHessian` if ``p^T A p <= 0`` for a search direction and
    :class:`NonConvergence` after ``maxiter`` steps.
    """
    n = len(b)
    maxiter = 10 * n if maxiter is None else maxiter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x if x0 is not None else b.copy()
    stop = max(rtol * np.linalg.norm(b), atol)
    if np.linalg.norm(r) <= stop:
        return CGResult(x, 0, float(np.linalg.norm(r)))
    if jacobi:
        d = A.diagonal()
        if np.any(d <= 0):
            raise IndefiniteHessian("nonpositive diagonal entry")
        dinv = 1.0 / d
    else:
        dinv = np.ones(n)
    z = dinv * r
    p = z.copy()
    rz = r @ z
    for k in range(1, maxiter + 1):
        Ap = A @ p
        curv = p @ Ap
        if curv <= 0:
            raise IndefiniteHessian(f"nonpositive curvature {curv:.3e} at CG step {k}")
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Ap
        rn = np.linalg.norm(r)
        if rn <= stop:
            return CGResult(x, k, float(rn))
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NonConvergence(f"CG did not reach {stop:.3e} in {maxiter} steps (|r| = {rn:.3e})")


def linear_solve(A, b: np.ndarray, rtol: float, method: str = "cg") -> np.ndarray:
    if method == "cg":
        return conjugate_gradient(A, b, rtol=rtol).x
    if method == "direct":
        return spla.splu(sp.csc_matrix(A)).solve(b)
    raise ValueError(f"unknown linear solver {method!r}")


@dataclass
class SolveReport:
    final_field: ScalarField
    iterations: int
    residual_history: List[float] = field(default_factory=list)
    converged: bool = False
    lambda_min: Optional[float] = None

    @property
    def residual(self) -> float:
        return self.residual_history[-1]


def newton(model: EnergyModel, u0: Optional[ScalarField] = None, tol: float = 1e-8,
           max_iter: int = 50, linear_solver: str = "cg",
           inner_rtol: Optional[float] = None, compute_lambda: bool = False) -> SolveReport:
    """Plain Newton iteration ``u <- u - A(u)^{-1} grad(u)``.

    Terminates once the l-infinity norm of the residual is at most ``tol``.
    The inner solve runs to relative residual ``inner_rtol`` (default
    ``1e-2 * tol``).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    inner_rtol = 1e-2 * tol if inner_rtol is None else inner_rtol
    u = ScalarField.zeros(model.domain) if u0 is None else u0
    history = []
    for it in range(max_iter + 1):
        r = grad(model, u)
        res = float(np.max(np.abs(r.values))) if r.values.size else 0.0
        history.append(res)
        log.debug("newton it=%d residual=%.3e", it, res)
        if res <= tol:
            report = SolveReport(u, it, history, converged=True)
            if compute_lambda:
                report.lambda_min = lambda_min(model, u)
            return report
        if it == max_iter:
            break
        A = hessian(model, u)
        step = linear_solve(A, r.values, inner_rtol, linear_solver)
        u = ScalarField(model.domain, u.values - step)
    raise NonConvergence(
        f"Newton did not reach residual {tol:.1e} in {max_iter} iterations "
        f"(last residual {history[-1]:.3e})")


def lambda_min(model: EnergyModel, u: ScalarField, tol: float = 1e-6) -> float:
    """Smallest ``lambda`` with ``A v = lambda M v``, where ``A`` is the Hessian
    at ``u`` and ``M`` the H^1 Gram matrix.

    Computed as ``1 + mu`` with ``mu`` the smallest eigenvalue of
    ``(A - M) v = mu M v``; the perturbation ``A - M`` is concentrated near the
    crack tip, so its extreme eigenvalue is well separated and Lanczos
    converges quickly.
    """
    A = hessian(model, u)
    M = gram_matrix(model.domain)
    P = (A - M).tocsr()
    P.eliminate_zeros()
    if P.nnz == 0:
        return 1.0
    n = A.shape[0]
    if n <= 400:
        w = scipy.linalg.eigh(A.toarray(), M.toarray(), eigvals_only=True,
                              subset_by_index=[0, 0])
        return float(w[0])
    Minv = spla.splu(sp.csc_matrix(M))
    Mop = spla.LinearOperator((n, n), matvec=Minv.solve, dtype=float)
    try:
        mu = spla.eigsh(P, k=1, M=M, Minv=Mop, which="SA", tol=tol,
                        maxiter=20 * n, v0=np.ones(n), return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise BreakdownError(f"Lanczos did not converge: {exc}") from exc
    return float(1.0 + mu[0])
