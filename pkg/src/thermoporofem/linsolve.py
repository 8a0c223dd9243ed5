"""Sparse solves of the constrained complex system."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SolverError(RuntimeError):
    """Factorization failure or non-convergence of the linear solver."""


@dataclass
class SolveReport:
    residual: float
    iterations: int
    factor_time: float
    solve_time: float


def solve(
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    tol: float = 1e-10,
    method: str = "direct",
) -> tuple[np.ndarray, SolveReport]:
    """Solve A x = rhs with relative residual ||Ax - b|| / ||b|| <= tol.

    ``direct`` factorizes the complex matrix; ``real-block`` solves the
    doubled real form [[Re A, -Im A], [Im A, Re A]]; ``iterative`` runs
    GMRES preconditioned with an incomplete LU factorization.
    """
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("system matrix must be square")
    if tol < 1e-12:
        raise ValueError("tolerance below 1e-12 is not supported")
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(matrix.shape[0], dtype=complex), SolveReport(0.0, 0, 0.0, 0.0)

    A = matrix.tocsc().astype(complex)
    if method == "direct":
        x, report = _solve_direct(A, rhs)
    elif method == "real-block":
        x, report = _solve_real_block(A, rhs)
    elif method == "iterative":
        x, report = _solve_iterative(A, rhs, tol)
    else:
        raise ValueError(f"unknown solver method {method!r}")

    report.residual = np.linalg.norm(A @ x - rhs) / bnorm
    if report.residual > tol:
        raise SolverError(
            f"solver reached relative residual {report.residual:.3e} > {tol:.1e}"
        )
    return x, report


def _solve_direct(A, rhs):
    t0 = time.perf_counter()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    t1 = time.perf_counter()
    x = lu.solve(rhs)
    t2 = time.perf_counter()
    if not np.all(np.isfinite(x)):
        raise SolverError("factorization produced non-finite solution (singular system?)")
    return x, SolveReport(np.nan, 0, t1 - t0, t2 - t1)


def _solve_real_block(A, rhs):
    n = A.shape[0]
    Ar, Ai = A.real, A.imag
    big = sp.bmat([[Ar, -Ai], [Ai, Ar]], format="csc")
    t0 = time.perf_counter()
    try:
        lu = spla.splu(big)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    t1 = time.perf_counter()
    xr = lu.solve(np.concatenate([rhs.real, rhs.imag]))
    t2 = time.perf_counter()
    x = xr[:n] + 1j * xr[n:]
    if not np.all(np.isfinite(x)):
        raise SolverError("factorization produced non-finite solution (singular system?)")
    return x, SolveReport(np.nan, 0, t1 - t0, t2 - t1)


def _solve_iterative(A, rhs, tol):
    t0 = time.perf_counter()
    try:
        ilu = spla.spilu(A, drop_tol=1e-6, fill_factor=20)
    except RuntimeError as exc:
        raise SolverError(f"incomplete factorization failed: {exc}") from exc
    t1 = time.perf_counter()
    M = spla.LinearOperator(A.shape, ilu.solve, dtype=complex)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(A, rhs, rtol=tol / 10.0, maxiter=2000, M=M,
                         restart=100, callback=cb, callback_type="pr_norm")
    t2 = time.perf_counter()
    if info != 0:
        resid = np.linalg.norm(A @ x - rhs) / np.linalg.norm(rhs)
        raise SolverError(f"GMRES did not converge (info={info}, residual={resid:.3e})")
    return x, SolveReport(np.nan, count[0], t1 - t0, t2 - t1)
