"""Elasticity eigenpairs on the displacement space and the resonance gap.

The generalized problem pairs the elastic energy inner product
2*mu*(eps(u), eps(v)) + lambda*(div u, div v) against the rho-weighted mass
inner product, on the displacement space with its essential conditions
eliminated.  The gap gamma_min = min_n |omega^2 - kappa_n| / (1 + kappa_n)
measures the distance of the driving frequency from resonance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fespace import CellBasis, DofLayout, triangle_rule
from .mesh import Mesh
from .params import ProblemParams, derived_densities


def assemble_gram_pair(
    mesh: Mesh,
    layout: DofLayout,
    params: ProblemParams,
    reduced: bool = True,
) -> tuple[sp.csr_matrix, sp.csr_matrix, np.ndarray]:
    """Stiffness/mass pencil on the constrained displacement space.

    Returns (A, M, free) where free lists the retained u-block DOFs.  With
    ``reduced`` the volumetric term uses the cellwise-mean divergence, the
    same operator the solver discretizes; otherwise the exact divergence.
    """
    rho, _ = derived_densities(params)
    if rho <= 0:
        raise ValueError("mass density must be positive")
    rule = triangle_rule(4)
    basis = CellBasis(mesh, layout, rule)
    w = rule.weights
    area = basis.areas

    GU = basis.u_grad
    Eps = 0.5 * (GU + np.swapaxes(GU, 3, 4))
    Keps = np.einsum("cqikl,cqjkl,q->cij", Eps, Eps, w) * area[:, None, None]
    if reduced:
        dbar = basis.u_div_mean
        Div = dbar[:, :, None] * dbar[:, None, :] * area[:, None, None]
    else:
        Div = np.einsum("cqi,cqj,q->cij", basis.u_div, basis.u_div, w) * area[:, None, None]
    Mu = np.einsum("cqid,cqjd,q->cij", basis.u_val, basis.u_val, w) * area[:, None, None]

    Aloc = 2.0 * params.mu * Keps + params.lam * Div
    Mloc = rho * Mu

    udofs = basis.u_dofs()
    n = layout.n_u

    def global_matrix(loc):
        R = np.broadcast_to(udofs[:, :, None], loc.shape)
        C = np.broadcast_to(udofs[:, None, :], loc.shape)
        keep = (R >= 0) & (C >= 0)
        return sp.coo_matrix((loc[keep], (R[keep], C[keep])), shape=(n, n)).tocsr()

    A = global_matrix(Aloc)
    M = global_matrix(Mloc)

    verts_d = mesh.boundary_vertices(mesh.tags_u, "d")
    fixed = np.concatenate([2 * verts_d, 2 * verts_d + 1]) if len(verts_d) else np.array([], dtype=np.int64)
    free = np.setdiff1d(np.arange(n), fixed)
    A = A[free][:, free].tocsr()
    M = M[free][:, free].tocsr()
    # enforce exact symmetry against quadrature round-off
    A = ((A + A.T) * 0.5).tocsr()
    M = ((M + M.T) * 0.5).tocsr()
    return A, M, free


def smallest_eigs(
    A: sp.spmatrix,
    M: sp.spmatrix,
    k: int = 10,
    residual_tol: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """k smallest generalized eigenvalues of A psi = kappa M psi.

    Shift-inverted Lanczos for large pencils, dense solve for small ones.
    Each returned pair satisfies ||A psi - kappa M psi|| / ||M psi|| below
    ``residual_tol``.
    """
    n = A.shape[0]
    if k > n:
        raise ValueError("cannot request more modes than the space dimension")
    if n <= 400 or k > n - 2:
        kappas, vecs = scipy.linalg.eigh(A.toarray(), M.toarray())
        kappas, vecs = kappas[:k], vecs[:, :k]
    else:
        kappas, vecs = spla.eigsh(A.tocsc(), k=k, M=M.tocsc(), sigma=0.0, which="LM")
        order = np.argsort(kappas)
        kappas, vecs = kappas[order], vecs[:, order]

    resid = eig_residuals(A, M, kappas, vecs)
    if np.any(resid > residual_tol):
        raise RuntimeError(
            "eigenpairs exceed the residual tolerance; best residuals: "
            + ", ".join(f"{r:.2e}" for r in resid)
        )
    return kappas, vecs


def eig_residuals(A, M, kappas, vecs) -> np.ndarray:
    """Relative residuals ||A psi - kappa M psi|| / ||M psi|| per pair."""
    out = np.empty(len(kappas))
    for i, kap in enumerate(kappas):
        v = vecs[:, i]
        Mv = M @ v
        out[i] = np.linalg.norm(A @ v - kap * Mv) / np.linalg.norm(Mv)
    return out


@dataclass
class SpectrumReport:
    """Computed spectrum slice and its relation to the driving frequency."""

    kappas: np.ndarray            # ascending eigenvalues
    omega_sq: float
    gamma_min: float              # min |omega^2 - kappa| / (1 + kappa)
    assumption_satisfied: bool    # omega^2 stays clear of every computed mode
    m_bar: int                    # number of modes below omega^2
    complete: bool                # largest computed mode exceeds omega^2

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("index,kappa,gap\n")
            for i, kap in enumerate(self.kappas):
                gap = abs(self.omega_sq - kap) / (1.0 + kap)
                fh.write(f"{i},{kap:.10e},{gap:.10e}\n")


def check_assumption(
    kappas: np.ndarray,
    omega: float,
    tol: float = 1e-8,
) -> SpectrumReport:
    """Evaluate the resonance gap of omega^2 against computed eigenvalues."""
    kappas = np.sort(np.asarray(kappas, dtype=float))
    om2 = float(omega) ** 2
    gaps = np.abs(om2 - kappas) / (1.0 + kappas)
    complete = bool(kappas[-1] > om2)
    if not complete:
        warnings.warn("computed spectrum does not reach past omega^2; "
                      "gap and mode count may be incomplete")
    return SpectrumReport(
        kappas=kappas,
        omega_sq=om2,
        gamma_min=float(gaps.min()),
        assumption_satisfied=bool(np.min(np.abs(om2 - kappas)) > tol),
        m_bar=int(np.sum(kappas < om2)),
        complete=complete,
    )


def spectrum_report(
    mesh: Mesh,
    layout: DofLayout,
    params: ProblemParams,
    k: int = 10,
    reduced: bool = True,
    tol: float = 1e-8,
) -> SpectrumReport:
    """Assemble, solve and evaluate in one call."""
    A, M, _ = assemble_gram_pair(mesh, layout, params, reduced=reduced)
    kappas, _ = smallest_eigs(A, M, k=min(k, A.shape[0]))
    return check_assumption(kappas, params.omega, tol=tol)
