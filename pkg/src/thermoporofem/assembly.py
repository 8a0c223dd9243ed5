"""Assembly of the complex block operator and load vector.

Matrix entries follow the unknown-in-first-slot convention: with real basis
test functions, entry (i, j) of a block is form(trial_j, test_i) and the
sesquilinear conjugation has no effect, leaving plain complex coefficients
times real element integrals.

Reduced integration: in the volumetric elasticity term and the
temperature-displacement coupling, the divergence of displacement basis
functions is replaced by its cellwise mean.  Only the facet-bubble
functions are affected; vertex functions have piecewise-constant divergence
already.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fespace import CellBasis, DofLayout, QuadratureRule, edge_rule, triangle_rule
from .mesh import Mesh
from .params import ProblemParams, derived_densities

VectorField = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _zero_scalar(x, y):
    return np.zeros_like(np.asarray(x, dtype=float))


def _zero_vector(x, y):
    z = np.zeros_like(np.asarray(x, dtype=float))
    return z, z


@dataclass
class LoadData:
    """Source terms and boundary data, all complex-valued position functions."""

    f: VectorField = _zero_vector            # momentum source
    g: VectorField = _zero_vector            # fluid momentum source
    mass_source: ScalarField = _zero_scalar  # datum of the mass-balance row
    H: ScalarField = _zero_scalar            # heat source
    traction: VectorField = _zero_vector     # t_N on the traction boundary
    p_datum: ScalarField = _zero_scalar      # pressure on the natural flow boundary
    heat_flux: ScalarField = _zero_scalar    # Theta grad T . n on the flux boundary
    u_dirichlet: VectorField = _zero_vector
    w_dirichlet: VectorField = _zero_vector  # essential normal-flux datum
    T_dirichlet: ScalarField = _zero_scalar


class SystemMatrix:
    """Complex sparse operator in block order (u, w, p, T)."""

    def __init__(self, matrix: sp.csr_matrix, layout: DofLayout):
        if matrix.shape != (layout.total, layout.total):
            raise ValueError("matrix dimensions do not match the DOF layout")
        self.matrix = matrix
        self.layout = layout

    def block(self, row: str, col: str) -> sp.csr_matrix:
        r = self.layout.block_slice(row)
        c = self.layout.block_slice(col)
        return self.matrix[r, c]


def _eval_tensor_field(value, points):
    """Evaluate a tensor field at (nc, nq, 2) points -> (nc, nq, 2, 2)."""
    nc, nq = points.shape[:2]
    if not callable(value):
        if np.isscalar(value):
            M = float(value) * np.eye(2)
        else:
            M = np.asarray(value, dtype=float)
        return np.broadcast_to(M, (nc, nq, 2, 2))
    flat = points.reshape(-1, 2)
    out = np.empty((len(flat), 2, 2))
    for k, (x, y) in enumerate(flat):
        out[k] = value(x, y)
    return out.reshape(nc, nq, 2, 2)


def assemble_operator(
    mesh: Mesh,
    layout: DofLayout,
    params: ProblemParams,
    rule: QuadratureRule | None = None,
) -> SystemMatrix:
    """Assemble the stabilized discrete operator."""
    if not mesh.is_tagged:
        raise ValueError("mesh must be boundary-tagged")
    rule = rule or triangle_rule(4)
    basis = CellBasis(mesh, layout, rule)
    w = rule.weights
    area = basis.areas
    hK2 = mesh.cell_diameters() ** 2

    rho, rho_w = derived_densities(params)
    om = params.omega
    c_theta = params.theta_coefficient

    U, GU = basis.u_val, basis.u_grad
    Eps = 0.5 * (GU + np.swapaxes(GU, 3, 4))
    RT = basis.rt_val
    dbar = basis.u_div_mean
    g = basis.grads

    Mu = np.einsum("cqid,cqjd,q->cij", U, U, w) * area[:, None, None]
    Keps = np.einsum("cqikl,cqjkl,q->cij", Eps, Eps, w) * area[:, None, None]
    RedDiv = dbar[:, :, None] * dbar[:, None, :] * area[:, None, None]
    Muw = np.einsum("cqid,cqjd,q->cij", U, RT, w) * area[:, None, None]
    Gup = dbar * area[:, None]                       # (nc, 9): (P_h div v_i, 1)_K
    CuT = dbar[:, :, None] * (area[:, None, None] / 3.0) * np.ones((1, 1, 3))
    Mw = np.einsum("cqid,cqjd,q->cij", RT, RT, w) * area[:, None, None]
    Kinv = np.linalg.inv(_eval_tensor_field(params.permeability, basis.points))
    MKinv = np.einsum("cqkl,cqjl,cqik,q->cij", Kinv, RT, RT, w) * area[:, None, None]
    Ew = basis.facet_sign.copy()                     # (nc, 3): (div z_i, 1)_K
    MpT = np.full((mesh.num_cells, 3), 1.0 / 3.0) * area[:, None]
    MT = np.einsum("qi,qj,q->ij", basis.hat, basis.hat, w)[None] * area[:, None, None]
    Theta = _eval_tensor_field(params.conductivity, basis.points)
    Theta_mean = np.einsum("cqkl,q->ckl", Theta, w)
    KTheta = np.einsum("ckl,cjl,cik->cij", Theta_mean, g, g) * area[:, None, None]
    Kgrad = np.einsum("cik,cjk->cij", g, g) * area[:, None, None]

    udofs = basis.u_dofs()
    wdofs = basis.w_dofs() + layout.offset_w
    pdofs = np.arange(mesh.num_cells)[:, None] + layout.offset_p
    Tdofs = basis.T_dofs() + layout.offset_T

    rows, cols, vals = [], [], []

    def add(R, C, V):
        R = np.broadcast_to(R[:, :, None], V.shape)
        C = np.broadcast_to(C[:, None, :], V.shape)
        keep = (R >= 0) & (C >= 0)
        rows.append(R[keep])
        cols.append(C[keep])
        vals.append(V[keep])

    A_uu = (-om**2 * rho) * Mu + (2.0 * params.mu) * Keps + params.lam * RedDiv
    add(udofs, udofs, A_uu.astype(complex))
    add(udofs, wdofs, (-om**2 * params.rho_f) * Muw.astype(complex))
    add(wdofs, udofs, (-om**2 * params.rho_f) * np.swapaxes(Muw, 1, 2).astype(complex))
    add(udofs, pdofs, (-params.alpha) * Gup[:, :, None].astype(complex))
    add(pdofs, udofs, params.alpha * Gup[:, None, :].astype(complex))
    add(udofs, Tdofs, (-params.beta) * CuT.astype(complex))
    add(Tdofs, udofs, (1j * params.beta) * np.swapaxes(CuT, 1, 2).astype(complex))
    A_ww = (-om**2 * rho_w) * Mw + (1j * om) * MKinv
    add(wdofs, wdofs, A_ww)
    add(wdofs, pdofs, (-Ew[:, :, None]).astype(complex))
    add(pdofs, wdofs, Ew[:, None, :].astype(complex))
    add(pdofs, pdofs, (params.c0 * area)[:, None, None].astype(complex))
    add(pdofs, Tdofs, (-params.b0) * MpT[:, None, :].astype(complex))
    add(Tdofs, pdofs, (-1j * params.b0) * MpT[:, :, None].astype(complex))
    A_TT = (1j * params.a0) * MT + c_theta * KTheta \
        + (params.delta * hK2)[:, None, None] * Kgrad
    add(Tdofs, Tdofs, A_TT)

    n = layout.total
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    return SystemMatrix(A, layout)


def assemble_load(
    mesh: Mesh,
    layout: DofLayout,
    params: ProblemParams,
    data: LoadData,
    rule: QuadratureRule | None = None,
) -> np.ndarray:
    """Assemble the load vector: volume sources plus natural boundary terms."""
    if not mesh.is_tagged:
        raise ValueError("mesh must be boundary-tagged")
    rule = rule or triangle_rule(4)
    basis = CellBasis(mesh, layout, rule)
    w = rule.weights
    area = basis.areas
    x = basis.points[:, :, 0]
    y = basis.points[:, :, 1]

    b = np.zeros(layout.total, dtype=complex)

    fx, fy = data.f(x, y)
    fvals = np.stack(np.broadcast_arrays(fx, fy, x), axis=-1)[..., :2]
    bu = np.einsum("cqd,cqid,q->ci", fvals.astype(complex), basis.u_val, w) * area[:, None]
    _scatter(b, basis.u_dofs(), bu)

    gx, gy = data.g(x, y)
    gvals = np.stack(np.broadcast_arrays(gx, gy, x), axis=-1)[..., :2]
    bw = np.einsum("cqd,cqid,q->ci", gvals.astype(complex), basis.rt_val, w) * area[:, None]
    _scatter(b, basis.w_dofs() + layout.offset_w, bw)

    rm = np.broadcast_to(np.asarray(data.mass_source(x, y)), x.shape)
    b[layout.block_slice("p")] += (rm.astype(complex) @ w) * area

    Hv = np.broadcast_to(np.asarray(data.H(x, y)), x.shape)
    bT = np.einsum("cq,qi,q->ci", Hv.astype(complex), basis.hat, w) * area[:, None]
    _scatter(b, basis.T_dofs() + layout.offset_T, bT)

    _add_boundary_terms(b, mesh, layout, params, data)
    return b


def _scatter(b, dofs, contrib):
    flat_dofs = dofs.ravel()
    flat = contrib.ravel()
    keep = flat_dofs >= 0
    np.add.at(b, flat_dofs[keep], flat[keep])


def _add_boundary_terms(b, mesh, layout, params, data):
    erule = edge_rule(3)
    t = erule.points
    ew = erule.weights

    def facet_points(fid):
        a = mesh.vertices[mesh.facets[fid, 0]]
        bb = mesh.vertices[mesh.facets[fid, 1]]
        pts = a[None, :] + t[:, None] * (bb - a)[None, :]
        return pts, np.linalg.norm(bb - a)

    for fid in np.flatnonzero(mesh.tags_u == "t"):
        pts, length = facet_points(fid)
        tx, ty = data.traction(pts[:, 0], pts[:, 1])
        tx = np.broadcast_to(np.asarray(tx, dtype=complex), t.shape)
        ty = np.broadcast_to(np.asarray(ty, dtype=complex), t.shape)
        va, vb = mesh.facets[fid]
        # linear traces: 1-t at the first endpoint, t at the second
        b[2 * va] += length * np.sum(ew * tx * (1 - t))
        b[2 * va + 1] += length * np.sum(ew * ty * (1 - t))
        b[2 * vb] += length * np.sum(ew * tx * t)
        b[2 * vb + 1] += length * np.sum(ew * ty * t)
        bub = layout.bubble_dof[fid]
        if bub >= 0:
            n = mesh.facet_normals[fid]
            tn = tx * n[0] + ty * n[1]
            b[bub] += length * np.sum(ew * tn * t * (1 - t))

    for fid in np.flatnonzero(mesh.tags_w == "f"):
        pts, length = facet_points(fid)
        pD = np.broadcast_to(np.asarray(data.p_datum(pts[:, 0], pts[:, 1]), dtype=complex), t.shape)
        # normal trace of the facet's RT function is 1/|e| along n_e (outward)
        b[layout.offset_w + fid] -= np.sum(ew * pD)

    c_theta = params.theta_coefficient
    for fid in np.flatnonzero(mesh.tags_T == "h"):
        pts, length = facet_points(fid)
        qN = np.broadcast_to(np.asarray(data.heat_flux(pts[:, 0], pts[:, 1]), dtype=complex), t.shape)
        if not np.any(qN):
            continue
        va, vb = mesh.facets[fid]
        b[layout.offset_T + va] += c_theta * length * np.sum(ew * qN * (1 - t))
        b[layout.offset_T + vb] += c_theta * length * np.sum(ew * qN * t)


# -- essential boundary conditions ------------------------------------------


@dataclass
class ConstrainedSystem:
    """Square system after symmetric elimination of essential DOFs."""

    matrix: sp.csc_matrix          # free-free block
    rhs: np.ndarray                # reduced right-hand side
    free: np.ndarray               # free global DOF indices
    constrained: np.ndarray        # constrained global DOF indices
    values: np.ndarray             # prescribed values on constrained DOFs
    total: int

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        x = np.zeros(self.total, dtype=complex)
        x[self.free] = x_free
        x[self.constrained] = self.values
        return x


def essential_dofs(
    mesh: Mesh,
    layout: DofLayout,
    data: LoadData,
    pin_dofs: list[tuple[int, complex]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Constrained global DOFs and their prescribed values."""
    dofs: list[int] = []
    vals: list[complex] = []

    verts_d = mesh.boundary_vertices(mesh.tags_u, "d")
    if len(verts_d):
        ux, uy = data.u_dirichlet(mesh.vertices[verts_d, 0], mesh.vertices[verts_d, 1])
        ux = np.broadcast_to(np.asarray(ux, dtype=complex), verts_d.shape)
        uy = np.broadcast_to(np.asarray(uy, dtype=complex), verts_d.shape)
        dofs.extend(2 * verts_d)
        vals.extend(ux)
        dofs.extend(2 * verts_d + 1)
        vals.extend(uy)

    facets_p = np.flatnonzero(mesh.tags_w == "p")
    if len(facets_p):
        from .fespace import interp_rt

        flux = interp_rt(mesh, data.w_dirichlet)
        dofs.extend(layout.offset_w + facets_p)
        vals.extend(np.asarray(flux, dtype=complex)[facets_p])

    verts_r = mesh.boundary_vertices(mesh.tags_T, "r")
    if len(verts_r):
        TD = np.broadcast_to(
            np.asarray(data.T_dirichlet(mesh.vertices[verts_r, 0], mesh.vertices[verts_r, 1]),
                       dtype=complex),
            verts_r.shape,
        )
        dofs.extend(layout.offset_T + verts_r)
        vals.extend(TD)

    for dof, value in pin_dofs or []:
        dofs.append(dof)
        vals.append(value)

    dofs = np.asarray(dofs, dtype=np.int64)
    vals = np.asarray(vals, dtype=complex)
    order = np.argsort(dofs)
    return dofs[order], vals[order]


def apply_essential_bcs(
    system: SystemMatrix,
    rhs: np.ndarray,
    data: LoadData,
    pin_dofs: list[tuple[int, complex]] | None = None,
) -> ConstrainedSystem:
    """Eliminate essential DOFs symmetrically: rows dropped, columns folded
    into the right-hand side."""
    layout = system.layout
    mesh = layout.mesh
    dofs, vals = essential_dofs(mesh, layout, data, pin_dofs)
    n = layout.total
    free = np.setdiff1d(np.arange(n), dofs, assume_unique=False)

    A = system.matrix.tocsc()
    A_ff = A[free][:, free]
    A_fc = A[free][:, dofs]
    b_f = rhs[free] - A_fc @ vals
    return ConstrainedSystem(
        matrix=A_ff.tocsc(), rhs=b_f, free=free, constrained=dofs,
        values=vals, total=n,
    )
