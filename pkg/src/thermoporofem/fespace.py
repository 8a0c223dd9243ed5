"""Discrete spaces, quadrature, basis evaluation and interpolation operators.

Spaces (2D triangles):
  * displacement: vector P1 enriched with one normal-directed quadratic
    bubble per facet in the enrichment set (interior facets plus facets on
    the traction boundary),
  * filtration displacement: lowest-order Raviart-Thomas,
  * pressure: piecewise constants,
  * temperature: scalar P1.

Raviart-Thomas shape functions are normalized so the total flux through the
own facet, taken along the fixed global normal, equals one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

# -- quadrature -------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Points (barycentric) and weights on the reference triangle or edge.

    Triangle weights sum to one and are multiplied by the physical cell area
    on use; edge weights sum to one and are multiplied by the facet length.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int


def _perm3(a, b, c):
    return [(a, b, c), (c, a, b), (b, c, a)]


def triangle_rule(degree: int) -> QuadratureRule:
    """Symmetric Gauss rules on the reference triangle (barycentric points)."""
    if degree <= 1:
        pts = [(1 / 3, 1 / 3, 1 / 3)]
        wts = [1.0]
    elif degree == 2:
        pts = _perm3(2 / 3, 1 / 6, 1 / 6)
        wts = [1 / 3] * 3
    elif degree <= 4:
        a1, w1 = 0.108103018168070, 0.223381589678011
        a2, w2 = 0.816847572980459, 0.109951743655322
        pts = _perm3(a1, (1 - a1) / 2, (1 - a1) / 2) + _perm3(a2, (1 - a2) / 2, (1 - a2) / 2)
        wts = [w1] * 3 + [w2] * 3
    elif degree <= 7:
        pts = [(1 / 3, 1 / 3, 1 / 3)]
        wts = [-0.149570044467670]
        a1, w1 = 0.479308067841923, 0.175615257433204
        pts += _perm3(a1, (1 - a1) / 2, (1 - a1) / 2)
        wts += [w1] * 3
        a2, w2 = 0.869739794195568, 0.053347235608839
        pts += _perm3(a2, (1 - a2) / 2, (1 - a2) / 2)
        wts += [w2] * 3
        a, b, w3 = 0.638444188569809, 0.312865496004875, 0.077113760890257
        c = 1 - a - b
        pts += [(a, b, c), (b, a, c), (a, c, b), (c, a, b), (b, c, a), (c, b, a)]
        wts += [w3] * 6
    else:
        raise ValueError(f"no triangle rule of degree {degree}")
    return QuadratureRule(np.array(pts), np.array(wts), degree)


def edge_rule(npoints: int = 3) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1]; n points are exact to degree 2n-1."""
    x, w = np.polynomial.legendre.leggauss(npoints)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * npoints - 1)


# -- degree-of-freedom layout ----------------------------------------------


@dataclass
class DofLayout:
    """Global complex degree-of-freedom maps in block order (u, w, p, T)."""

    mesh: Mesh
    bubble_dof: np.ndarray      # (nf,) bubble index within the u block, -1 if absent
    n_u: int
    n_w: int
    n_p: int
    n_T: int

    @property
    def total(self) -> int:
        return self.n_u + self.n_w + self.n_p + self.n_T

    @property
    def offset_u(self) -> int:
        return 0

    @property
    def offset_w(self) -> int:
        return self.n_u

    @property
    def offset_p(self) -> int:
        return self.n_u + self.n_w

    @property
    def offset_T(self) -> int:
        return self.n_u + self.n_w + self.n_p

    def block_slice(self, name: str) -> slice:
        start = getattr(self, f"offset_{name}")
        size = getattr(self, f"n_{name}")
        return slice(start, start + size)

    def split(self, vec: np.ndarray):
        """Split a stacked solution vector into (u, w, p, T) parts."""
        return tuple(vec[self.block_slice(name)] for name in ("u", "w", "p", "T"))


def build_dof_layout(mesh: Mesh) -> DofLayout:
    """Enumerate DOFs; requires a boundary-tagged mesh (bubble set depends on
    the traction boundary)."""
    if not mesh.is_tagged:
        raise ValueError("mesh must be boundary-tagged before building DOFs")
    nf = mesh.num_facets
    enriched = np.zeros(nf, dtype=bool)
    enriched[mesh.interior_facets] = True
    enriched[mesh.tags_u == "t"] = True
    bubble_dof = np.full(nf, -1, dtype=np.int64)
    bubble_dof[enriched] = 2 * mesh.num_vertices + np.arange(enriched.sum())
    return DofLayout(
        mesh=mesh,
        bubble_dof=bubble_dof,
        n_u=2 * mesh.num_vertices + int(enriched.sum()),
        n_w=nf,
        n_p=mesh.num_cells,
        n_T=mesh.num_vertices,
    )


# -- per-cell basis data ----------------------------------------------------


class CellBasis:
    """Vectorized basis evaluation on all cells at the points of one rule.

    Displacement basis ordering per cell: the six vertex functions
    (hat_0*e_x, hat_0*e_y, ..., hat_2*e_y) followed by the three facet
    bubbles, where bubble l sits on the facet opposite vertex l.  Bubbles on
    facets outside the enrichment set are present in the arrays but masked
    in ``bubble_mask``.
    """

    def __init__(self, mesh: Mesh, layout: DofLayout, rule: QuadratureRule):
        self.mesh = mesh
        self.layout = layout
        self.rule = rule
        lam = rule.points                       # (nq, 3)
        nq = len(lam)
        nc = mesh.num_cells

        self.areas = mesh.cell_areas()          # (nc,)
        self.grads = mesh.barycentric_gradients()   # (nc, 3, 2)
        xy = mesh.cell_coords()                 # (nc, 3, 2)
        self.points = np.einsum("ql,clk->cqk", lam, xy)   # (nc, nq, 2)

        # scalar P1
        self.hat = lam                          # (nq, 3), cell-independent
        # bubble l = lam_{l+1} * lam_{l+2}
        ip1 = [1, 2, 0]
        ip2 = [2, 0, 1]
        self.psi = lam[:, ip1] * lam[:, ip2]    # (nq, 3)
        # grad psi_l = lam_{l+1} g_{l+2} + lam_{l+2} g_{l+1}, per cell
        self.grad_psi = (
            np.einsum("qm,cmk->cqmk", lam[:, ip1], self.grads[:, ip2])
            + np.einsum("qm,cmk->cqmk", lam[:, ip2], self.grads[:, ip1])
        )                                       # (nc, nq, 3, 2)

        facets = mesh.cell_facets               # (nc, 3)
        self.facet_normal = mesh.facet_normals[facets]      # (nc, 3, 2)
        self.facet_sign = mesh.facet_signs.astype(float)    # (nc, 3)
        self.bubble_mask = layout.bubble_dof[facets] >= 0   # (nc, 3)
        self.facet_length = mesh.facet_lengths()[facets]    # (nc, 3)

        # displacement: values (nc, nq, 9, 2) and gradients (nc, nq, 9, 2, 2)
        U = np.zeros((nc, nq, 9, 2))
        GU = np.zeros((nc, nq, 9, 2, 2))
        for l in range(3):
            U[:, :, 2 * l, 0] = lam[None, :, l]
            U[:, :, 2 * l + 1, 1] = lam[None, :, l]
            GU[:, :, 2 * l, 0, :] = self.grads[:, None, l, :]
            GU[:, :, 2 * l + 1, 1, :] = self.grads[:, None, l, :]
        mask = self.bubble_mask.astype(float)
        for l in range(3):
            nvec = self.facet_normal[:, l, :] * mask[:, l, None]   # (nc, 2)
            U[:, :, 6 + l, :] = self.psi[None, :, l, None] * nvec[:, None, :]
            GU[:, :, 6 + l, :, :] = nvec[:, None, :, None] * self.grad_psi[:, :, l, None, :]
        self.u_val = U
        self.u_grad = GU
        self.u_div = np.einsum("cqikk->cqi", GU)             # (nc, nq, 9)

        # cell-mean divergence (reduced integration): vertex functions have
        # constant divergence; bubble mean is n_e . (g_a + g_b)/3
        dbar = np.zeros((nc, 9))
        for l in range(3):
            dbar[:, 2 * l] = self.grads[:, l, 0]
            dbar[:, 2 * l + 1] = self.grads[:, l, 1]
        for l in range(3):
            gsum = self.grads[:, ip1[l], :] + self.grads[:, ip2[l], :]
            dbar[:, 6 + l] = mask[:, l] * np.einsum("ck,ck->c", self.facet_normal[:, l, :], gsum) / 3.0
        self.u_div_mean = dbar                               # (nc, 9)

        # Raviart-Thomas: phi_l = sign * (x - P_l) / (2|K|), div = sign/|K|
        P = xy                                                # opposite vertices
        diff = self.points[:, :, None, :] - P[:, None, :, :]  # (nc, nq, 3, 2)
        scale = (self.facet_sign / (2.0 * self.areas[:, None]))[:, None, :, None]
        self.rt_val = diff * scale                            # (nc, nq, 3, 2)
        self.rt_div = self.facet_sign / self.areas[:, None]   # (nc, 3)

    # global DOF index arrays per cell
    def u_dofs(self) -> np.ndarray:
        """(nc, 9) global u-block indices; -1 where the bubble is absent."""
        cells = self.mesh.cells
        out = np.empty((self.mesh.num_cells, 9), dtype=np.int64)
        out[:, 0:6:2] = 2 * cells
        out[:, 1:6:2] = 2 * cells + 1
        out[:, 6:9] = self.layout.bubble_dof[self.mesh.cell_facets]
        return out

    def w_dofs(self) -> np.ndarray:
        return self.mesh.cell_facets.copy()

    def T_dofs(self) -> np.ndarray:
        return self.mesh.cells.copy()


# -- interpolation and projection operators ---------------------------------


def _edge_quad_points(mesh: Mesh, facet_ids: np.ndarray, rule: QuadratureRule):
    a = mesh.vertices[mesh.facets[facet_ids, 0]]
    b = mesh.vertices[mesh.facets[facet_ids, 1]]
    t = rule.points
    pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
    lengths = np.linalg.norm(b - a, axis=1)
    return pts, lengths


def interp_bv(mesh: Mesh, layout: DofLayout, v, rule: QuadratureRule | None = None) -> np.ndarray:
    """Canonical interpolation into the enriched displacement space.

    ``v`` maps (x, y) arrays to a pair of (possibly complex) component arrays.
    Vertex DOFs are nodal values; the bubble coefficient on facet e is
    int_e (v - v_linear) . n_e ds / int_e psi_e ds with int_e psi_e ds = |e|/6.
    """
    rule = rule or edge_rule(3)
    vx, vy = v(mesh.vertices[:, 0], mesh.vertices[:, 1])
    dtype = np.result_type(np.asarray(vx).dtype, np.asarray(vy).dtype, float)
    coeff = np.zeros(layout.n_u, dtype=dtype)
    coeff[0:2 * mesh.num_vertices:2] = vx
    coeff[1:2 * mesh.num_vertices:2] = vy

    enriched = np.flatnonzero(layout.bubble_dof >= 0)
    pts, lengths = _edge_quad_points(mesh, enriched, rule)
    wx, wy = v(pts[:, :, 0], pts[:, :, 1])
    # linear interpolant along the edge
    t = rule.points
    a_ids = mesh.facets[enriched, 0]
    b_ids = mesh.facets[enriched, 1]
    lx = np.outer(vx[a_ids], 1 - t) + np.outer(vx[b_ids], t)
    ly = np.outer(vy[a_ids], 1 - t) + np.outer(vy[b_ids], t)
    n = mesh.facet_normals[enriched]
    resid = (wx - lx) * n[:, 0:1] + (wy - ly) * n[:, 1:2]
    integral = resid @ rule.weights * lengths
    coeff[layout.bubble_dof[enriched]] = integral * 6.0 / lengths
    return coeff


def interp_rt(mesh: Mesh, v, rule: QuadratureRule | None = None) -> np.ndarray:
    """Raviart-Thomas interpolation: facet DOF = int_e v . n_e ds."""
    rule = rule or edge_rule(3)
    all_facets = np.arange(mesh.num_facets)
    pts, lengths = _edge_quad_points(mesh, all_facets, rule)
    wx, wy = v(pts[:, :, 0], pts[:, :, 1])
    n = mesh.facet_normals
    flux = wx * n[:, 0:1] + wy * n[:, 1:2]
    return flux @ rule.weights * lengths


def project_p0(mesh: Mesh, q, rule: QuadratureRule | None = None) -> np.ndarray:
    """Orthogonal L2 projection onto piecewise constants (cell means)."""
    rule = rule or triangle_rule(4)
    lam = rule.points
    xy = mesh.cell_coords()
    pts = np.einsum("ql,clk->cqk", lam, xy)
    vals = q(pts[:, :, 0], pts[:, :, 1])
    return vals @ rule.weights


def interp_p1(mesh: Mesh, s) -> np.ndarray:
    """Lagrangian (nodal) interpolation onto scalar P1."""
    return s(mesh.vertices[:, 0], mesh.vertices[:, 1])
