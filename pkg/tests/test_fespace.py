"""Quadrature exactness, basis properties, interpolation and commutativity."""

import numpy as np
import pytest

from thermoporofem.fespace import (
    CellBasis,
    build_dof_layout,
    edge_rule,
    interp_bv,
    interp_p1,
    interp_rt,
    project_p0,
    triangle_rule,
)
from thermoporofem.mesh import (
    BoundaryConfig,
    all_dirichlet_config,
    tag_boundary,
    uniform_unit_square,
)


def tagged(n):
    return tag_boundary(uniform_unit_square(n), all_dirichlet_config())


def tagged_all_traction(n):
    """Tagging that enriches every facet (no essential displacement data),
    so the interpolation operator has bubbles on the whole boundary."""
    full = lambda m: np.ones(len(m), bool)
    none = lambda m: np.zeros(len(m), bool)
    cfg = BoundaryConfig(gamma_d=none, gamma_t=full,
                         gamma_p=none, gamma_f=full,
                         gamma_r=full, gamma_h=none,
                         allow_empty_dirichlet=True)
    return tag_boundary(uniform_unit_square(n), cfg)


# -- quadrature -------------------------------------------------------------


def reference_monomial_integral(i, j):
    """int over the unit reference triangle of x^i y^j (exact factorial form)."""
    from math import factorial

    return factorial(i) * factorial(j) / factorial(i + j + 2)


@pytest.mark.parametrize("degree", [1, 2, 4, 7])
def test_triangle_rule_exactness(degree):
    rule = triangle_rule(degree)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    # map barycentric points to the reference triangle (0,0)-(1,0)-(0,1)
    x = rule.points[:, 1]
    y = rule.points[:, 2]
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            approx = 0.5 * np.sum(rule.weights * x**i * y**j)
            exact = reference_monomial_integral(i, j)
            assert approx == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("npts", [2, 3])
def test_edge_rule_exactness(npts):
    rule = edge_rule(npts)
    for k in range(rule.degree + 1):
        assert np.sum(rule.weights * rule.points**k) == pytest.approx(
            1.0 / (k + 1), abs=1e-14
        )


def test_triangle_rule_rejects_high_degree():
    with pytest.raises(ValueError):
        triangle_rule(8)


# -- displacement basis -----------------------------------------------------


def test_bubble_midpoint_value():
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    # midpoints in barycentric coordinates: the two endpoint coords are 1/2
    rule = triangle_rule(1)
    lam = np.array([[0.0, 0.5, 0.5]])
    basis = CellBasis(mesh, layout, type(rule)(lam, np.array([1.0]), 1))
    psi = basis.psi[0]
    assert psi[0] == pytest.approx(0.25)     # bubble on facet opposite vertex 0
    assert psi[1] == pytest.approx(0.0)
    assert psi[2] == pytest.approx(0.0)


def test_bubble_vanishes_at_vertices():
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    rule = triangle_rule(1)
    lam = np.eye(3)
    basis = CellBasis(mesh, layout, type(rule)(lam, np.full(3, 1 / 3), 1))
    assert np.allclose(basis.psi, 0.0)


def test_bubble_direction_agrees_across_cells():
    """The bubble on an interior facet points along the fixed facet normal
    when evaluated from either adjacent cell."""
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    rule = triangle_rule(4)
    basis = CellBasis(mesh, layout, rule)
    for f in mesh.interior_facets:
        c0, c1 = mesh.facet_cells[f]
        l0 = list(mesh.cell_facets[c0]).index(f)
        l1 = list(mesh.cell_facets[c1]).index(f)
        nvec = mesh.facet_normals[f]
        for c, l in ((c0, l0), (c1, l1)):
            vals = basis.u_val[c, :, 6 + l, :]
            mags = np.linalg.norm(vals, axis=1)
            keep = mags > 1e-14
            directions = vals[keep] / mags[keep, None]
            signs = directions @ nvec
            assert np.allclose(np.abs(directions), np.abs(nvec)[None, :] * 0 + np.abs(directions))
            assert np.allclose(directions, np.sign(signs)[:, None] * nvec)
            assert np.all(signs > 0)  # psi_e >= 0 inside the cell


def test_enrichment_excludes_dirichlet_facets():
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    assert np.all(layout.bubble_dof[mesh.boundary_facets] == -1)
    assert np.all(layout.bubble_dof[mesh.interior_facets] >= 0)
    assert layout.n_u == 2 * mesh.num_vertices + len(mesh.interior_facets)


def test_hat_partition_of_unity():
    mesh = tagged(3)
    layout = build_dof_layout(mesh)
    basis = CellBasis(mesh, layout, triangle_rule(4))
    assert np.allclose(basis.hat.sum(axis=1), 1.0)


# -- Raviart-Thomas basis ---------------------------------------------------


def test_rt_flux_normalization():
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    rule = edge_rule(3)
    for c in range(mesh.num_cells):
        xy = mesh.vertices[mesh.cells[c]]
        d1, d2 = xy[1] - xy[0], xy[2] - xy[0]
        area = 0.5 * abs(d1[0] * d2[1] - d1[1] * d2[0])
        for l in range(3):
            f = mesh.cell_facets[c, l]
            sign = mesh.facet_signs[c, l]
            a, b = mesh.vertices[mesh.facets[f]]
            for m in range(3):
                fm = mesh.cell_facets[c, m]
                Pm = xy[m]
                sm = mesh.facet_signs[c, m]
                pts = a[None] + rule.points[:, None] * (b - a)[None]
                vals = sm * (pts - Pm) / (2 * area)
                flux = np.sum(rule.weights[:, None] * vals, axis=0) @ \
                    mesh.facet_normals[f] * np.linalg.norm(b - a)
                assert flux == pytest.approx(1.0 if fm == f else 0.0, abs=1e-13)


def test_rt_divergence_constant():
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    basis = CellBasis(mesh, layout, triangle_rule(4))
    assert np.allclose(np.abs(basis.rt_div), 1.0 / basis.areas[:, None])


def test_rt_reproduces_constant_field():
    mesh = tagged(3)
    layout = build_dof_layout(mesh)

    def const(x, y):
        return np.ones_like(x), np.zeros_like(x)

    coeff = interp_rt(mesh, const)
    basis = CellBasis(mesh, layout, triangle_rule(4))
    vals = np.einsum("ci,cqid->cqd", coeff[basis.w_dofs()], basis.rt_val)
    assert np.allclose(vals[..., 0], 1.0, atol=1e-12)
    assert np.allclose(vals[..., 1], 0.0, atol=1e-12)


# -- interpolation operators ------------------------------------------------


def test_interp_bv_linear_field_has_zero_bubbles():
    mesh = tagged(4)
    layout = build_dof_layout(mesh)

    def linear(x, y):
        return 2 * x - y + 1, 0.5 * x + 3 * y

    coeff = interp_bv(mesh, layout, linear)
    assert np.allclose(coeff[2 * mesh.num_vertices:], 0.0, atol=1e-13)


def test_interp_bv_mean_divergence_preserved():
    """int div(v - interp v) = 0 over the domain for smooth v."""
    mesh = tagged_all_traction(4)
    layout = build_dof_layout(mesh)
    rng = np.random.default_rng(7)
    a = rng.normal(size=6)

    def v(x, y):
        return (np.sin(a[0] * x + a[1] * y) + a[2] * x * y,
                np.cos(a[3] * x) * np.sin(a[4] * y) + a[5] * x**2)

    coeff = interp_bv(mesh, layout, v)
    basis = CellBasis(mesh, layout, triangle_rule(4))
    rule = basis.rule
    dofs = basis.u_dofs()
    cf = np.where(dofs >= 0, coeff[np.clip(dofs, 0, None)], 0.0)
    div_h = np.einsum("ci,cqi,q,c->", cf, basis.u_div, rule.weights, basis.areas)

    fine = triangle_rule(7)
    fb = CellBasis(mesh, layout, fine)
    eps = 1e-6
    X, Y = fb.points[:, :, 0], fb.points[:, :, 1]
    div_exact = ((v(X + eps, Y)[0] - v(X - eps, Y)[0]) / (2 * eps)
                 + (v(X, Y + eps)[1] - v(X, Y - eps)[1]) / (2 * eps))
    div_v = np.einsum("cq,q,c->", div_exact, fine.weights, fb.areas)
    assert abs(div_h - div_v) < 1e-9     # limited by the finite differences


def test_p0_commutes_with_bv_interpolation():
    """Cell means of div interp(v) and of div v coincide."""
    for n in (2, 4):
        mesh = tagged_all_traction(n)
        layout = build_dof_layout(mesh)
        rng = np.random.default_rng(n)
        a = rng.normal(size=4)

        def v(x, y):
            return (np.sin(a[0] * x) * np.cos(a[1] * y),
                    np.exp(a[2] * x * 0.3) * np.sin(a[3] * y))

        def div_v(x, y):
            return (a[0] * np.cos(a[0] * x) * np.cos(a[1] * y)
                    + a[3] * np.exp(a[2] * x * 0.3) * np.cos(a[3] * y))

        coeff = interp_bv(mesh, layout, v, rule=edge_rule(6))
        basis = CellBasis(mesh, layout, triangle_rule(4))
        dofs = basis.u_dofs()
        cf = np.where(dofs >= 0, coeff[np.clip(dofs, 0, None)], 0.0)
        mean_h = np.einsum("ci,cqi,q->c", cf, basis.u_div, basis.rule.weights)
        mean_v = project_p0(mesh, div_v, triangle_rule(7))
        assert np.allclose(mean_h, mean_v, atol=1e-12)


def test_rt_commutes_with_p0_projection():
    """div interp_rt(z) equals the cell means of div z."""
    mesh = tagged(2)
    layout = build_dof_layout(mesh)

    def z(x, y):
        return x**2, x * y

    def div_z(x, y):
        return 2 * x + x

    coeff = interp_rt(mesh, z, rule=edge_rule(4))
    basis = CellBasis(mesh, layout, triangle_rule(4))
    div_h = np.einsum("ci,ci->c", coeff[basis.w_dofs()], basis.rt_div)
    assert np.allclose(div_h, project_p0(mesh, div_z), atol=1e-12)


def test_rt_zero_flux_field():
    mesh = tagged(3)

    def tangential(x, y):
        # zero normal flux through every axis-aligned and diagonal facet
        return np.zeros_like(x), np.zeros_like(y)

    assert np.allclose(interp_rt(mesh, tangential), 0.0)


def test_project_p0_basics():
    mesh = tagged(2)
    assert np.allclose(project_p0(mesh, lambda x, y: 3.0 + 0 * x), 3.0)
    cent = mesh.cell_centroids()
    assert np.allclose(project_p0(mesh, lambda x, y: x), cent[:, 0], atol=1e-14)


def test_interp_p1_basics():
    mesh = tagged(2)
    vals = interp_p1(mesh, lambda x, y: 1 + 2 * x - y)
    assert np.allclose(vals, 1 + 2 * mesh.vertices[:, 0] - mesh.vertices[:, 1])
    assert np.allclose(interp_p1(mesh, lambda x, y: 0 * x), 0.0)


def test_interp_p1_seminorm_decay():
    errs = []
    for n in (4, 8, 16):
        mesh = tagged(n)
        layout = build_dof_layout(mesh)
        coeff = interp_p1(mesh, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
        rule = triangle_rule(7)
        basis = CellBasis(mesh, layout, rule)
        X, Y = basis.points[:, :, 0], basis.points[:, :, 1]
        gx = np.pi * np.cos(np.pi * X) * np.sin(np.pi * Y)
        gy = np.pi * np.sin(np.pi * X) * np.cos(np.pi * Y)
        gh = np.einsum("ci,cik->ck", coeff[mesh.cells], basis.grads)
        err = np.einsum("cqk,q,c->",
                        (np.stack([gx, gy], -1) - gh[:, None, :])**2,
                        rule.weights, basis.areas)
        errs.append(np.sqrt(err))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 0.9) and np.all(rates < 1.1)


def test_reduced_divergence_matches_boundary_flux():
    """The cell-mean divergence of every displacement shape function equals
    its boundary flux divided by the area (divergence theorem)."""
    mesh = tagged(2)
    layout = build_dof_layout(mesh)
    basis = CellBasis(mesh, layout, triangle_rule(4))
    rule = edge_rule(4)
    for c in range(mesh.num_cells):
        xy = mesh.vertices[mesh.cells[c]]
        for i in range(9):
            flux = 0.0
            for l in range(3):
                a = xy[(l + 1) % 3]
                b = xy[(l + 2) % 3]
                tvec = b - a
                nout = np.array([tvec[1], -tvec[0]])
                mid = 0.5 * (a + b)
                opp = xy[l]
                if nout @ (mid - opp) < 0:
                    nout = -nout
                pts = a[None] + rule.points[:, None] * tvec[None]
                lam = np.array([
                    _barycentric(xy, pt) for pt in pts
                ])
                vals = _shape_value(basis, mesh, c, i, lam)
                flux += np.sum(rule.weights * (vals @ nout))
            assert basis.u_div_mean[c, i] * basis.areas[c] == pytest.approx(
                flux, abs=1e-13
            )


def _barycentric(xy, pt):
    A = np.column_stack([xy[1] - xy[0], xy[2] - xy[0]])
    ab = np.linalg.solve(A, pt - xy[0])
    return np.array([1 - ab.sum(), ab[0], ab[1]])


def _shape_value(basis, mesh, c, i, lam):
    """Evaluate displacement shape i of cell c at barycentric points."""
    if i < 6:
        l, comp = divmod(i, 2)
        out = np.zeros((len(lam), 2))
        out[:, comp] = lam[:, l]
        return out
    l = i - 6
    ip1, ip2 = (l + 1) % 3, (l + 2) % 3
    psi = lam[:, ip1] * lam[:, ip2]
    nvec = basis.facet_normal[c, l] * basis.bubble_mask[c, l]
    return psi[:, None] * nvec[None, :]
