"""Block structure of the assembled operator and boundary-condition handling."""

import numpy as np
import pytest

from thermoporofem.assembly import (
    LoadData,
    apply_essential_bcs,
    assemble_load,
    assemble_operator,
    essential_dofs,
)
from thermoporofem.fespace import build_dof_layout
from thermoporofem.mesh import (
    BoundaryConfig,
    all_dirichlet_config,
    on_left,
    on_top,
    tag_boundary,
    uniform_unit_square,
)
from thermoporofem.params import ProblemParams


def setup(n=4, params=None):
    mesh = tag_boundary(uniform_unit_square(n), all_dirichlet_config())
    layout = build_dof_layout(mesh)
    params = params or ProblemParams()
    return mesh, layout, params, assemble_operator(mesh, layout, params)


def dense(block):
    return np.asarray(block.todense())


def test_dimensions_match_layout():
    mesh, layout, params, system = setup()
    assert system.matrix.shape == (layout.total, layout.total)
    assert system.block("u", "u").shape == (layout.n_u, layout.n_u)
    assert system.block("p", "T").shape == (layout.n_p, layout.n_T)


def test_adjoint_block_identities():
    _, _, _, system = setup(4)
    B = {key: dense(system.block(*key)) for key in
         [("u", "w"), ("w", "u"), ("u", "p"), ("p", "u"),
          ("w", "p"), ("p", "w"), ("u", "T"), ("T", "u"),
          ("p", "T"), ("T", "p")]}
    assert np.max(np.abs(B[("w", "u")] - B[("u", "w")].T)) < 1e-13
    assert np.max(np.abs(B[("p", "u")] + B[("u", "p")].T)) < 1e-13
    assert np.max(np.abs(B[("p", "w")] + B[("w", "p")].T)) < 1e-13
    assert np.max(np.abs(B[("T", "u")] + 1j * B[("u", "T")].T)) < 1e-13
    # the temperature-pressure coupling carries +i times the adjoint
    assert np.max(np.abs(B[("T", "p")] - 1j * B[("p", "T")].T)) < 1e-13


def test_theta_coefficient_enters_temperature_block():
    mesh, layout, _, sys_tau0 = setup(2, ProblemParams(tau=0.0, a0=0.0, delta=0.0))
    TT = dense(sys_tau0.block("T", "T"))
    # at omega=1, tau=0 the conductivity coefficient is exactly 1 (real)
    assert np.max(np.abs(TT.imag)) < 1e-13

    _, _, _, sys_tau = setup(2, ProblemParams(tau=0.015, a0=0.0, delta=0.0))
    TTc = dense(sys_tau.block("T", "T"))
    ratio = TTc[np.abs(TT) > 1e-12] / TT[np.abs(TT) > 1e-12]
    coeff = ProblemParams(tau=0.015).theta_coefficient
    assert np.allclose(ratio, coeff, atol=1e-12)


def test_reduced_integration_touches_only_bubbles():
    """Vertex-vertex entries of the volumetric term agree with the fully
    integrated variant; only rows/columns with bubble support may differ."""
    from thermoporofem.fespace import CellBasis, triangle_rule

    mesh = tag_boundary(uniform_unit_square(2), all_dirichlet_config())
    layout = build_dof_layout(mesh)
    basis = CellBasis(mesh, layout, triangle_rule(4))
    w = basis.rule.weights
    area = basis.areas
    full = np.einsum("cqi,cqj,q->cij", basis.u_div, basis.u_div, w) * area[:, None, None]
    reduced = basis.u_div_mean[:, :, None] * basis.u_div_mean[:, None, :] * area[:, None, None]
    # vertex functions have piecewise constant divergence: identical entries
    assert np.allclose(full[:, :6, :6], reduced[:, :6, :6], atol=1e-14)
    assert np.max(np.abs(full[:, 6:, 6:] - reduced[:, 6:, 6:])) > 1e-6


def test_hermitian_frequency_independent_blocks():
    p = ProblemParams(delta=0.0, tau=0.0)
    _, _, _, system = setup(3, p)
    # remove the skew mass parts: A_pp = c0 mass is real symmetric
    PP = dense(system.block("p", "p"))
    assert np.max(np.abs(PP - PP.conj().T)) < 1e-13
    UU = dense(system.block("u", "u"))
    # -omega^2 rho M + 2 mu K + lambda D: all real symmetric at tau=0
    assert np.max(np.abs(UU - UU.conj().T)) < 1e-10


def test_load_zero_data():
    mesh, layout, params, _ = setup(2)
    b = assemble_load(mesh, layout, params, LoadData())
    assert np.allclose(b, 0.0)


def test_traction_load_support():
    """A traction on the top side loads only DOFs of top-boundary entities."""
    none = lambda m: np.zeros(len(m), bool)
    full = lambda m: np.ones(len(m), bool)

    def not_top(m):
        return ~on_top(m)

    cfg = BoundaryConfig(gamma_d=not_top, gamma_t=on_top,
                         gamma_p=full, gamma_f=none,
                         gamma_r=full, gamma_h=none)
    n = 8
    mesh = tag_boundary(uniform_unit_square(n), cfg)
    layout = build_dof_layout(mesh)
    params = ProblemParams()

    def traction(x, y):
        return np.zeros_like(x), np.full_like(np.asarray(x, float), -1.0)

    b = assemble_load(mesh, layout, params, LoadData(traction=traction))
    loaded = np.flatnonzero(np.abs(b) > 0)
    top_verts = np.flatnonzero(mesh.vertices[:, 1] > 1 - 1e-12)
    top_facets = np.flatnonzero(mesh.tags_u == "t")
    allowed = set(2 * top_verts) | set(2 * top_verts + 1) \
        | set(layout.bubble_dof[top_facets])
    assert set(loaded) <= allowed
    # vertical resultant equals the applied total force
    assert np.sum(b[2 * top_verts + 1]).real == pytest.approx(-1.0, abs=1e-12)


def test_pressure_datum_enters_flow_rows():
    mesh, layout, params, _ = setup(2)

    def p_datum(x, y):
        return np.ones_like(np.asarray(x, float))

    b = assemble_load(mesh, layout, params, LoadData(p_datum=p_datum))
    loaded = np.flatnonzero(np.abs(b) > 0)
    wslice = layout.block_slice("w")
    assert np.all((loaded >= wslice.start) & (loaded < wslice.stop))
    bnd = mesh.boundary_facets
    assert np.allclose(np.abs(b[layout.offset_w + bnd]), 1.0)


def test_essential_dof_identification():
    mesh, layout, params, system = setup(2)
    dofs, vals = essential_dofs(mesh, layout, LoadData())
    nv = mesh.num_vertices
    bverts = np.unique(mesh.facets[mesh.boundary_facets])
    expected = (set(2 * bverts) | set(2 * bverts + 1)
                | set(layout.offset_T + bverts))
    assert set(dofs) == expected
    assert np.allclose(vals, 0.0)


def test_homogeneous_bc_solution_zero_on_boundary():
    from thermoporofem.linsolve import solve

    mesh, layout, params, system = setup(3)

    def f(x, y):
        return np.sin(np.pi * x), np.cos(np.pi * y)

    b = assemble_load(mesh, layout, params, LoadData(f=f))
    con = apply_essential_bcs(system, b, LoadData())
    x_free, _ = solve(con.matrix, con.rhs)
    x = con.expand(x_free)
    bverts = np.unique(mesh.facets[mesh.boundary_facets])
    assert np.allclose(x[2 * bverts], 0.0)
    assert np.allclose(x[2 * bverts + 1], 0.0)
    assert np.allclose(x[layout.offset_T + bverts], 0.0)


def test_nonhomogeneous_dirichlet_values_imposed():
    mesh, layout, params, system = setup(2)

    def uD(x, y):
        return x + 1j * y, 2 * y

    def TD(x, y):
        return x * y + 0j

    data = LoadData(u_dirichlet=uD, T_dirichlet=TD)
    b = assemble_load(mesh, layout, params, data)
    con = apply_essential_bcs(system, b, data)
    x = con.expand(np.zeros(len(con.free)))
    bverts = np.unique(mesh.facets[mesh.boundary_facets])
    vx, vy = mesh.vertices[bverts, 0], mesh.vertices[bverts, 1]
    assert np.allclose(x[2 * bverts], vx + 1j * vy)
    assert np.allclose(x[2 * bverts + 1], 2 * vy)
    assert np.allclose(x[layout.offset_T + bverts], vx * vy)


def test_untagged_mesh_rejected():
    mesh = uniform_unit_square(2)
    with pytest.raises(ValueError):
        build_dof_layout(mesh)


def test_insertion_order_independence():
    """Assembling twice yields identical matrices (deterministic sums)."""
    _, _, _, s1 = setup(4)
    _, _, _, s2 = setup(4)
    diff = (s1.matrix - s2.matrix).tocoo()
    assert len(diff.data) == 0 or np.max(np.abs(diff.data)) == 0.0
