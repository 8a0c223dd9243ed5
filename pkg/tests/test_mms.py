"""Manufactured solution: field values, source oracle, norms and rates."""

import numpy as np
import pytest

from thermoporofem.fespace import build_dof_layout, interp_bv, interp_p1, interp_rt, project_p0
from thermoporofem.mesh import all_dirichlet_config, tag_boundary, uniform_unit_square
from thermoporofem.mms import (
    ErrorReport,
    convergence_study,
    error_norms,
    exact_fields,
    rhs_from_exact,
    solve_mms,
)
from thermoporofem.params import ProblemParams, derived_densities


def test_point_values():
    exact = exact_fields(ProblemParams())
    p = exact.p(0.5, 0.5)
    T = exact.T(0.5, 0.5)
    assert p.real == pytest.approx(1.0)
    assert T.imag == pytest.approx(1.0)
    assert T.real == pytest.approx(1.0 / 16.0)


def test_real_displacement_nearly_divergence_free_at_large_lambda():
    exact = exact_fields(ProblemParams(lam=1e6))
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.05, 0.95, size=(10, 2))
    div = exact.div_u(pts[:, 0], pts[:, 1])
    assert np.max(np.abs(div.real)) < 1e-4


def test_trig_part_exactly_divergence_free():
    """The lambda-independent part of Re u is solenoidal."""
    rng = np.random.default_rng(4)
    x, y = rng.uniform(0, 1, size=(2, 20))
    dx = 2 * np.pi * np.sin(2 * np.pi * y) * (-np.sin(2 * np.pi * x))
    dy = 2 * np.pi * np.sin(2 * np.pi * x) * (np.sin(2 * np.pi * y))
    assert np.allclose(dx + dy, 0.0, atol=1e-12)


def _fd4(f, x, y, h, axis):
    """Fourth-order central difference of a callable along one axis."""
    if axis == 0:
        vals = [f(x + k * h, y) for k in (-2, -1, 1, 2)]
    else:
        vals = [f(x, y + k * h) for k in (-2, -1, 1, 2)]
    m2, m1, p1, p2 = vals
    return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h)


def test_source_terms_against_finite_differences():
    """The analytic momentum/flow/heat sources must match a finite-difference
    evaluation of the strong-form operators applied to the exact fields."""
    params = ProblemParams()
    exact = exact_fields(params)
    rho, rho_w = derived_densities(params)
    om = params.omega
    rng = np.random.default_rng(11)
    x = rng.uniform(0.1, 0.9, size=20)
    y = rng.uniform(0.1, 0.9, size=20)
    h = 1e-3

    u1 = lambda X, Y: exact.u(X, Y)[0]
    u2 = lambda X, Y: exact.u(X, Y)[1]
    w1 = lambda X, Y: exact.w(X, Y)[0]
    w2 = lambda X, Y: exact.w(X, Y)[1]

    div_u = _fd4(u1, x, y, h, 0) + _fd4(u2, x, y, h, 1)
    sig_trace = params.lam * div_u - params.alpha * exact.p(x, y) \
        - params.beta * exact.T(x, y)
    s11 = lambda X, Y: (2 * params.mu * _fd4(u1, X, Y, h, 0)
                        + params.lam * (_fd4(u1, X, Y, h, 0) + _fd4(u2, X, Y, h, 1))
                        - params.alpha * exact.p(X, Y) - params.beta * exact.T(X, Y))
    s22 = lambda X, Y: (2 * params.mu * _fd4(u2, X, Y, h, 1)
                        + params.lam * (_fd4(u1, X, Y, h, 0) + _fd4(u2, X, Y, h, 1))
                        - params.alpha * exact.p(X, Y) - params.beta * exact.T(X, Y))
    s12 = lambda X, Y: params.mu * (_fd4(u1, X, Y, h, 1) + _fd4(u2, X, Y, h, 0))

    f1 = -om**2 * rho * u1(x, y) - om**2 * params.rho_f * w1(x, y) \
        - _fd4(s11, x, y, h, 0) - _fd4(s12, x, y, h, 1)
    f2 = -om**2 * rho * u2(x, y) - om**2 * params.rho_f * w2(x, y) \
        - _fd4(s12, x, y, h, 0) - _fd4(s22, x, y, h, 1)
    fa1, fa2 = exact.f(x, y)
    assert np.max(np.abs(f1 - fa1)) < 1e-6
    assert np.max(np.abs(f2 - fa2)) < 1e-6

    g1 = -om**2 * params.rho_f * u1(x, y) - om**2 * rho_w * w1(x, y) \
        + 1j * om * w1(x, y) + _fd4(exact.p, x, y, h, 0)
    g2 = -om**2 * params.rho_f * u2(x, y) - om**2 * rho_w * w2(x, y) \
        + 1j * om * w2(x, y) + _fd4(exact.p, x, y, h, 1)
    ga1, ga2 = exact.g(x, y)
    assert np.max(np.abs(g1 - ga1)) < 1e-6
    assert np.max(np.abs(g2 - ga2)) < 1e-6

    Tx = lambda X, Y: _fd4(exact.T, X, Y, h, 0)
    Ty = lambda X, Y: _fd4(exact.T, X, Y, h, 1)
    lap_T = _fd4(Tx, x, y, h, 0) + _fd4(Ty, x, y, h, 1)
    H = 1j * params.a0 * exact.T(x, y) - 1j * params.b0 * exact.p(x, y) \
        + 1j * params.beta * div_u - params.theta_coefficient * lap_T
    assert np.max(np.abs(H - exact.H(x, y))) < 1e-6

    r_m = params.c0 * exact.p(x, y) - params.b0 * exact.T(x, y) \
        + params.alpha * div_u + _fd4(w1, x, y, h, 0) + _fd4(w2, x, y, h, 1)
    assert np.max(np.abs(r_m - exact.mass_source(x, y))) < 1e-6


def test_interpolated_exact_solution_has_small_norms():
    """Interpolating the exact solution gives O(h) errors; this bounds the
    discretization baseline independently of any solve."""
    params = ProblemParams()
    exact = exact_fields(params)
    errs = {}
    for n in (8, 16):
        mesh = tag_boundary(uniform_unit_square(n), all_dirichlet_config())
        layout = build_dof_layout(mesh)
        vec = np.zeros(layout.total, dtype=complex)
        vec[: layout.n_u] = interp_bv(mesh, layout, exact.u)
        vec[layout.block_slice("w")] = interp_rt(mesh, exact.w)
        vec[layout.block_slice("p")] = project_p0(mesh, exact.p)
        vec[layout.block_slice("T")] = interp_p1(mesh, exact.T)
        errs[n] = error_norms(mesh, layout, vec, exact)
    for v in ("u", "w", "p", "T"):
        rate = np.log2(errs[8][v] / errs[16][v])
        assert 0.8 < rate < 1.3


def test_error_norms_vanish_for_exact_discrete_field():
    """Put an exactly representable field into the discrete spaces and
    measure its own error: all norms at quadrature-noise level."""
    import sympy as sym
    from thermoporofem.mms import _solution_from_expressions

    x, y = sym.symbols("x y", real=True)
    params = ProblemParams()
    # fields lying inside the discrete spaces: linear u, constant w, p, linear T
    exact = _solution_from_expressions(
        params,
        sym.Integer(1) + 2 * x - y, x + 3 * y,
        sym.Integer(2), sym.Integer(-1),
        sym.Integer(4), 1 + x + y,
    )
    mesh = tag_boundary(uniform_unit_square(4), all_dirichlet_config())
    layout = build_dof_layout(mesh)
    vec = np.zeros(layout.total, dtype=complex)
    vec[: layout.n_u] = interp_bv(mesh, layout, exact.u)
    vec[layout.block_slice("w")] = interp_rt(mesh, exact.w)
    vec[layout.block_slice("p")] = project_p0(mesh, exact.p)
    vec[layout.block_slice("T")] = interp_p1(mesh, exact.T)
    norms = error_norms(mesh, layout, vec, exact)
    for v in ("u", "w", "p", "T"):
        assert norms[v] < 1e-12


def test_single_solve_matches_published_row():
    params = ProblemParams(lam=1e6)
    exact = exact_fields(params)
    mesh, layout, sol, report = solve_mms(params, 8, exact)
    norms = error_norms(mesh, layout, sol, exact)
    assert norms["u"] == pytest.approx(1.348, rel=0.1)
    assert norms["w"] == pytest.approx(2.595e-1, rel=0.1)
    assert norms["p"] == pytest.approx(6.536e-2, rel=0.1)
    assert norms["T"] == pytest.approx(4.329e-1, rel=0.1)
    assert report.residual <= 1e-10


def test_locking_free_u_error_insensitive_to_lambda():
    n = 16
    errs = {}
    for lam in (1.0, 1e6):
        params = ProblemParams(lam=lam)
        exact = exact_fields(params)
        mesh, layout, sol, _ = solve_mms(params, n, exact)
        errs[lam] = error_norms(mesh, layout, sol, exact)["u"]
    assert abs(errs[1.0] - errs[1e6]) / errs[1e6] < 0.05


def test_convergence_study_structure(tmp_path):
    report = convergence_study(ProblemParams(), [4, 8])
    assert report.ns == [4, 8]
    assert np.isnan(report.rates["u"][0])
    assert 0.8 < report.rates["u"][1] < 1.2
    text = report.table()
    assert "1/8" in text

    path = tmp_path / "out.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "h,e_u,rate_u,e_w,rate_w,e_p,rate_p,e_T,rate_T"
    assert len(lines) == 3


def test_convergence_study_rejects_unsorted():
    with pytest.raises(ValueError):
        convergence_study(ProblemParams(), [8, 4])


def test_anisotropic_tensor_rejected_for_exact_fields():
    params = ProblemParams(permeability=np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        exact_fields(params)
