"""Manufactured-solution verification: exact fields, derived sources,
error norms and convergence studies.

The built-in exact solution prescribes trigonometric/polynomial fields for
all four variables, with the compressible part of the displacement scaled
by 1/(mu+lambda) and 1/(2*lambda) so that its divergence vanishes in the
incompressible limit.  Source terms for all four equations are obtained by
substituting the fields into the strong form; in particular the
mass-balance row receives the (nonzero) residual of the prescribed fields
as data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sym

from .assembly import LoadData, apply_essential_bcs, assemble_load, assemble_operator
from .fespace import CellBasis, DofLayout, build_dof_layout, triangle_rule
from .linsolve import SolveReport, solve
from .mesh import Mesh, all_dirichlet_config, tag_boundary, uniform_unit_square
from .params import ProblemParams, derived_densities

VARIABLES = ("u", "w", "p", "T")
NORM_LABELS = {
    "u": "grad(u-u_h) L2",
    "w": "w-w_h Hdiv",
    "p": "p-p_h L2",
    "T": "grad(T-T_h) L2",
}


def _isotropic_scalar(value, name):
    if callable(value):
        raise ValueError(f"{name} must be a constant isotropic tensor for the "
                         "manufactured-solution path")
    if np.isscalar(value):
        return float(value)
    M = np.asarray(value, dtype=float)
    if not np.allclose(M, M[0, 0] * np.eye(2)):
        raise ValueError(f"{name} must be a multiple of the identity")
    return float(M[0, 0])


def _lambdify(expr):
    fun = sym.lambdify(_XY, expr, modules="numpy")

    def wrapped(x, y):
        out = fun(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.broadcast_to(np.asarray(out, dtype=complex), np.shape(x)).copy()

    return wrapped


_XY = sym.symbols("x y", real=True)


@dataclass
class ExactSolution:
    """Closures for the exact fields, their derivatives, and the sources."""

    u: callable          # (x, y) -> (u1, u2)
    grad_u: callable     # (x, y) -> ((u1x, u1y), (u2x, u2y))
    div_u: callable
    w: callable
    div_w: callable
    p: callable
    T: callable
    grad_T: callable
    f: callable
    g: callable
    H: callable
    mass_source: callable


def exact_fields(params: ProblemParams) -> ExactSolution:
    """Build the prescribed solution and its strong-form sources."""
    x, y = _XY
    lam_c, mu_c = params.lam, params.mu
    pi = sym.pi
    I = sym.I

    re_u1 = sym.sin(2 * pi * y) * (-1 + sym.cos(2 * pi * x)) \
        + sym.sin(pi * x) * sym.sin(pi * y) / (mu_c + lam_c)
    re_u2 = sym.sin(2 * pi * x) * (1 - sym.cos(2 * pi * y)) \
        + sym.sin(pi * x) * sym.sin(pi * y) / (mu_c + lam_c)
    im_u1 = sym.sin(pi * x) * sym.cos(pi * y) + x**2 / (2 * lam_c)
    im_u2 = -sym.cos(pi * x) * sym.sin(pi * y) + y**2 / (2 * lam_c)
    u1 = re_u1 + I * im_u1
    u2 = re_u2 + I * im_u2

    w1 = sym.sin(pi * x) * sym.sin(pi * y) + I * sym.exp(y) * x
    w2 = sym.sin(pi * x) * sym.sin(pi * y) + I * sym.exp(x) * y

    p = sym.sin(pi * x) * sym.sin(pi * y) + I * x * (1 - x) * y * (1 - y)
    T = x * (1 - x) * y * (1 - y) + I * sym.sin(pi * x) * sym.sin(pi * y)

    return _solution_from_expressions(params, u1, u2, w1, w2, p, T)


def _solution_from_expressions(params, u1, u2, w1, w2, p, T) -> ExactSolution:
    x, y = _XY
    I = sym.I
    om = params.omega
    rho, rho_w = derived_densities(params)
    k = _isotropic_scalar(params.permeability, "permeability")
    theta = _isotropic_scalar(params.conductivity, "conductivity")
    c_theta = params.theta_coefficient

    div_u = sym.diff(u1, x) + sym.diff(u2, y)
    div_w = sym.diff(w1, x) + sym.diff(w2, y)

    s11 = 2 * params.mu * sym.diff(u1, x) + params.lam * div_u \
        - params.alpha * p - params.beta * T
    s22 = 2 * params.mu * sym.diff(u2, y) + params.lam * div_u \
        - params.alpha * p - params.beta * T
    s12 = params.mu * (sym.diff(u1, y) + sym.diff(u2, x))

    f1 = -om**2 * rho * u1 - om**2 * params.rho_f * w1 \
        - (sym.diff(s11, x) + sym.diff(s12, y))
    f2 = -om**2 * rho * u2 - om**2 * params.rho_f * w2 \
        - (sym.diff(s12, x) + sym.diff(s22, y))

    g1 = -om**2 * params.rho_f * u1 - om**2 * rho_w * w1 \
        + I * om / k * w1 + sym.diff(p, x)
    g2 = -om**2 * params.rho_f * u2 - om**2 * rho_w * w2 \
        + I * om / k * w2 + sym.diff(p, y)

    r_m = params.c0 * p - params.b0 * T + params.alpha * div_u + div_w

    lap_T = sym.diff(T, x, 2) + sym.diff(T, y, 2)
    H = I * params.a0 * T - I * params.b0 * p + I * params.beta * div_u \
        - sym.sympify(c_theta) * theta * lap_T

    L = _lambdify
    fu1, fu2 = L(u1), L(u2)
    fw1, fw2 = L(w1), L(w2)
    du = [[L(sym.diff(u1, x)), L(sym.diff(u1, y))],
          [L(sym.diff(u2, x)), L(sym.diff(u2, y))]]
    dT = [L(sym.diff(T, x)), L(sym.diff(T, y))]
    ff1, ff2 = L(f1), L(f2)
    fg1, fg2 = L(g1), L(g2)

    return ExactSolution(
        u=lambda xx, yy: (fu1(xx, yy), fu2(xx, yy)),
        grad_u=lambda xx, yy: ((du[0][0](xx, yy), du[0][1](xx, yy)),
                               (du[1][0](xx, yy), du[1][1](xx, yy))),
        div_u=L(div_u),
        w=lambda xx, yy: (fw1(xx, yy), fw2(xx, yy)),
        div_w=L(div_w),
        p=L(p),
        T=L(T),
        grad_T=lambda xx, yy: (dT[0](xx, yy), dT[1](xx, yy)),
        f=lambda xx, yy: (ff1(xx, yy), ff2(xx, yy)),
        g=lambda xx, yy: (fg1(xx, yy), fg2(xx, yy)),
        H=L(H),
        mass_source=L(r_m),
    )


def rhs_from_exact(params: ProblemParams, exact: ExactSolution) -> LoadData:
    """Load data (sources plus Dirichlet/natural boundary values) for the
    manufactured solution."""
    return LoadData(
        f=exact.f,
        g=exact.g,
        mass_source=exact.mass_source,
        H=exact.H,
        p_datum=exact.p,
        u_dirichlet=exact.u,
        w_dirichlet=exact.w,
        T_dirichlet=exact.T,
    )


# -- error norms ------------------------------------------------------------


def error_norms(
    mesh: Mesh,
    layout: DofLayout,
    solution: np.ndarray,
    exact: ExactSolution,
    rule=None,
) -> dict[str, float]:
    """Per-variable error norms of a solved coefficient vector.

    Displacement and temperature in the H1-seminorm, filtration displacement
    in the H(div)-norm, pressure in L2; real and imaginary parts combined.
    """
    rule = rule or triangle_rule(7)
    basis = CellBasis(mesh, layout, rule)
    w = rule.weights
    area = basis.areas
    X = basis.points[:, :, 0]
    Y = basis.points[:, :, 1]

    uvec, wvec, pvec, Tvec = layout.split(solution)

    udofs = basis.u_dofs()
    ucoef = np.where(udofs >= 0, solution[np.clip(udofs, 0, None)], 0.0)
    grad_uh = np.einsum("ci,cqikl->cqkl", ucoef, basis.u_grad)
    (g11, g12), (g21, g22) = exact.grad_u(X, Y)
    ge = np.stack([np.stack([g11, g12], -1), np.stack([g21, g22], -1)], -2) - grad_uh
    e_u = np.einsum("cqkl,q,c->", np.abs(ge) ** 2, w, area)

    wcoef = wvec[basis.w_dofs()]
    wh = np.einsum("ci,cqid->cqd", wcoef, basis.rt_val)
    wex1, wex2 = exact.w(X, Y)
    we = np.stack([wex1, wex2], -1) - wh
    div_wh = np.einsum("ci,ci->c", wcoef, basis.rt_div)
    div_we = exact.div_w(X, Y) - div_wh[:, None]
    e_w = np.einsum("cqd,q,c->", np.abs(we) ** 2, w, area) \
        + np.einsum("cq,q,c->", np.abs(div_we) ** 2, w, area)

    pe = exact.p(X, Y) - pvec[:, None]
    e_p = np.einsum("cq,q,c->", np.abs(pe) ** 2, w, area)

    Tcoef = Tvec[basis.T_dofs()]
    grad_Th = np.einsum("ci,cik->ck", Tcoef, basis.grads)
    gT1, gT2 = exact.grad_T(X, Y)
    gTe = np.stack([gT1, gT2], -1) - grad_Th[:, None, :]
    e_T = np.einsum("cqk,q,c->", np.abs(gTe) ** 2, w, area)

    return {
        "u": float(np.sqrt(e_u)),
        "w": float(np.sqrt(e_w)),
        "p": float(np.sqrt(e_p)),
        "T": float(np.sqrt(e_T)),
    }


# -- convergence studies ----------------------------------------------------


@dataclass
class ErrorReport:
    """Errors and observed rates over a mesh sequence."""

    ns: list[int]
    hs: list[float]
    errors: dict[str, list[float]]     # variable -> per-mesh error
    rates: dict[str, list[float]]      # variable -> per-mesh rate (nan first)
    solve_reports: list[SolveReport]

    def table(self) -> str:
        head = f"{'h':>8}" + "".join(
            f"{NORM_LABELS[v]:>18}{'rate':>7}" for v in VARIABLES
        )
        lines = [head]
        for i, n in enumerate(self.ns):
            row = f"{'1/' + str(n):>8}"
            for v in VARIABLES:
                rate = self.rates[v][i]
                rate_s = "   --" if np.isnan(rate) else f"{rate:5.2f}"
                row += f"{self.errors[v][i]:>18.3e}{rate_s:>7}"
            lines.append(row)
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("h,e_u,rate_u,e_w,rate_w,e_p,rate_p,e_T,rate_T\n")
            for i in range(len(self.ns)):
                cells = [f"{self.hs[i]:.10g}"]
                for v in VARIABLES:
                    cells.append(f"{self.errors[v][i]:.6e}")
                    rate = self.rates[v][i]
                    cells.append("" if np.isnan(rate) else f"{rate:.4f}")
                fh.write(",".join(cells) + "\n")


def solve_mms(
    params: ProblemParams,
    n: int,
    exact: ExactSolution | None = None,
    solver_method: str = "direct",
    solver_tol: float = 1e-10,
):
    """Full pipeline for one mesh: returns (mesh, layout, solution, report)."""
    exact = exact or exact_fields(params)
    mesh = tag_boundary(uniform_unit_square(n), all_dirichlet_config())
    layout = build_dof_layout(mesh)
    system = assemble_operator(mesh, layout, params)
    rhs = assemble_load(mesh, layout, params, rhs_from_exact(params, exact))
    constrained = apply_essential_bcs(system, rhs, rhs_from_exact(params, exact))
    x_free, report = solve(constrained.matrix, constrained.rhs,
                           tol=solver_tol, method=solver_method)
    return mesh, layout, constrained.expand(x_free), report


def convergence_study(
    params: ProblemParams,
    n_list: list[int],
    solver_method: str = "direct",
) -> ErrorReport:
    """Run the manufactured-solution pipeline over a mesh sequence."""
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("mesh list must be strictly increasing")
    exact = exact_fields(params)
    errors = {v: [] for v in VARIABLES}
    reports = []
    for n in n_list:
        mesh, layout, sol, rep = solve_mms(params, n, exact, solver_method)
        norms = error_norms(mesh, layout, sol, exact)
        for v in VARIABLES:
            errors[v].append(norms[v])
        reports.append(rep)
    rates = {
        v: [float("nan")] + [
            float(np.log2(errors[v][i - 1] / errors[v][i]))
            for i in range(1, len(n_list))
        ]
        for v in VARIABLES
    }
    return ErrorReport(
        ns=list(n_list),
        hs=[1.0 / n for n in n_list],
        errors=errors,
        rates=rates,
        solve_reports=reports,
    )
