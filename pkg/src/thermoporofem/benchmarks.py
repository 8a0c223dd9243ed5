"""Cantilever bracket and layered domain runs with pressure diagnostics.

Both problems live on the unit square.  The cantilever is clamped on the
left and loaded by a downward traction on top, with no-flow and adiabatic
conditions all around; the layered domain has a three-layer permeability
profile, an upward traction and a pressure datum on the bottom, and is
clamped on top.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assembly import LoadData, apply_essential_bcs, assemble_load, assemble_operator
from .fespace import DofLayout, build_dof_layout
from .linsolve import SolveReport, solve
from .mesh import (
    BoundaryConfig,
    Mesh,
    on_bottom,
    on_left,
    on_right,
    on_top,
    tag_boundary,
    uniform_unit_square,
)
from .params import ProblemParams


@dataclass
class BenchmarkSpec:
    """One named benchmark configuration, fully assembled."""

    name: str
    n: int
    params: ProblemParams
    boundary: BoundaryConfig
    load: LoadData
    pin_temperature: bool = False  # pin one T DOF when no essential T data exist


@dataclass
class BenchmarkFields:
    """Solution fields of one benchmark solve at a single frequency."""

    omega: float
    mesh: Mesh
    layout: DofLayout
    solution: np.ndarray
    report: SolveReport

    @property
    def pressure(self) -> np.ndarray:
        """Cellwise complex pressure values."""
        return self.layout.split(self.solution)[2]

    @property
    def displacement(self) -> np.ndarray:
        """Vertex displacement, shape (nv, 2)."""
        nv = self.mesh.num_vertices
        return self.solution[: 2 * nv].reshape(nv, 2)

    @property
    def temperature(self) -> np.ndarray:
        """Vertex temperature values."""
        return self.layout.split(self.solution)[3]

    @property
    def flux(self) -> np.ndarray:
        """Facet normal fluxes of the filtration displacement."""
        return self.layout.split(self.solution)[1]


def cantilever_setup(n: int) -> BenchmarkSpec:
    """Left-clamped bracket under a unit downward traction on the top side.

    No-flow and adiabatic conditions everywhere, near-impermeable medium
    (K = 1e-7 I) with weak conductivity (Theta = 1e-4 I) and vanishing
    storage/coupling coefficients a0 = b0 = c0 = 0.
    """
    if n < 8:
        raise ValueError("cantilever mesh must have n >= 8")
    params = ProblemParams(
        a0=0.0, b0=0.0, c0=0.0,
        permeability=1e-7, conductivity=1e-4,
        delta=0.1,
    )

    def not_left(mid):
        return ~on_left(mid)

    def never(mid):
        return np.zeros(len(mid), dtype=bool)

    def always(mid):
        return np.ones(len(mid), dtype=bool)

    boundary = BoundaryConfig(
        gamma_d=on_left, gamma_t=not_left,
        gamma_p=always, gamma_f=never,
        gamma_r=never, gamma_h=always,
        allow_empty_dirichlet=True,
    )

    def traction(x, y):
        on = np.asarray(y) > 1.0 - 1e-12
        z = np.zeros_like(np.asarray(x, dtype=float))
        return z, np.where(on, -1.0, 0.0)

    load = LoadData(traction=traction)
    return BenchmarkSpec("cantilever", n, params, boundary, load,
                         pin_temperature=True)


def layered_permeability(x: float, y: float) -> np.ndarray:
    """Three-decade permeability profile: 1e-1, 1e-2, 1e-3 from bottom to top."""
    if y <= 0.25:
        k = 1e-1
    elif y <= 0.75:
        k = 1e-2
    else:
        k = 1e-3
    return k * np.eye(2)


def layered_setup(n: int) -> BenchmarkSpec:
    """Layered column clamped on top, loaded from below.

    The bottom side carries an upward traction of magnitude 1e-2 together
    with a pressure datum of the same size; the lateral sides are traction
    free, impermeable and adiabatic, and the temperature is held at zero
    on the top.  Elastic moduli come from E = 100, nu = 0.45.
    """
    if n % 4 != 0:
        raise ValueError("layered mesh resolution must be a multiple of 4 "
                         "so layer interfaces fall on mesh lines")
    from .params import lame_from_E_nu

    lam, mu = lame_from_E_nu(100.0, 0.45)
    params = ProblemParams(lam=lam, mu=mu, delta=0.1,
                           permeability=layered_permeability)

    def not_top(mid):
        return ~on_top(mid)

    def not_bottom(mid):
        return ~on_bottom(mid)

    def lateral(mid):
        return on_left(mid) | on_right(mid)

    def top_or_lateral(mid):
        return on_top(mid) | lateral(mid)

    boundary = BoundaryConfig(
        gamma_d=on_top, gamma_t=not_top,
        gamma_p=top_or_lateral, gamma_f=on_bottom,
        gamma_r=on_top, gamma_h=not_top,
    )

    def traction(x, y):
        on = np.asarray(y) < 1e-12
        z = np.zeros_like(np.asarray(x, dtype=float))
        return z, np.where(on, 1e-2, 0.0)

    def p_datum(x, y):
        return np.full_like(np.asarray(x, dtype=float), 1e-2)

    load = LoadData(traction=traction, p_datum=p_datum)
    return BenchmarkSpec("layered", n, params, boundary, load)


def run_benchmark(
    spec: BenchmarkSpec,
    omega_list: list[float] | None = None,
    solver_method: str = "direct",
) -> list[BenchmarkFields]:
    """Solve the benchmark once per frequency."""
    omega_list = list(omega_list) if omega_list is not None else [spec.params.omega]
    mesh = tag_boundary(uniform_unit_square(spec.n), spec.boundary)
    layout = build_dof_layout(mesh)

    out = []
    for omega in omega_list:
        params = replace(spec.params, omega=float(omega))
        system = assemble_operator(mesh, layout, params)
        rhs = assemble_load(mesh, layout, params, spec.load)
        pins = [(layout.offset_T, 0.0 + 0.0j)] if spec.pin_temperature else None
        constrained = apply_essential_bcs(system, rhs, spec.load, pin_dofs=pins)
        x_free, report = solve(constrained.matrix, constrained.rhs,
                               method=solver_method)
        out.append(BenchmarkFields(float(omega), mesh, layout,
                                   constrained.expand(x_free), report))
    return out


def pressure_line_sample(
    fields: BenchmarkFields, x0: float = 0.5
) -> tuple[np.ndarray, np.ndarray]:
    """(y, |p|) at the cell centers nearest the vertical line x = x0.

    One sample per horizontal cell row, ordered bottom to top.
    """
    mesh = fields.mesh
    cent = mesh.cell_centroids()
    p = fields.pressure
    n = round(1.0 / mesh.h)
    ys = np.empty(n)
    mags = np.empty(n)
    for j in range(n):
        lo, hi = j / n, (j + 1) / n
        row = np.flatnonzero((cent[:, 1] > lo) & (cent[:, 1] < hi))
        pick = row[np.argmin(np.abs(cent[row, 0] - x0))]
        ys[j] = cent[pick, 1]
        mags[j] = abs(p[pick])
    return ys, mags


def pressure_column_sample(
    fields: BenchmarkFields, which: str = "left"
) -> tuple[np.ndarray, np.ndarray]:
    """(y, Re p) over the first column of cells adjacent to a lateral side."""
    mesh = fields.mesh
    cent = mesh.cell_centroids()
    p = fields.pressure
    n = round(1.0 / mesh.h)
    x0 = 0.0 if which == "left" else 1.0
    ys = np.empty(n)
    vals = np.empty(n)
    for j in range(n):
        lo, hi = j / n, (j + 1) / n
        row = np.flatnonzero((cent[:, 1] > lo) & (cent[:, 1] < hi))
        pick = row[np.argmin(np.abs(cent[row, 0] - x0))]
        ys[j] = cent[pick, 1]
        vals[j] = p[pick].real
    return ys, vals


def oscillation_metric(samples: np.ndarray) -> float:
    """Total variation of a sample sequence divided by its range.

    Equals 1 for monotone sequences and grows with every direction change;
    a constant sequence counts as monotone.
    """
    s = np.asarray(samples, dtype=float)
    if len(s) < 3:
        raise ValueError("need at least 3 samples")
    tv = float(np.sum(np.abs(np.diff(s))))
    rng = float(s.max() - s.min())
    if rng == 0.0:
        return 1.0
    return tv / rng


# -- exports ----------------------------------------------------------------


def export_pressure_csv(fields: BenchmarkFields, path) -> None:
    """Cell-center pressure table: x, y, Re p, Im p, |p|."""
    cent = fields.mesh.cell_centroids()
    p = fields.pressure
    with open(path, "w") as fh:
        fh.write("x,y,re_p,im_p,abs_p\n")
        for (x, y), val in zip(cent, p):
            fh.write(f"{x:.10g},{y:.10g},{val.real:.8e},{val.imag:.8e},"
                     f"{abs(val):.8e}\n")


def export_vertex_csv(fields: BenchmarkFields, path) -> None:
    """Vertex table: x, y, Re/Im of both displacement components and T."""
    verts = fields.mesh.vertices
    u = fields.displacement
    T = fields.temperature
    with open(path, "w") as fh:
        fh.write("x,y,re_u1,im_u1,re_u2,im_u2,re_T,im_T\n")
        for k, (x, y) in enumerate(verts):
            fh.write(f"{x:.10g},{y:.10g},"
                     f"{u[k, 0].real:.8e},{u[k, 0].imag:.8e},"
                     f"{u[k, 1].real:.8e},{u[k, 1].imag:.8e},"
                     f"{T[k].real:.8e},{T[k].imag:.8e}\n")


def export_line_csv(ys: np.ndarray, values: np.ndarray, path) -> None:
    """Two-column line-sample table."""
    with open(path, "w") as fh:
        fh.write("y,value\n")
        for y, v in zip(ys, values):
            fh.write(f"{y:.10g},{v:.8e}\n")


def export_vtk(fields: BenchmarkFields, path) -> None:
    """Legacy-VTK unstructured grid with pressure and displacement data."""
    mesh = fields.mesh
    p = fields.pressure
    u = fields.displacement
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nbenchmark fields\nASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {mesh.num_vertices} double\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.10g} {y:.10g} 0\n")
        nc = mesh.num_cells
        fh.write(f"CELLS {nc} {4 * nc}\n")
        for tri in mesh.cells:
            fh.write(f"3 {tri[0]} {tri[1]} {tri[2]}\n")
        fh.write(f"CELL_TYPES {nc}\n")
        fh.write("5\n" * nc)
        fh.write(f"CELL_DATA {nc}\n")
        for label, vals in (("re_p", p.real), ("im_p", p.imag), ("abs_p", np.abs(p))):
            fh.write(f"SCALARS {label} double 1\nLOOKUP_TABLE default\n")
            for v in vals:
                fh.write(f"{v:.8e}\n")
        fh.write(f"POINT_DATA {mesh.num_vertices}\n")
        fh.write("VECTORS re_u double\n")
        for ux, uy in u:
            fh.write(f"{ux.real:.8e} {uy.real:.8e} 0\n")
