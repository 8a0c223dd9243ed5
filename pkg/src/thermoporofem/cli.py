"""Command-line interface: convergence studies, benchmarks, spectra.

Everything is emitted as CSV so downstream tooling (plotting, comparison)
never recomputes physics.  Exit codes: 0 success, 1 solver failure,
2 failed --check thresholds, 3 resonance assumption violated, 64 usage
error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
from pathlib import Path

import numpy as np

from .benchmarks import (
    cantilever_setup,
    export_line_csv,
    export_pressure_csv,
    export_vertex_csv,
    export_vtk,
    layered_setup,
    oscillation_metric,
    pressure_column_sample,
    pressure_line_sample,
    run_benchmark,
)
from .fespace import build_dof_layout
from .linsolve import SolverError
from .mesh import all_dirichlet_config, tag_boundary, uniform_unit_square
from .mms import VARIABLES, convergence_study, error_norms, exact_fields, solve_mms
from .params import ProblemParams, lame_from_E_nu, load_params, params_from_mapping
from .spectral import assemble_gram_pair, check_assumption, smallest_eigs

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CHECK = 2
EXIT_ASSUMPTION = 3
EXIT_USAGE = 64

# parameter sets behind the published convergence tables
PRESETS = {
    "table-lambda1e6": {"lambda": 1e6},
    "table-a0b0c0": {"a0": 0.0, "b0": 0.0, "c0": 0.0},
    "table-omega25": {"omega": 25.0},
    "table-delta0": {"delta": 0.0},
}

SWEEP_THETAS = [10.0**e for e in range(-7, 1)]
SWEEP_DELTAS = [0.0, 0.001, 0.01, 0.1, 1.0]
OMEGA_SWEEP = [1.0] + [5.0 * k for k in range(1, 11)]


def _parse_list(text, cast, flag):
    try:
        return [cast(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"could not parse {flag} value {text!r}")


class UsageError(Exception):
    pass


def _parse_overrides(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = float(value)
    return out


def _build_params(args):
    overrides = dict(PRESETS.get(getattr(args, "preset", None) or "", {}))
    overrides.update(_parse_overrides(getattr(args, "set", None)))
    if getattr(args, "params", None):
        return load_params(args.params, overrides)
    base = {k: v for k, v in overrides.items()}
    return params_from_mapping(base)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- converge ---------------------------------------------------------------


def _sweep_delta_theta_point(task):
    """One (theta, delta, n) solve of the low-conductivity sweep."""
    theta, delta, n = task
    lam, mu = lame_from_E_nu(10.0, 0.499)
    params = ProblemParams(lam=lam, mu=mu, a0=0.0, b0=0.0, c0=0.0,
                           tau=0.0, permeability=1e-4,
                           conductivity=theta, delta=delta)
    exact = exact_fields(params)
    mesh, layout, sol, _ = solve_mms(params, n, exact)
    return theta, delta, n, error_norms(mesh, layout, sol, exact)["T"]


def _run_sweep_delta_theta(args, out: Path) -> int:
    ns = args.mesh or [8, 16, 32]
    tasks = [(theta, delta, n)
             for n in ns for delta in SWEEP_DELTAS for theta in SWEEP_THETAS]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_delta_theta_point, tasks))
    else:
        results = [_sweep_delta_theta_point(t) for t in tasks]

    by_n = {}
    for theta, delta, n, e_T in results:
        by_n.setdefault(n, []).append((theta, delta, e_T))
    for n, rows in sorted(by_n.items()):
        path = out / f"sweep-delta-theta_n{n}.csv"
        with open(path, "w") as fh:
            fh.write("theta,delta,e_T\n")
            for theta, delta, e_T in sorted(rows):
                fh.write(f"{theta:.6g},{delta:.6g},{e_T:.6e}\n")
        print(f"wrote {path}")
    return EXIT_OK


def _sweep_omega_point(task):
    omega, n = task
    params = ProblemParams(omega=omega)
    exact = exact_fields(params)
    mesh, layout, sol, _ = solve_mms(params, n, exact)
    return omega, n, error_norms(mesh, layout, sol, exact)


def _run_sweep_omega(args, out: Path) -> int:
    ns = args.mesh or [8, 16, 32, 64]
    tasks = [(omega, n) for omega in OMEGA_SWEEP for n in ns]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_omega_point, tasks))
    else:
        results = [_sweep_omega_point(t) for t in tasks]
    path = out / "sweep-omega.csv"
    with open(path, "w") as fh:
        fh.write("omega,h,e_u,e_w,e_p,e_T\n")
        for omega, n, errs in results:
            fh.write(f"{omega:.6g},{1.0 / n:.10g},"
                     + ",".join(f"{errs[v]:.6e}" for v in VARIABLES) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_converge(args) -> int:
    out = _outdir(args)
    if args.preset == "sweep-delta-theta":
        return _run_sweep_delta_theta(args, out)
    if args.preset == "sweep-omega":
        return _run_sweep_omega(args, out)

    if args.preset and args.preset not in PRESETS:
        raise UsageError(f"unknown preset {args.preset!r}; choose from "
                         + ", ".join([*PRESETS, "sweep-delta-theta", "sweep-omega"]))
    params = _build_params(args)
    ns = args.mesh or [8, 16, 32, 64]
    if not ns:
        raise UsageError("empty mesh list")

    report = convergence_study(params, ns, solver_method=args.solver)
    print(report.table())
    name = args.preset or "converge"
    path = out / f"{name}.csv"
    report.to_csv(path)
    print(f"wrote {path}")

    if args.check:
        bad = []
        for v in VARIABLES:
            final = report.rates[v][-1]
            if not np.isfinite(final) or final < 0.9:
                bad.append(f"{v}: final rate {final:.3f} < 0.9")
        if bad:
            print("rate check FAILED: " + "; ".join(bad))
            return EXIT_CHECK
        print("rate check passed")
    return EXIT_OK


# -- benchmark --------------------------------------------------------------


def cmd_benchmark(args) -> int:
    out = _outdir(args)
    if args.name == "cantilever":
        spec = cantilever_setup(args.n)
    elif args.name == "layered":
        spec = layered_setup(args.n)
    else:
        raise UsageError(f"unknown benchmark {args.name!r}")

    omegas = args.omega or [spec.params.omega]
    for fields in run_benchmark(spec, omegas, solver_method=args.solver):
        tag = f"{args.name}_n{args.n}_omega{fields.omega:g}"
        export_pressure_csv(fields, out / f"{tag}_pressure.csv")
        export_vertex_csv(fields, out / f"{tag}_vertex.csv")
        if args.vtk:
            export_vtk(fields, out / f"{tag}.vtk")
        if args.name == "cantilever":
            ys, vals = pressure_column_sample(fields, "left")
            metric = oscillation_metric(vals)
            label = "left-column Re p"
        else:
            ys, vals = pressure_line_sample(fields)
            metric = oscillation_metric(vals)
            label = "midline |p|"
        export_line_csv(ys, vals, out / f"{tag}_line.csv")
        print(f"{tag}: oscillation metric ({label}) = {metric:.4f}")
    return EXIT_OK


# -- spectrum ---------------------------------------------------------------


def cmd_spectrum(args) -> int:
    out = _outdir(args)
    params = _build_params(args)
    mesh = tag_boundary(uniform_unit_square(args.n), all_dirichlet_config())
    layout = build_dof_layout(mesh)
    A, M, _ = assemble_gram_pair(mesh, layout, params, reduced=not args.full_div)
    k = args.k
    if k > A.shape[0]:
        print(f"warning: k={k} exceeds space dimension {A.shape[0]}, clamping")
        k = A.shape[0]
    try:
        kappas, _ = smallest_eigs(A, M, k=k)
    except RuntimeError as exc:
        print(f"eigensolver failure: {exc}")
        return EXIT_SOLVER
    report = check_assumption(kappas, params.omega, tol=args.tol)
    path = out / f"spectrum_n{args.n}.csv"
    report.to_csv(path)
    print("kappa:", " ".join(f"{kap:.6e}" for kap in report.kappas))
    print(f"omega^2 = {report.omega_sq:g}, gamma_min = {report.gamma_min:.6e}, "
          f"modes below omega^2: {report.m_bar}")
    print(f"wrote {path}")
    if not report.assumption_satisfied:
        print("verdict: VIOLATED (omega^2 coincides with an eigenvalue)")
        return EXIT_ASSUMPTION
    print("verdict: OK")
    return EXIT_OK


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoporofem",
        description="Mixed finite element solver for frequency-domain "
                    "thermo-poroelasticity on the unit square.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--params", help="flat key=value parameter file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="parameter override (repeatable)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--solver", default="direct",
                       choices=["direct", "real-block", "iterative"])

    p = sub.add_parser("converge", help="manufactured-solution convergence study")
    common(p)
    p.add_argument("--preset", help="named parameter set: "
                   + ", ".join([*PRESETS, "sweep-delta-theta", "sweep-omega"]))
    p.add_argument("--mesh", type=str, default=None,
                   help="comma-separated resolutions, e.g. 8,16,32,64")
    p.add_argument("--check", action="store_true",
                   help="fail (exit 2) if final convergence rates drop below 0.9")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("benchmark", help="cantilever or layered pressure run")
    p.add_argument("name", help="cantilever | layered")
    common(p)
    p.add_argument("--n", type=int, default=32, help="mesh resolution")
    p.add_argument("--omega", type=str, default=None,
                   help="comma-separated frequencies")
    p.add_argument("--vtk", action="store_true", help="also write legacy VTK files")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("spectrum", help="elasticity eigenvalues and resonance gap")
    common(p)
    p.add_argument("--n", type=int, default=4, help="mesh resolution")
    p.add_argument("--k", type=int, default=10, help="number of modes")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="resonance proximity tolerance")
    p.add_argument("--full-div", action="store_true",
                   help="use the exact divergence in the stiffness inner product")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    if getattr(args, "mesh", None) is not None and isinstance(args.mesh, str):
        args.mesh = _parse_list(args.mesh, int, "--mesh")
        if not args.mesh:
            print("error: empty mesh list", file=sys.stderr)
            return EXIT_USAGE
    if getattr(args, "omega", None) is not None and isinstance(args.omega, str):
        args.omega = _parse_list(args.omega, float, "--omega")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
