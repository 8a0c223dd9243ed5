"""Physical and numerical coefficients of the thermo-poroelastic model.

All quantities are used as dimensionless numbers; no unit conversion is
performed.  The permeability and heat-conductivity tensors may be given as a
scalar (isotropic constant), a constant 2x2 matrix, or a callable
``(x, y) -> 2x2 matrix`` for piecewise/position-dependent media.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

TensorField = Union[float, np.ndarray, Callable[[float, float], np.ndarray]]


def _as_tensor(value: TensorField, x: float, y: float) -> np.ndarray:
    if callable(value):
        return np.asarray(value(x, y), dtype=float)
    if np.isscalar(value):
        return float(value) * np.eye(2)
    return np.asarray(value, dtype=float)


@dataclass(frozen=True)
class ProblemParams:
    """Coefficient set of the frequency-domain thermo-poroelastic problem."""

    omega: float = 1.0       # angular frequency
    rho_s: float = 0.03      # solid matrix density
    rho_f: float = 0.03      # saturating fluid density
    phi: float = 0.5         # porosity
    a: float = 1.0           # tortuosity
    lam: float = 1.0         # first Lame coefficient
    mu: float = 1.0          # second Lame coefficient
    alpha: float = 1.0       # Biot-Willis constant
    beta: float = 0.8        # thermal stress coefficient
    a0: float = 0.2          # thermal capacity
    b0: float = 0.1          # thermal dilatation coefficient
    c0: float = 0.2          # specific storage coefficient
    tau: float = 0.015       # Maxwell-Vernotte-Cattaneo relaxation time
    permeability: TensorField = 1.0   # hydraulic mobility tensor K
    conductivity: TensorField = 1.0   # effective thermal conductivity Theta
    delta: float = 0.1       # temperature stabilization parameter

    def __post_init__(self):
        if not 0.0 < self.phi < 1.0:
            raise ValueError(f"porosity must be in (0,1), got {self.phi}")
        if self.a < 1.0:
            raise ValueError(f"tortuosity must be >= 1, got {self.a}")
        if self.mu <= 0.0 or self.lam <= 0.0:
            raise ValueError("Lame coefficients must be positive")
        if not self.phi < self.alpha <= 1.0:
            raise ValueError(
                f"Biot-Willis constant must satisfy phi < alpha <= 1, got {self.alpha}"
            )
        if self.beta <= 0.0:
            raise ValueError("thermal stress coefficient must be positive")
        for name in ("a0", "b0", "c0", "tau", "delta"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    # -- tensor evaluation -------------------------------------------------

    def permeability_at(self, x: float, y: float) -> np.ndarray:
        K = _as_tensor(self.permeability, x, y)
        _check_spd(K, "permeability")
        return K

    def conductivity_at(self, x: float, y: float) -> np.ndarray:
        Th = _as_tensor(self.conductivity, x, y)
        _check_spd(Th, "conductivity")
        return Th

    def replace(self, **changes) -> "ProblemParams":
        return replace(self, **changes)

    @property
    def rho(self) -> float:
        return derived_densities(self)[0]

    @property
    def rho_w(self) -> float:
        return derived_densities(self)[1]

    @property
    def theta_coefficient(self) -> complex:
        """Complex factor multiplying (Theta grad T, grad s) in the weak form.

        Equals i/(i*omega - omega^2*tau) = (1 - i*omega*tau)/(omega + omega^3*tau^2).
        """
        w, t = self.omega, self.tau
        return (1.0 - 1j * w * t) / (w + w**3 * t**2)


def _check_spd(M: np.ndarray, name: str) -> None:
    if M.shape != (2, 2):
        raise ValueError(f"{name} tensor must be 2x2, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-14):
        raise ValueError(f"{name} tensor must be symmetric")
    if np.linalg.eigvalsh(M)[0] <= 0.0:
        raise ValueError(f"{name} tensor must be positive definite")


def derived_densities(p: ProblemParams) -> tuple[float, float]:
    """Mixture density rho = phi*rho_f + (1-phi)*rho_s and rho_w = a*rho_f/phi."""
    rho = p.phi * p.rho_f + (1.0 - p.phi) * p.rho_s
    rho_w = p.a * p.rho_f / p.phi
    return rho, rho_w


def lame_from_E_nu(E: float, nu: float) -> tuple[float, float]:
    """Lame coefficients from elasticity modulus E and Poisson ratio nu."""
    if E <= 0.0:
        raise ValueError("elasticity modulus must be positive")
    if not 0.0 <= nu < 0.5:
        raise ValueError("Poisson ratio must lie in [0, 0.5)")
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    return lam, mu


def E_nu_from_lame(lam: float, mu: float) -> tuple[float, float]:
    """Inverse of :func:`lame_from_E_nu`."""
    nu = lam / (2.0 * (lam + mu))
    E = mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
    return E, nu


def critical_frequency(p: ProblemParams, k_max: float) -> float:
    """Validity bound of the dynamic Darcy law: phi/(2*pi*a*k_max*rho_f)."""
    if p.rho_f == 0.0:
        raise ValueError("fluid density must be nonzero")
    if k_max <= 0.0:
        raise ValueError("k_max must be positive")
    return p.phi / (2.0 * math.pi * p.a * k_max * p.rho_f)


def k_max_over_points(p: ProblemParams, points: np.ndarray) -> float:
    """Largest permeability eigenvalue sampled over the given (n,2) points."""
    pts = np.atleast_2d(points)
    return max(np.linalg.eigvalsh(p.permeability_at(x, y))[-1] for x, y in pts)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(p: ProblemParams, mode: str = "strict") -> ValidationReport:
    """Check the model-coefficient assumptions.

    ``strict`` enforces c0 > 0 and a0 >= b0^2/c0; ``experimental`` only warns
    on those, allowing the degenerate a0 = b0 = c0 = 0 runs.
    """
    if mode not in ("strict", "experimental"):
        raise ValueError(f"unknown validation mode {mode!r}")
    report = ValidationReport()
    issues = report.violations if mode == "strict" else report.warnings

    if p.c0 <= 0.0:
        issues.append(f"storage coefficient must be positive, got c0={p.c0}")
    elif p.a0 * p.c0 < p.b0**2:
        issues.append(
            f"thermal capacity too small: a0={p.a0} < b0^2/c0={p.b0**2 / p.c0}"
        )
    if not p.phi < p.alpha <= 1.0:
        issues.append(f"alpha={p.alpha} outside (phi, 1] with phi={p.phi}")
    if p.omega * p.tau >= 1.0:
        report.warnings.append(
            f"omega*tau = {p.omega * p.tau} >= 1 violates the relaxation bound"
        )
    if mode == "strict" and report.violations:
        return report
    return report


# -- configuration file ----------------------------------------------------

_TENSOR_KEYS = {"K": "permeability", "Theta": "conductivity"}
_SCALAR_KEYS = {
    "omega": "omega", "rho_s": "rho_s", "rho_f": "rho_f", "phi": "phi",
    "a": "a", "lambda": "lam", "mu": "mu", "alpha": "alpha", "beta": "beta",
    "a0": "a0", "b0": "b0", "c0": "c0", "tau": "tau", "delta": "delta",
}


def params_from_mapping(mapping: dict[str, float]) -> ProblemParams:
    """Build parameters from a flat ``key = value`` mapping.

    Keys mirror the coefficient symbols: a0, b0, c0, lambda, mu, alpha, beta,
    rho_s, rho_f, K, Theta, phi, a, tau, omega, delta.  K and Theta are
    isotropic scalars in this format.
    """
    kwargs = {}
    for key, value in mapping.items():
        if key in _SCALAR_KEYS:
            kwargs[_SCALAR_KEYS[key]] = float(value)
        elif key in _TENSOR_KEYS:
            kwargs[_TENSOR_KEYS[key]] = float(value)
        else:
            raise KeyError(f"unknown parameter key {key!r}")
    return ProblemParams(**kwargs)


def load_params(path: str, overrides: dict[str, float] | None = None) -> ProblemParams:
    """Read a flat ``key = value`` parameter file; '#' starts a comment."""
    mapping: dict[str, float] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            mapping[key] = float(value)
    if overrides:
        mapping.update(overrides)
    return params_from_mapping(mapping)
