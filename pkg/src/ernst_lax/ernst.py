"""The Ernst equation: parametrization, exact solutions and field residuals.

A stationary axisymmetric vacuum metric is encoded by a real symmetric
unimodular 2x2 matrix ``g(rho, z)`` satisfying

    (rho g^-1 g_rho)_rho + (rho g^-1 g_z)_z = 0,

or equivalently by the complex potential ``E = f + i omega`` with
``Re(E) lap(E) = grad(E)^2`` (axisymmetric flat Laplacian).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    BadParameters,
    BadParametrization,
    NonPositiveF,
    SingularityOnGrid,
    UnknownSolution,
)
from .exterior import OneForm, TwoForm, d1, hodge_star, wedge
from .grid import (
    Grid,
    MatrixField,
    ScalarField,
    commute,
    coordinate_fields,
    integrate_from_base,
    partial_rho,
    partial_z,
)

SOLUTION_PARAMS = {
    "flat": (),
    "curzon": ("m",),
    "schwarzschild": ("m",),
    "kerr": ("p", "q", "k"),
}


@dataclass(frozen=True, eq=False)
class ErnstPotential:
    f: ScalarField
    omega: ScalarField

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @property
    def E(self) -> ScalarField:
        return ScalarField(self.grid, self.f.values.real + 1j * self.omega.values.real)


@dataclass(frozen=True, eq=False)
class MetricSolution:
    g: MatrixField
    name: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.g.grid

    def structure_defects(self) -> dict:
        """Max deviations from reality, symmetry and unit determinant."""
        v = self.g.values
        return {
            "imag": float(np.abs(v.imag).max()),
            "asymmetry": float(np.abs(v - np.swapaxes(v, -1, -2)).max()),
            "det_minus_one": float(np.abs(self.g.det().values - 1.0).max()),
        }


def as_matrix(g) -> MatrixField:
    return g.g if isinstance(g, MetricSolution) else g


def potential_to_matrix(p: ErnstPotential, name: str = "custom", params=None) -> MetricSolution:
    f = p.f.values.real
    w = p.omega.values.real
    if np.any(f <= 0):
        raise NonPositiveF("f must be strictly positive on the grid")
    vals = np.empty(p.grid.shape + (2, 2))
    vals[..., 0, 0] = 1.0 / f
    vals[..., 0, 1] = vals[..., 1, 0] = w / f
    vals[..., 1, 1] = (f * f + w * w) / f
    return MetricSolution(MatrixField(p.grid, vals), name, dict(params or {}))


def matrix_to_potential(g) -> ErnstPotential:
    m = as_matrix(g)
    g11 = m.values[..., 0, 0].real
    if np.any(g11 <= 0):
        raise BadParametrization("g_11 must be positive to recover (f, omega)")
    return ErnstPotential(
        ScalarField(m.grid, 1.0 / g11),
        ScalarField(m.grid, m.values[..., 0, 1].real / g11),
    )


def _potential_from_E(grid: Grid, E: np.ndarray) -> ErnstPotential:
    return ErnstPotential(ScalarField(grid, E.real), ScalarField(grid, E.imag))


def catalog_potential(name: str, params: dict, grid: Grid) -> ErnstPotential:
    if name not in SOLUTION_PARAMS:
        raise UnknownSolution(f"unknown solution {name!r}")
    missing = [k for k in SOLUTION_PARAMS[name] if k not in params]
    extra = [k for k in params if k not in SOLUTION_PARAMS[name]]
    if missing or extra:
        raise BadParameters(f"{name}: missing {missing}, unexpected {extra}")
    r, z = grid.mesh()
    if name == "flat":
        E = np.ones(grid.shape, dtype=complex)
    elif name == "curzon":
        m = float(params["m"])
        if m <= 0:
            raise BadParameters("curzon mass must be positive")
        E = np.exp(-2 * m / np.hypot(r, z)).astype(complex)
    elif name == "schwarzschild":
        m = float(params["m"])
        if m <= 0:
            raise BadParameters("schwarzschild mass must be positive")
        rp, rm = np.hypot(r, z - m), np.hypot(r, z + m)
        E = ((rp + rm - 2 * m) / (rp + rm + 2 * m)).astype(complex)
    else:
        p, q, k = (float(params[key]) for key in ("p", "q", "k"))
        if abs(p * p + q * q - 1) > 1e-12:
            raise BadParameters(f"kerr needs p^2 + q^2 = 1, got {p * p + q * q!r}")
        if k <= 0:
            raise BadParameters("kerr half rod length k must be positive")
        rp, rm = np.hypot(r, z - k), np.hypot(r, z + k)
        x = (rp + rm) / (2 * k)
        y = (rp - rm) / (2 * k)
        xi = p * x - 1j * q * y
        E = (xi - 1) / (xi + 1)
    if np.any(E.real <= 0):
        bad = tuple(int(v) for v in np.argwhere(E.real <= 0)[0])
        raise SingularityOnGrid(f"{name}: f <= 0 at node {bad} (ergoregion or rod on grid)")
    return _potential_from_E(grid, E)


def catalog_solution(name: str, params: dict | None, grid: Grid) -> MetricSolution:
    params = dict(params or {})
    return potential_to_matrix(catalog_potential(name, params, grid), name, params)


def connection(g) -> OneForm:
    """``g^-1 dg = A drho + B dz`` from stencil derivatives of ``g``."""
    m = as_matrix(g)
    ginv = m.inv()
    return OneForm(ginv @ partial_rho(m), ginv @ partial_z(m))


def ernst_matrix_residual(g) -> MatrixField:
    gamma = connection(g)
    rho, _ = coordinate_fields(gamma.grid)
    return partial_rho(gamma.rho * rho) + partial_z(gamma.z * rho)


def ernst_scalar_residual(p: ErnstPotential) -> ScalarField:
    if np.any(p.f.values.real <= 0):
        raise NonPositiveF("f must be strictly positive on the grid")
    E = p.E
    rho, _ = coordinate_fields(p.grid)
    Er, Ez = partial_rho(E), partial_z(E)
    lap = partial_rho(Er) + Er / rho + partial_z(Ez)
    return E.real * lap - (Er * Er + Ez * Ez)


def maurer_cartan(gamma: OneForm) -> TwoForm:
    return d1(gamma) + wedge(gamma, gamma)


def divergence_form(gamma: OneForm) -> TwoForm:
    rho, _ = coordinate_fields(gamma.grid)
    return d1(hodge_star(gamma) * rho)


class PotentialX(NamedTuple):
    X: MatrixField
    second_order_residual: MatrixField
    path_disagreement: MatrixField


def potential_X(g, base=None) -> PotentialX:
    """Matrix potential with ``dX = rho *gamma`` and its second-order residual.

    ``X`` vanishes at ``base`` (default: the grid's interior base node) and
    is integrated along rho-then-z paths; the z-then-rho integral is kept
    for the path-independence check.
    """
    gamma = connection(g)
    rho, _ = coordinate_fields(gamma.grid)
    sigma = hodge_star(gamma) * rho
    X = integrate_from_base(sigma, base, "rho-then-z")
    X_alt = integrate_from_base(sigma, base, "z-then-rho")
    Xr, Xz = partial_rho(X), partial_z(X)
    residual = Xr - (partial_rho(Xr) + partial_z(Xz)) * rho + commute(Xr, Xz)
    return PotentialX(X, residual, X - X_alt)
