"""Covariant derivatives and the linear symmetry condition.

An infinitesimal deformation ``delta g = alpha g Phi`` maps solutions to
solutions exactly when ``d(rho * D Phi) = 0``, with ``D = d + [gamma, .]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ernst import as_matrix, connection
from .errors import BackgroundMismatch, GridMismatch, UnknownCharacteristic
from .exterior import OneForm, commutator, d0, d1, hodge_star
from .grid import MatrixField, coordinate_fields

CHARACTERISTICS = ("constant", "z_translation", "rho_translation", "linear_z")


@dataclass(frozen=True, eq=False)
class SymmetryCharacteristic:
    phi: MatrixField
    provenance: str = "user"

    def Q(self, g) -> MatrixField:
        """The characteristic in ``delta g = alpha Q`` form, ``Q = g Phi``."""
        return as_matrix(g) @ self.phi


def covariant_derivative(gamma: OneForm, phi: MatrixField) -> OneForm:
    if gamma.grid != phi.grid:
        raise GridMismatch("connection and field on different grids")
    return d0(phi) + commutator(gamma, phi)


def symmetry_residual(g, phi) -> MatrixField:
    """Coefficient of ``d(rho * D Phi)``; vanishes on solutions for symmetries."""
    if isinstance(phi, SymmetryCharacteristic):
        phi = phi.phi
    gamma = connection(g)
    rho, _ = coordinate_fields(phi.grid)
    return d1(hodge_star(covariant_derivative(gamma, phi)) * rho).coeff


def _is_flat(g: MatrixField, tol: float = 1e-14) -> bool:
    return bool(np.abs(g.values - np.eye(2)).max() <= tol)


def characteristic_catalog(name: str, g, c=None) -> SymmetryCharacteristic:
    """Seed characteristics.

    ``constant`` and ``linear_z`` take a constant matrix ``c``.
    ``rho_translation`` (``Phi = A``) is *not* a symmetry; it is kept as a
    negative control for residual checkers.
    """
    m = as_matrix(g)
    if name == "constant":
        return SymmetryCharacteristic(MatrixField.constant(m.grid, c), "constant")
    if name == "z_translation":
        return SymmetryCharacteristic(connection(m).z, "z_translation")
    if name == "rho_translation":
        return SymmetryCharacteristic(connection(m).rho, "rho_translation")
    if name == "linear_z":
        if not _is_flat(m):
            raise BackgroundMismatch("linear_z is a symmetry only on the flat background")
        _, z = coordinate_fields(m.grid)
        return SymmetryCharacteristic(MatrixField.constant(m.grid, c) * z, "linear_z")
    raise UnknownCharacteristic(f"unknown characteristic {name!r}")

