"""Matrix-valued differential forms on the (rho, z) half-plane.

0-forms are plain :class:`MatrixField` objects.  A 1-form stores its
``drho`` and ``dz`` coefficients, a 2-form its ``drho^dz`` coefficient.
Products are exterior products with matrix (non-commutative) multiplication
of the coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreeError, GridMismatch
from .grid import Field, MatrixField, ScalarField, node_norms, interior_slice, partial_rho, partial_z


@dataclass(frozen=True, eq=False)
class OneForm:
    rho: MatrixField
    z: MatrixField

    __array_ufunc__ = None

    def __post_init__(self):
        if self.rho.grid != self.z.grid:
            raise GridMismatch("1-form components on different grids")

    @property
    def grid(self):
        return self.rho.grid

    @classmethod
    def zeros(cls, grid) -> "OneForm":
        return cls(MatrixField.zeros(grid), MatrixField.zeros(grid))

    def __add__(self, other):
        if isinstance(other, OneForm):
            return OneForm(self.rho + other.rho, self.z + other.z)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OneForm):
            return OneForm(self.rho - other.rho, self.z - other.z)
        return NotImplemented

    def __neg__(self):
        return OneForm(-self.rho, -self.z)

    def __mul__(self, other):
        if isinstance(other, ScalarField) or np.isscalar(other):
            return OneForm(self.rho * other, self.z * other)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        # 1-form times 0-form, componentwise
        if isinstance(other, MatrixField):
            return OneForm(self.rho @ other, self.z @ other)
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, MatrixField):
            return OneForm(other @ self.rho, other @ self.z)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class TwoForm:
    coeff: MatrixField

    __array_ufunc__ = None

    @property
    def grid(self):
        return self.coeff.grid

    def __add__(self, other):
        if isinstance(other, TwoForm):
            return TwoForm(self.coeff + other.coeff)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, TwoForm):
            return TwoForm(self.coeff - other.coeff)
        return NotImplemented

    def __neg__(self):
        return TwoForm(-self.coeff)

    def __mul__(self, other):
        if isinstance(other, ScalarField) or np.isscalar(other):
            return TwoForm(self.coeff * other)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MatrixField):
            return TwoForm(self.coeff @ other)
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, MatrixField):
            return TwoForm(other @ self.coeff)
        return NotImplemented


def degree(form) -> int:
    if isinstance(form, MatrixField):
        return 0
    if isinstance(form, OneForm):
        return 1
    if isinstance(form, TwoForm):
        return 2
    raise DegreeError(f"not a matrix-valued form: {type(form).__name__}")


def hodge_star(sigma: OneForm) -> OneForm:
    """Dual 1-form: ``*drho = dz``, ``*dz = -drho``."""
    return OneForm(-sigma.z, sigma.rho)


def wedge(sigma: OneForm, xi: OneForm) -> TwoForm:
    if sigma.grid != xi.grid:
        raise GridMismatch("wedge of forms on different grids")
    return TwoForm(sigma.rho @ xi.z - sigma.z @ xi.rho)


def d0(phi: MatrixField) -> OneForm:
    return OneForm(partial_rho(phi), partial_z(phi))


def d1(sigma: OneForm) -> TwoForm:
    return TwoForm(partial_rho(sigma.z) - partial_z(sigma.rho))


def _product(a, b):
    da, db = degree(a), degree(b)
    if da == 1 and db == 1:
        return wedge(a, b)
    if da + db > 2:
        raise DegreeError(f"product of degrees {da} and {db} exceeds 2 in two dimensions")
    return a @ b


def commutator(zeta, xi):
    """Graded-free commutator ``zeta^xi - xi^zeta`` (0-0, 0-1, 1-1, 0-2 pairs)."""
    return _product(zeta, xi) - _product(xi, zeta)


def anticommutator(sigma: OneForm, xi: OneForm) -> TwoForm:
    if degree(sigma) != 1 or degree(xi) != 1:
        raise DegreeError("anticommutator is defined here for pairs of 1-forms")
    return wedge(sigma, xi) + wedge(xi, sigma)


def form_node_norms(form) -> np.ndarray:
    if isinstance(form, Field):
        return node_norms(form)
    if isinstance(form, OneForm):
        return np.sqrt(node_norms(form.rho) ** 2 + node_norms(form.z) ** 2)
    if isinstance(form, TwoForm):
        return node_norms(form.coeff)
    raise DegreeError(f"cannot take the norm of {type(form).__name__}")


def form_norm(form, margin: int = 2) -> float:
    """Interior max norm of a 0-, 1- or 2-form."""
    sl = interior_slice(form.grid, margin)
    return float(form_node_norms(form)[sl].max())


def form_max_abs(form) -> float:
    """Max norm over every node, boundary included (for algebraic identities)."""
    return float(form_node_norms(form).max())
