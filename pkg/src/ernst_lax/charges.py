"""Towers of nonlocal conserved charges.

Starting from a symmetry characteristic ``Phi^0`` the recursion

    d Phi^(n+1) = rho * D Phi^(n) - 2 n Phi^(n) dz

is integrated upward (path integration of a closed 1-form) and downward
(transport of the implicit system for ``Phi^(n)`` along grid lines).  Every
step reports a certificate: the path-kind disagreement going up, the
re-evaluated z-equation residual going down.  Both vanish at second order
on solutions of the Ernst equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .ernst import as_matrix, connection
from .errors import Inconsistent, NotClosed
from .exterior import OneForm, d1, hodge_star
from .grid import (
    MatrixField,
    coordinate_fields,
    integrate_from_base,
    interior_max_norm,
    partial_rho,
    partial_z,
)
from .symmetry import covariant_derivative


def _gamma(g) -> OneForm:
    return g if isinstance(g, OneForm) else connection(as_matrix(g))


def recursion_rhs(g, phi: MatrixField, n: int) -> OneForm:
    """The 1-form ``rho * D phi - 2 n phi dz`` whose potential is the next level."""
    gamma = _gamma(g)
    rho, _ = coordinate_fields(phi.grid)
    sigma = hodge_star(covariant_derivative(gamma, phi)) * rho
    return OneForm(sigma.rho, sigma.z - 2 * n * phi)


def conservation_residual(g, phi: MatrixField, n: int) -> MatrixField:
    return d1(recursion_rhs(g, phi, n)).coeff


class Step(NamedTuple):
    phi: MatrixField
    certificate: float


def _base_value(phi: MatrixField, base) -> np.ndarray:
    return np.array(phi.values[base])


def forward_step(g, phi: MatrixField, n: int, base_value=None, base=None,
                 tol: float | None = None, margin: int = 2) -> Step:
    """Integrate one level up from ``base`` (value ``base_value``, default 0).

    The certificate is the interior max norm of the difference between the
    rho-then-z and z-then-rho integrals.
    """
    base = phi.grid.default_base() if base is None else tuple(base)
    sigma = recursion_rhs(g, phi, n)
    up = integrate_from_base(sigma, base, "rho-then-z", base_value)
    alt = integrate_from_base(sigma, base, "z-then-rho", base_value)
    cert = interior_max_norm(up - alt, margin)
    if tol is not None and cert > tol:
        raise NotClosed(f"level {n}->{n + 1}: path disagreement {cert:.3e} exceeds {tol:.3e}")
    return Step(up, cert)


# -- backward transport -----------------------------------------------------


def _midpoints(a: np.ndarray) -> np.ndarray:
    """Cubic (4-point Lagrange) values halfway between consecutive samples on axis 0."""
    mid = np.empty((a.shape[0] - 1,) + a.shape[1:], dtype=a.dtype)
    mid[1:-1] = (-a[:-3] + 9 * a[1:-2] + 9 * a[2:-1] - a[3:]) / 16
    mid[0] = (5 * a[0] + 15 * a[1] - 5 * a[2] + a[3]) / 16
    mid[-1] = (5 * a[-1] + 15 * a[-2] - 5 * a[-3] + a[-4]) / 16
    return mid


def _linear_rhs(M, a, r, y):
    return -(M @ y - y @ M) + a[..., None, None] * y + r


def _rk4_lines(M, a, r, h: float, k0: int, y0: np.ndarray) -> np.ndarray:
    """Classical RK4 for ``y' = -[M, y] + a y + r`` along axis 0, both ways from ``k0``.

    ``M``/``r`` have shape ``(n, L, 2, 2)`` and ``a`` shape ``(n, L)``: ``L``
    independent lines sampled at ``n`` nodes with spacing ``h``.
    """
    Mm, am, rm = _midpoints(M), _midpoints(a), _midpoints(r)
    out = np.empty_like(M)
    out[k0] = y0
    for step, stop in ((1, M.shape[0]), (-1, -1)):
        y = y0
        dt = step * h
        for k in range(k0, stop - step, step):
            kn = k + step
            mid = min(k, kn)
            k1 = _linear_rhs(M[k], a[k], r[k], y)
            k2 = _linear_rhs(Mm[mid], am[mid], rm[mid], y + 0.5 * dt * k1)
            k3 = _linear_rhs(Mm[mid], am[mid], rm[mid], y + 0.5 * dt * k2)
            k4 = _linear_rhs(M[kn], a[kn], r[kn], y + dt * k3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            out[kn] = y
    return out


def balancing_base_value(g, phi_next: MatrixField, n: int, base=None):
    """Base value that makes the homogeneous rho-flow stationary at the base node.

    Solves ``(2n/rho) X - [A, X] + (d_z Phi^(n+1))/rho = 0`` at ``base``;
    returns ``None`` when that 4x4 system is singular.  On the flat
    background with ``Phi^0 = c z`` this gives ``Phi^(-1) = c/2``.
    """
    grid = phi_next.grid
    base = grid.default_base() if base is None else tuple(base)
    A = _gamma(g).rho.values[base]
    rho_b = grid.rho[base[0]]
    src = partial_z(phi_next).values[base] / rho_b
    eye = np.eye(2)
    op = (2 * n / rho_b) * np.eye(4) - (np.kron(A, eye) - np.kron(eye, A.T))
    if np.linalg.cond(op) > 1e12:
        return None
    return np.linalg.solve(op, -src.reshape(4)).reshape(2, 2)


def backward_step(g, phi_next: MatrixField, n: int, base_value=None, base=None,
                  tol: float | None = None, margin: int = 2) -> Step:
    """Recover ``Phi^(n)`` from ``Phi^(n+1)``.

    The z-equation is transported with RK4 along the column through
    ``base``, then the rho-equation along every row.  The certificate is the
    z-equation residual re-evaluated with stencils over the whole interior.
    """
    grid = phi_next.grid
    base = grid.default_base() if base is None else tuple(base)
    i0, j0 = base
    gamma = _gamma(g)
    A, B = gamma.rho.values, gamma.z.values
    rho = grid.rho
    y0 = np.zeros((2, 2), dtype=complex) if base_value is None else np.asarray(base_value, dtype=complex)

    P_rho = partial_rho(phi_next).values
    P_z = partial_z(phi_next).values

    # column through the base node: y_z = -[B, y] - P_rho / rho
    col_src = -P_rho[i0] / rho[i0]
    column = _rk4_lines(
        B[i0][:, None], np.zeros((grid.n_z, 1)), col_src[:, None],
        grid.h_z, j0, y0[None],
    )[:, 0]

    # every row: y_rho = -[A, y] + (2n/rho) y + P_z / rho
    coef = np.broadcast_to((2 * n / rho)[:, None], grid.shape)
    row_src = P_z / rho[:, None, None, None]
    vals = _rk4_lines(A, coef, row_src, grid.h_rho, i0, column)
    phi = MatrixField(grid, vals)

    rho_f, _ = coordinate_fields(grid)
    check = partial_z(phi) + (gamma.z @ phi - phi @ gamma.z) + partial_rho(phi_next) / rho_f
    cert = interior_max_norm(check, margin)
    if tol is not None and cert > tol:
        raise Inconsistent(f"level {n + 1}->{n}: z-equation residual {cert:.3e} exceeds {tol:.3e}")
    return Step(phi, cert)


# -- towers -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChargeTower:
    charges: dict
    base: tuple
    base_values: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    provenance: str = "user"

    @property
    def grid(self):
        return self.charges[0].grid if 0 in self.charges else next(iter(self.charges.values())).grid

    @property
    def n_min(self) -> int:
        return min(self.charges)

    @property
    def n_max(self) -> int:
        return max(self.charges)

    def __getitem__(self, n: int) -> MatrixField:
        return self.charges[n]

    def levels(self) -> list[int]:
        return sorted(self.charges)

    def truncate(self, n_lo: int, n_hi: int) -> "ChargeTower":
        keep = {n: f for n, f in self.charges.items() if n_lo <= n <= n_hi}
        return ChargeTower(
            keep, self.base,
            {n: v for n, v in self.base_values.items() if n in keep},
            {n: v for n, v in self.certificates.items() if n in keep},
            self.provenance,
        )


def build_tower(g, seed, n_max: int = 4, n_min: int = -2, base_values=None, base=None,
                tol: float | None = None, margin: int = 2) -> ChargeTower:
    """Build ``Phi^(n)`` for ``n_min <= n <= n_max`` from the seed ``Phi^(0)``.

    Forward levels default to base value 0; backward levels default to
    :func:`balancing_base_value` (0 when that is undefined).
    """
    if not n_min <= 0 <= n_max:
        raise ValueError("need n_min <= 0 <= n_max")
    provenance = getattr(seed, "provenance", "user")
    seed = getattr(seed, "phi", seed)
    grid = seed.grid
    base = grid.default_base() if base is None else tuple(base)
    base_values = dict(base_values or {})
    gamma = _gamma(g)

    charges = {0: seed}
    certs = {}
    used = {0: _base_value(seed, base)}
    for n in range(0, n_max):
        bv = base_values.get(n + 1)
        try:
            step = forward_step(gamma, charges[n], n, bv, base, tol, margin)
        except (NotClosed, Inconsistent) as exc:
            raise type(exc)(f"tower level {n + 1}: {exc}") from exc
        charges[n + 1] = step.phi
        certs[n + 1] = step.certificate
        used[n + 1] = _base_value(step.phi, base)
    for n in range(-1, n_min - 1, -1):
        bv = base_values.get(n)
        if bv is None:
            bv = balancing_base_value(gamma, charges[n + 1], n, base)
        try:
            step = backward_step(gamma, charges[n + 1], n, bv, base, tol, margin)
        except (NotClosed, Inconsistent) as exc:
            raise type(exc)(f"tower level {n}: {exc}") from exc
        charges[n] = step.phi
        certs[n] = step.certificate
        used[n] = _base_value(step.phi, base)
    return ChargeTower(dict(sorted(charges.items())), base, used, certs, provenance)


def forward_backward_roundtrip(g, phi: MatrixField, n: int, base=None) -> MatrixField:
    """``backward(forward(phi)) - phi`` with matching base values."""
    base = phi.grid.default_base() if base is None else tuple(base)
    up = forward_step(g, phi, n, None, base).phi
    back = backward_step(g, up, n, _base_value(phi, base), base).phi
    return back - phi


def backward_forward_roundtrip(g, phi_next: MatrixField, n: int, base=None) -> MatrixField:
    """``forward(backward(phi_next)) - phi_next`` with matching base values."""
    base = phi_next.grid.default_base() if base is None else tuple(base)
    down = backward_step(g, phi_next, n, None, base).phi
    up = forward_step(g, down, n, _base_value(phi_next, base), base).phi
    return up - phi_next

