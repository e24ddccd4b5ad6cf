"""Spectral-parameter assembly of the charge tower and the linear system.

``Psi(lambda) = sum_n lambda^n Phi^(n)`` is kept as its (finite) Laurent
coefficients, so the lambda-derivative is exact term by term.  The linear
system checked here is

    rho * D Psi - 2 lambda Psi_lambda dz - (1/lambda) d Psi = 0,

whose integrability is equivalent to the Ernst equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .charges import ChargeTower, _gamma
from .errors import ZeroLambda
from .exterior import OneForm, commutator, d0, hodge_star
from .grid import Grid, MatrixField, ScalarField, coordinate_fields, partial_rho, partial_z
from .symmetry import covariant_derivative


def _check_lambda(lam) -> complex:
    lam = complex(lam)
    if lam == 0:
        raise ZeroLambda("the spectral parameter must be nonzero")
    return lam


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    tower: ChargeTower
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> Grid:
        return self.tower.grid

    def _sums(self, lam: complex):
        if lam not in self._cache:
            psi = np.zeros(self.grid.shape + (2, 2), dtype=complex)
            dpsi = np.zeros_like(psi)
            for n in self.tower.levels():
                vals = self.tower[n].values
                psi += lam**n * vals
                if n != 0:
                    dpsi += n * lam ** (n - 1) * vals
            self._cache[lam] = (MatrixField(self.grid, psi), MatrixField(self.grid, dpsi))
        return self._cache[lam]


def evaluate_psi(S: SpectralFunction, lam) -> MatrixField:
    return S._sums(_check_lambda(lam))[0]


def evaluate_psi_lambda(S: SpectralFunction, lam) -> MatrixField:
    return S._sums(_check_lambda(lam))[1]


# -- residuals of the linear system -----------------------------------------


def lax_residual_fields(g, psi: MatrixField, psi_lambda: MatrixField, lam) -> OneForm:
    """``rho * D Psi - 2 lambda Psi_lambda dz - (1/lambda) d Psi`` for explicit fields."""
    lam = _check_lambda(lam)
    gamma = _gamma(g)
    rho, _ = coordinate_fields(psi.grid)
    lhs = hodge_star(covariant_derivative(gamma, psi)) * rho
    lhs = OneForm(lhs.rho, lhs.z - (2 * lam) * psi_lambda)
    return lhs - d0(psi) * (1 / lam)


def lax_residual_exterior(g, S: SpectralFunction, lam) -> OneForm:
    return lax_residual_fields(g, evaluate_psi(S, lam), evaluate_psi_lambda(S, lam), lam)


def lax_component_residuals(g, psi: MatrixField, psi_lambda: MatrixField, lam):
    """Residuals of the two first-order equations of the pair.

    Returns ``(rho D_rho Psi - 2 lambda Psi_lambda - Psi_z/lambda,
    rho D_z Psi + Psi_rho/lambda)``.
    """
    lam = _check_lambda(lam)
    gamma = _gamma(g)
    rho, _ = coordinate_fields(psi.grid)
    D = covariant_derivative(gamma, psi)
    first = (D.rho * rho - (2 * lam) * psi_lambda) - partial_z(psi) * (1 / lam)
    second = D.z * rho + partial_rho(psi) * (1 / lam)
    return first, second


def star_form_residual_fields(g, psi: MatrixField, psi_lambda: MatrixField, lam) -> OneForm:
    """``*d Psi + lambda rho (d Psi + [gamma, Psi]) - 2 lambda^2 Psi_lambda drho``."""
    lam = _check_lambda(lam)
    gamma = _gamma(g)
    rho, _ = coordinate_fields(psi.grid)
    dpsi = d0(psi)
    out = hodge_star(dpsi) + (dpsi + commutator(gamma, psi)) * rho * lam
    return OneForm(out.rho - (2 * lam**2) * psi_lambda, out.z)


def star_form_residual(g, S: SpectralFunction, lam) -> OneForm:
    return star_form_residual_fields(g, evaluate_psi(S, lam), evaluate_psi_lambda(S, lam), lam)


def truncation_boundary(tower: ChargeTower, N: int, lam) -> OneForm:
    """Telescoped remainder of the ``[-N, N]`` truncation.

    Summing the recursion over ``-N <= n <= N`` leaves
    ``lambda^N d Phi^(N+1) - lambda^(-N-1) d Phi^(-N)``; ``tower`` must
    therefore contain level ``N + 1``.
    """
    lam = _check_lambda(lam)
    return d0(tower[N + 1]) * lam**N - d0(tower[-N]) * lam ** (-N - 1)


# -- the invariant s ----------------------------------------------------------


class SpectralInvariant(NamedTuple):
    s: ScalarField
    s_lambda: ScalarField
    L1: ScalarField
    L2: ScalarField


def spectral_invariant(grid: Grid, lam) -> SpectralInvariant:
    """``s = z - lambda rho^2 / 2 + 1/(2 lambda)`` and its two annihilation residuals."""
    lam = _check_lambda(lam)
    r, z = grid.mesh()
    s = ScalarField(grid, z - lam * r**2 / 2 + 1 / (2 * lam))
    s_lam = ScalarField(grid, -(r**2) / 2 - 1 / (2 * lam**2) + 0 * z)
    rho, _ = coordinate_fields(grid)
    s_r, s_z = partial_rho(s), partial_z(s)
    L1 = rho * s_r - s_lam * (2 * lam) - s_z * (1 / lam)
    L2 = rho * s_z + s_r * (1 / lam)
    return SpectralInvariant(s, s_lam, L1, L2)


# -- Belinski-Zakharov variant and the map onto Psi ------------------------


def bz_residual(g, phi: MatrixField, phi_lambda: MatrixField, lam, bracket: str = "left") -> OneForm:
    """``rho (*d Phi + (*gamma) Phi) - 2 lambda Phi_lambda dz - (1/lambda) d Phi``.

    ``bracket="commutator"`` swaps the left product for ``[*gamma, Phi]``.
    """
    lam = _check_lambda(lam)
    gamma = _gamma(g)
    sg = hodge_star(gamma)
    if bracket == "left":
        coupling = sg @ phi
    elif bracket == "commutator":
        coupling = commutator(sg, phi)
    else:
        raise ValueError(f"bracket must be 'left' or 'commutator', got {bracket!r}")
    rho, _ = coordinate_fields(phi.grid)
    lhs = (hodge_star(d0(phi)) + coupling) * rho
    lhs = OneForm(lhs.rho, lhs.z - (2 * lam) * phi_lambda)
    return lhs - d0(phi) * (1 / lam)


@dataclass(frozen=True)
class MatrixProfile:
    """A matrix function ``F(s)`` of one complex argument and its derivative.

    Both callables take an array ``s`` and return an array of shape
    ``s.shape + (2, 2)``.
    """

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    label: str = "F"


def linear_profile(M) -> MatrixProfile:
    M = np.asarray(M, dtype=complex)
    return MatrixProfile(
        lambda s: s[..., None, None] * M,
        lambda s: np.broadcast_to(M, s.shape + (2, 2)),
        "linear",
    )


def _expm_2x2(K: np.ndarray, s: np.ndarray) -> np.ndarray:
    t = np.trace(K) / 2
    K0 = K - t * np.eye(2)
    mu = np.sqrt(complex(-np.linalg.det(K0)))
    x = s[..., None, None]
    if abs(mu) < 1e-12:
        body = np.eye(2) + x * K0
    else:
        body = np.cosh(x * mu) * np.eye(2) + (np.sinh(x * mu) / mu) * K0
    return np.exp(x * t) * body


def exp_profile(K) -> MatrixProfile:
    """``F(s) = exp(s K)`` for a constant 2x2 ``K`` (closed-form exponential)."""
    K = np.asarray(K, dtype=complex)
    return MatrixProfile(
        lambda s: _expm_2x2(K, s),
        lambda s: K @ _expm_2x2(K, s),
        "exp",
    )


class SpectralSample(NamedTuple):
    psi: MatrixField
    psi_lambda: MatrixField


def profile_of_invariant(profile: MatrixProfile, grid: Grid, lam) -> SpectralSample:
    """``F(s)`` on the grid at ``lam`` together with ``d/dlambda F(s)``."""
    inv = spectral_invariant(grid, lam)
    s = inv.s.values
    val = MatrixField(grid, profile.value(s))
    der = MatrixField(grid, profile.derivative(s)) * inv.s_lambda
    return SpectralSample(val, der)


def bz_map(phi: MatrixField, phi_lambda: MatrixField, profile: MatrixProfile, lam) -> SpectralSample:
    """``Psi = Phi F(s) Phi^-1`` and its exact lambda-derivative.

    ``F`` should be traceless (and real for real arguments) for ``Psi`` to
    meet the physical conditions; that is the caller's choice.
    """
    T, T_lam = profile_of_invariant(profile, phi.grid, lam)
    phi_inv = phi.inv()
    psi = phi @ T @ phi_inv
    # d(Phi^-1) = -Phi^-1 Phi_lambda Phi^-1
    psi_lam = phi_lambda @ T @ phi_inv + phi @ T_lam @ phi_inv - psi @ phi_lambda @ phi_inv
    return SpectralSample(psi, psi_lam)
