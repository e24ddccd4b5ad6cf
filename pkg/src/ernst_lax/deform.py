"""Hidden-symmetry deformations from contour projection of ``Psi``.

The deformation density is

    delta g / alpha = (1 / 2 pi i) \\oint dlambda / lambda (g Psi + Psi^T g),

evaluated with the equispaced trapezoid rule on a circle about the origin.
For a finite Laurent span the rule is exact and picks out ``Phi^(0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ernst import as_matrix, ernst_matrix_residual
from .errors import TooFewNodes
from .grid import MatrixField, interior_max_norm, interior_slice
from .spectral import SpectralFunction, evaluate_psi

REALITY_TOL = 1e-10


@dataclass(frozen=True)
class Contour:
    radius: float = 1.0
    node_count: int = 16

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("contour radius must be positive")
        if self.node_count < 8:
            raise TooFewNodes(f"need at least 8 contour nodes, got {self.node_count}")

    def nodes(self) -> np.ndarray:
        # theta_k = 2 pi k / K; nodes k and K - k are complex conjugates
        k = np.arange(self.node_count)
        return self.radius * np.exp(2j * np.pi * k / self.node_count)

    def require_exact(self, n_min: int, n_max: int):
        need = 2 * max(abs(n_min), abs(n_max)) + 2
        if self.node_count <= need:
            raise TooFewNodes(
                f"{self.node_count} nodes cannot resolve Laurent span [{n_min}, {n_max}]; need > {need}"
            )


def _contour_average(S: SpectralFunction, contour: Contour, integrand) -> np.ndarray:
    contour.require_exact(S.tower.n_min, S.tower.n_max)
    total = None
    for lam in contour.nodes():
        term = integrand(evaluate_psi(S, lam)).values
        total = term.copy() if total is None else total + term
    # (1/2 pi i) dlambda/lambda = dtheta / 2 pi on the circle
    return total / contour.node_count


def contour_project(S: SpectralFunction, contour: Contour) -> MatrixField:
    """``(1/2 pi i) \\oint Psi dlambda / lambda``; equals ``Phi^(0)`` for finite spans."""
    return MatrixField(S.grid, _contour_average(S, contour, lambda psi: psi))


@dataclass(frozen=True, eq=False)
class Deformation:
    delta_g: MatrixField
    imag_violation: float = 0.0
    reality_ok: bool = True
    label: str = ""


def hidden_symmetry_delta(g, S: SpectralFunction, contour: Contour) -> Deformation:
    m = as_matrix(g)
    vals = _contour_average(S, contour, lambda psi: m @ psi + psi.T @ m)
    imag = float(np.abs(vals.imag).max())
    return Deformation(MatrixField(m.grid, vals), imag, imag <= REALITY_TOL, "hidden")


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass
class SweepReport:
    alphas: list
    residuals: list
    det_drift: list
    floor: float
    slope: float | None
    fitted: int
    det_slope: float | None
    det_fitted: int
    flags: list = field(default_factory=list)

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.alphas, self.residuals, self.det_drift))


def default_alphas() -> list[float]:
    return list(np.logspace(-1, -4, 7))


def deformation_residual_sweep(g, delta: Deformation, alphas=None, margin: int = 2,
                               floor_factor: float = 10.0) -> SweepReport:
    """Ernst residual of ``g + alpha delta_g`` over a decreasing alpha sweep.

    The floor is the residual of ``g`` itself; the log-log slope is fitted
    over points at least ``floor_factor`` times above it.  The determinant
    drift is fitted over points ``floor_factor`` above its first-order part
    ``alpha |tr(g^-1 delta_g)|``, so its slope is 2 when that part vanishes.
    """
    m = as_matrix(g)
    alphas = default_alphas() if alphas is None else [float(a) for a in alphas]
    if any(a <= 0 for a in alphas) or any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be a decreasing positive sequence")
    sl = interior_slice(m.grid, margin)
    floor = interior_max_norm(ernst_matrix_residual(m), margin)
    first_order = float(np.abs((m.inv() @ delta.delta_g).trace().values[sl]).max())

    residuals, drifts = [], []
    for a in alphas:
        gp = m + delta.delta_g * a
        residuals.append(interior_max_norm(ernst_matrix_residual(gp), margin))
        drifts.append(float(np.abs(gp.det().values[sl] - 1.0).max()))

    flags = []
    keep = [k for k, r in enumerate(residuals) if r >= floor_factor * floor]
    slope = None
    if len(keep) >= 2:
        slope = _loglog_slope([alphas[k] for k in keep], [residuals[k] for k in keep])
    else:
        flags.append("at floor")

    dkeep = [k for k, d in enumerate(drifts) if d >= floor_factor * alphas[k] * first_order and d > 0]
    det_slope = None
    if len(dkeep) >= 2:
        det_slope = _loglog_slope([alphas[k] for k in dkeep], [drifts[k] for k in dkeep])
    else:
        flags.append("det drift at floor")
    if not delta.reality_ok:
        flags.append("complex deformation")
    return SweepReport(alphas, residuals, drifts, floor, slope, len(keep), det_slope, len(dkeep), flags)
