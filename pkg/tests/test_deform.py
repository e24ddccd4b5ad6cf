import numpy as np
import pytest

from conftest import margin, order
from ernst_lax.charges import ChargeTower, build_tower
from ernst_lax.deform import (
    Contour,
    Deformation,
    contour_project,
    default_alphas,
    deformation_residual_sweep,
    hidden_symmetry_delta,
)
from ernst_lax.errors import TooFewNodes
from ernst_lax.ernst import catalog_solution
from ernst_lax.exterior import form_max_abs, form_norm
from ernst_lax.grid import MatrixField, make_grid, partial_z
from ernst_lax.spectral import SpectralFunction
from ernst_lax.symmetry import characteristic_catalog

G = make_grid(((0.5, 2.5), (-1.0, 1.0)), (21, 21))


def const_tower(mats, grid=G):
    return SpectralFunction(ChargeTower({n: MatrixField.constant(grid, m) for n, m in mats.items()}, (0, 0)))


def test_contour_validation():
    with pytest.raises(TooFewNodes):
        Contour(1.0, 6)
    with pytest.raises(ValueError):
        Contour(-1.0, 16)
    with pytest.raises(TooFewNodes):
        contour_project(const_tower({0: np.eye(2), 8: np.eye(2)}), Contour(1.0, 16))
    nodes = Contour(2.0, 8).nodes()
    assert np.allclose(np.abs(nodes), 2.0)
    assert np.allclose(nodes[1], np.conj(nodes[-1]))


def test_projection_picks_level_zero(rng):
    mats = {n: rng.normal(size=(2, 2)) for n in (-1, 0, 1)}
    S = const_tower(mats)
    assert form_max_abs(contour_project(S, Contour()) - MatrixField.constant(G, mats[0])) < 1e-13
    assert form_max_abs(contour_project(const_tower({1: mats[1]}), Contour())) < 1e-13
    a = contour_project(S, Contour(0.5, 16))
    b = contour_project(S, Contour(2.0, 16))
    assert form_max_abs(a - b) < 1e-12


def test_delta_of_pure_positive_level_vanishes(rng):
    g = catalog_solution("curzon", {"m": 1.0}, G)
    S = const_tower({0: np.zeros((2, 2)), 1: rng.normal(size=(2, 2))})
    d = hidden_symmetry_delta(g, S, Contour())
    assert form_max_abs(d.delta_g) < 1e-13


def test_delta_is_symmetric_and_real(curzon_pair):
    g = curzon_pair[0]
    t = build_tower(g, characteristic_catalog("z_translation", g), 2, -2, margin=margin(g.grid))
    d = hidden_symmetry_delta(g, SpectralFunction(t), Contour())
    v = d.delta_g.values
    assert np.abs(v - np.swapaxes(v, -1, -2)).max() == 0.0
    assert d.reality_ok and d.imag_violation < 1e-12
    # the truncated projection is g Phi0 + Phi0^T g = 2 d_z g for the z-translation seed
    expected = partial_z(g.g) * 2.0
    assert form_max_abs(d.delta_g - expected) <= 1e-12 * form_max_abs(expected)


def test_first_order_determinant(curzon_pair):
    norms = []
    for g in curzon_pair:
        t = build_tower(g, characteristic_catalog("z_translation", g), 1, -1, margin=margin(g.grid))
        d = hidden_symmetry_delta(g, SpectralFunction(t), Contour())
        norms.append(form_norm((g.g.inv() @ d.delta_g).trace(), margin(g.grid)))
    assert 1.8 <= order(*norms) <= 2.3


def test_default_alphas():
    a = default_alphas()
    assert len(a) == 7 and a[0] == pytest.approx(0.1) and a[-1] == pytest.approx(1e-4)


def test_zero_deformation_sits_at_floor():
    g = catalog_solution("curzon", {"m": 1.0}, G)
    rep = deformation_residual_sweep(g, Deformation(MatrixField.zeros(G)))
    assert rep.slope is None and "at floor" in rep.flags
    assert np.allclose(rep.residuals, rep.floor)
    assert len(rep.rows()) == 7


def test_sweep_rejects_bad_alphas():
    g = catalog_solution("curzon", {"m": 1.0}, G)
    with pytest.raises(ValueError):
        deformation_residual_sweep(g, Deformation(MatrixField.zeros(G)), [1e-3, 1e-2])


def test_sweep_slopes_symmetry_vs_random():
    grid = make_grid(((1.0, 3.0), (-1.0, 1.0)), (201, 201))
    g = catalog_solution("curzon", {"m": 1.0}, grid)
    alphas = np.logspace(-1, -4, 19)
    c = np.array([[0.3, 1.0], [-0.5, -0.3]])
    sym = hidden_symmetry_delta(g, const_tower({0: c / np.linalg.norm(c)}, grid), Contour())
    rep = deformation_residual_sweep(g, sym, alphas, margin=20)
    assert 1.8 <= rep.slope <= 2.2
    assert 1.8 <= rep.det_slope <= 2.2
    r, z = grid.mesh()
    bump = np.zeros(grid.shape + (2, 2))
    bump[..., 0, 0] = np.sin(r) * np.cos(z)
    bump[..., 1, 1] = -np.sin(r) * np.cos(z)
    rep = deformation_residual_sweep(g, Deformation(MatrixField(grid, bump)), alphas, margin=20)
    assert 0.8 <= rep.slope <= 1.2
