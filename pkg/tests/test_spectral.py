import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import margin, order
from ernst_lax.charges import ChargeTower, build_tower
from ernst_lax.errors import ZeroLambda
from ernst_lax.ernst import catalog_solution
from ernst_lax.exterior import OneForm, form_max_abs, form_norm, hodge_star
from ernst_lax.grid import MatrixField, coordinate_fields, make_grid
from ernst_lax.spectral import (
    SpectralFunction,
    _expm_2x2,
    bz_map,
    bz_residual,
    evaluate_psi,
    evaluate_psi_lambda,
    exp_profile,
    lax_component_residuals,
    lax_residual_exterior,
    lax_residual_fields,
    linear_profile,
    profile_of_invariant,
    spectral_invariant,
    star_form_residual,
    truncation_boundary,
)
from ernst_lax.symmetry import characteristic_catalog

G = make_grid(((0.5, 2.5), (-1.0, 1.0)), (41, 41))
C = np.array([[0.3, 1.0], [-0.5, -0.3]])
K = np.array([[0.2, 0.7], [-0.4, -0.1]])
LAMBDAS = [0.3, 1.0, 2.0, 0.5 + 0.5j]


def flat_tower(grid=G):
    flat = catalog_solution("flat", {}, grid)
    rho_b = grid.rho[grid.default_base()[0]]
    return flat, build_tower(flat, characteristic_catalog("linear_z", flat, C), 2, -1, {1: -(rho_b**2) / 2 * C})


def test_constant_tower_and_zero_lambda():
    S = SpectralFunction(ChargeTower({0: MatrixField.constant(G, C)}, (0, 0)))
    assert np.allclose(evaluate_psi(S, 0.5).values, C)
    assert form_max_abs(evaluate_psi_lambda(S, 0.5)) == 0.0
    with pytest.raises(ZeroLambda):
        evaluate_psi(S, 0)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_flat_tower_sums_to_c_s(lam):
    flat, tower = flat_tower()
    S = SpectralFunction(tower)
    inv = spectral_invariant(G, lam)
    c = MatrixField.constant(G, C)
    assert form_max_abs(evaluate_psi(S, lam) - c * inv.s) < 1e-10
    assert form_max_abs(evaluate_psi_lambda(S, lam) - c * inv.s_lambda) < 1e-10
    assert form_max_abs(lax_residual_exterior(flat, S, lam)) < 1e-9
    assert form_max_abs(star_form_residual(flat, S, lam)) < 1e-9


def test_invariant_values():
    g = make_grid(((1.0, 2.0), (0.0, 1.0)), (11, 11))
    s = spectral_invariant(g, 1.0).s.values
    assert s[0, 0] == pytest.approx(0.0)
    assert s[-1, -1] == pytest.approx(-0.5)


@pytest.mark.parametrize("lam", [0.3, 1.0, 2 + 1j])
def test_invariant_is_annihilated(lam):
    inv = spectral_invariant(G, lam)
    assert form_max_abs(inv.L1) < 1e-12 and form_max_abs(inv.L2) < 1e-12


def test_zero_psi_has_zero_residuals(curzon_pair):
    g = curzon_pair[0]
    z = MatrixField.zeros(g.grid)
    assert form_max_abs(lax_residual_fields(g, z, z, 0.7)) == 0.0


@pytest.fixture(scope="module")
def curzon_towers(curzon_pair):
    return [build_tower(g, characteristic_catalog("z_translation", g), 3, -2, margin=margin(g.grid)) for g in curzon_pair]


@pytest.mark.parametrize("lam", LAMBDAS)
def test_truncation_identity(curzon_pair, curzon_towers, lam):
    gaps = []
    for g, t in zip(curzon_pair, curzon_towers):
        S = SpectralFunction(t.truncate(-2, 2))
        R = lax_residual_exterior(g, S, lam)
        gaps.append(form_norm(R - truncation_boundary(t, 2, lam), margin(g.grid)))
    assert 1.8 <= order(*gaps) <= 2.2


@pytest.mark.parametrize("lam", LAMBDAS)
def test_component_and_star_forms_agree(curzon_pair, curzon_towers, lam):
    g, t = curzon_pair[0], curzon_towers[0]
    S = SpectralFunction(t.truncate(-2, 2))
    R = lax_residual_exterior(g, S, lam)
    first, second = lax_component_residuals(g, evaluate_psi(S, lam), evaluate_psi_lambda(S, lam), lam)
    assert form_max_abs(R.z - first) == 0.0
    assert form_max_abs(R.rho + second) == 0.0
    SF = star_form_residual(g, S, lam)
    assert form_max_abs(SF + hodge_star(R) * lam) <= 1e-12 * form_max_abs(SF)


def test_real_tower_real_lambda_is_real(curzon_towers):
    S = SpectralFunction(curzon_towers[0])
    for lam in (0.3, 1.0, 2.0):
        assert np.abs(evaluate_psi(S, lam).values.imag).max() <= 1e-12


def test_traceless_seed_traceless_psi(curzon_pair):
    g = curzon_pair[0]
    t = build_tower(g, characteristic_catalog("constant", g, C), 2, -2, margin=margin(g.grid))
    S = SpectralFunction(t)
    for lam in LAMBDAS:
        assert form_norm(evaluate_psi(S, lam).trace(), margin(g.grid)) < 1e-2


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.complex_numbers(max_magnitude=3))
def test_closed_form_exponential_matches_scipy(a, b, c, d, s):
    M = np.array([[a, b], [c, d]], dtype=complex)
    ours = _expm_2x2(M, np.array([s]))[0]
    assert np.allclose(ours, scipy.linalg.expm(s * M), rtol=1e-10, atol=1e-10)


def test_bz_identity_and_rho_fixture():
    flat = catalog_solution("flat", {}, G)
    ident = MatrixField.identity(G)
    zero = MatrixField.zeros(G)
    assert form_max_abs(bz_residual(flat, ident, zero, 0.4)) == 0.0
    rho, _ = coordinate_fields(G)
    for bracket in ("left", "commutator"):
        r = bz_residual(flat, ident * rho, zero, 0.5, bracket)
        assert form_max_abs(r - OneForm(ident * -2.0, ident * rho)) < 1e-12
    with pytest.raises(ValueError):
        bz_residual(flat, ident, zero, 1.0, "right")


@pytest.mark.parametrize("bracket", ["left", "commutator"])
@pytest.mark.parametrize("lam", LAMBDAS)
def test_bz_exp_and_map(grid_pair, bracket, lam):
    bz, lax = [], []
    for grid in grid_pair:
        flat = catalog_solution("flat", {}, grid)
        phi = profile_of_invariant(exp_profile(K), grid, lam)
        psi = bz_map(phi.psi, phi.psi_lambda, linear_profile(C), lam)
        bz.append(form_norm(bz_residual(flat, phi.psi, phi.psi_lambda, lam, bracket), margin(grid)))
        lax.append(form_norm(lax_residual_fields(flat, psi.psi, psi.psi_lambda, lam), margin(grid)))
        assert form_max_abs(psi.psi.trace()) <= 1e-12 * form_max_abs(psi.psi)
    assert 1.8 <= order(*bz) <= 2.2
    assert 1.8 <= order(*lax) <= 2.2


def test_bz_map_with_identity_is_the_profile():
    ident = MatrixField.identity(G)
    psi = bz_map(ident, MatrixField.zeros(G), linear_profile(C), 0.7)
    inv = spectral_invariant(G, 0.7)
    assert form_max_abs(psi.psi - MatrixField.constant(G, C) * inv.s) < 1e-13
    assert form_max_abs(psi.psi_lambda - MatrixField.constant(G, C) * inv.s_lambda) < 1e-13


def test_psi_lambda_of_map_matches_finite_difference():
    lam, eps = 0.8, 1e-6
    sample = lambda l: profile_of_invariant(exp_profile(K), G, l)
    out = bz_map(*sample(lam), linear_profile(C), lam)
    hi = bz_map(*sample(lam + eps), linear_profile(C), lam + eps).psi
    lo = bz_map(*sample(lam - eps), linear_profile(C), lam - eps).psi
    fd = (hi - lo) * (1 / (2 * eps))
    assert form_max_abs(out.psi_lambda - fd) < 1e-6 * max(1.0, form_max_abs(fd))
