import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import margin, order
from ernst_lax.errors import BackgroundMismatch, UnknownCharacteristic
from ernst_lax.ernst import catalog_solution, connection
from ernst_lax.exterior import OneForm, d0, form_max_abs, form_norm
from ernst_lax.grid import MatrixField, make_grid, matrix_unit, random_trig_field
from ernst_lax.symmetry import characteristic_catalog, covariant_derivative, symmetry_residual

G = make_grid(((0.5, 2.5), (-1.0, 1.0)), (21, 21))
C = np.array([[0.3, 1.0], [-0.5, -0.3]])


def test_identity_is_covariantly_constant():
    g = catalog_solution("curzon", {"m": 1.0}, G)
    D = covariant_derivative(connection(g), MatrixField.identity(G))
    assert form_max_abs(D) == 0.0


def test_flat_connection_reduces_to_d(rng):
    phi = random_trig_field(G, rng)
    D = covariant_derivative(OneForm.zeros(G), phi)
    assert form_max_abs(D - d0(phi)) == 0.0


def test_commutator_entries_by_hand():
    g = catalog_solution("curzon", {"m": 1.0}, G)
    A = connection(g).rho.values
    D = covariant_derivative(connection(g), MatrixField.constant(G, matrix_unit(1, 2))).rho.values
    # [A, E12] for diagonal A = diag(a, d): (a - d) E12
    assert np.allclose(D[..., 0, 1], A[..., 0, 0] - A[..., 1, 1])
    assert np.abs(D[..., 0, 0]).max() == 0 and np.abs(D[..., 1, 0]).max() == 0 and np.abs(D[..., 1, 1]).max() == 0


def test_catalog_entries():
    flat = catalog_solution("flat", {}, G)
    assert form_max_abs(characteristic_catalog("z_translation", flat).phi) == 0.0
    c = characteristic_catalog("constant", flat, matrix_unit(1, 2))
    assert np.array_equal(c.phi.values[4, 4], matrix_unit(1, 2))
    assert c.provenance == "constant"
    q = characteristic_catalog("constant", flat, C).Q(flat)
    assert np.allclose(q.values[0, 0], C)
    with pytest.raises(UnknownCharacteristic):
        characteristic_catalog("boost", flat)
    with pytest.raises(BackgroundMismatch):
        characteristic_catalog("linear_z", catalog_solution("curzon", {"m": 1.0}, G), C)


def test_linear_z_exact_on_flat():
    flat = catalog_solution("flat", {}, G)
    assert form_max_abs(symmetry_residual(flat, characteristic_catalog("linear_z", flat, C))) < 1e-12


@pytest.mark.parametrize("kind", ["constant", "z_translation"])
def test_symmetries_on_curzon(curzon_pair, kind):
    norms = [form_norm(symmetry_residual(g, characteristic_catalog(kind, g, C)), margin(g.grid)) for g in curzon_pair]
    assert 1.8 <= order(*norms) <= 2.2


def test_rho_translation_is_not_a_symmetry(curzon_pair_101):
    norms = [form_norm(symmetry_residual(g, characteristic_catalog("rho_translation", g)), margin(g.grid))
             for g in curzon_pair_101]
    assert min(norms) > 1.0
    assert abs(norms[0] - norms[1]) / norms[1] < 0.2


def test_traceless_seed_gives_traceless_residual(curzon_pair):
    norms = [form_norm(symmetry_residual(g, characteristic_catalog("z_translation", g)).trace(), margin(g.grid))
             for g in curzon_pair]
    assert 1.8 <= order(*norms) <= 2.3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
def test_residual_is_linear_in_phi(seed, a, b):
    rng = np.random.default_rng(seed)
    g = catalog_solution("curzon", {"m": 1.0}, G)
    p1, p2 = random_trig_field(G, rng), random_trig_field(G, rng)
    lhs = symmetry_residual(g, p1 * a + p2 * b)
    rhs = symmetry_residual(g, p1) * a + symmetry_residual(g, p2) * b
    scale = max(1.0, form_max_abs(lhs))
    assert form_max_abs(lhs - rhs) <= 1e-12 * scale
