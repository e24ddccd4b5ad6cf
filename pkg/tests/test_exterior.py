import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import margin, order
from ernst_lax.errors import DegreeError
from ernst_lax.exterior import (
    OneForm,
    TwoForm,
    anticommutator,
    commutator,
    d0,
    d1,
    form_max_abs,
    form_norm,
    hodge_star,
    wedge,
)
from ernst_lax.grid import MatrixField, coordinate_fields, make_grid, matrix_unit, random_trig_field

SMALL = make_grid(((0.5, 1.5), (-0.5, 0.5)), (11, 11))


def random_one_form(grid, rng):
    return OneForm(random_trig_field(grid, rng), random_trig_field(grid, rng))


def test_star_swaps_components(rng):
    A, B = random_trig_field(SMALL, rng), random_trig_field(SMALL, rng)
    s = hodge_star(OneForm(A, B))
    assert np.array_equal(s.rho.values, -B.values)
    assert np.array_equal(s.z.values, A.values)


def test_wedge_of_matrix_units():
    E11 = MatrixField.constant(SMALL, matrix_unit(1, 1))
    E12 = MatrixField.constant(SMALL, matrix_unit(1, 2))
    zero = MatrixField.zeros(SMALL)
    w = wedge(OneForm(E11, zero), OneForm(zero, E12))
    assert np.array_equal(w.coeff.values[0, 0], matrix_unit(1, 2))


def test_wedge_self_vanishes_for_commuting_components():
    rho, z = coordinate_fields(SMALL)
    ident = MatrixField.identity(SMALL)
    s = OneForm(ident * rho, ident * z)
    assert form_max_abs(wedge(s, s)) == 0.0


def test_d0_of_rho_z_identity():
    rho, z = coordinate_fields(SMALL)
    phi = MatrixField.identity(SMALL) * rho * z
    d = d0(phi)
    assert form_max_abs(d - OneForm(MatrixField.identity(SMALL) * z, MatrixField.identity(SMALL) * rho)) < 1e-13


def test_d1_of_constant_form_is_zero():
    c = MatrixField.constant(SMALL, [[1.0, 2.0], [3.0, 4.0]])
    assert form_max_abs(d1(OneForm(c, c))) == 0.0


def test_commutator_with_identity(rng):
    s = random_one_form(SMALL, rng)
    assert form_max_abs(commutator(s, MatrixField.identity(SMALL))) == 0.0


def test_degree_errors(rng):
    s = random_one_form(SMALL, rng)
    with pytest.raises(DegreeError):
        commutator(d1(s), s)
    with pytest.raises(DegreeError):
        anticommutator(s, MatrixField.identity(SMALL))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_algebraic_identities_exact(seed):
    rng = np.random.default_rng(seed)
    s1, s2 = random_one_form(SMALL, rng), random_one_form(SMALL, rng)
    assert form_max_abs(hodge_star(hodge_star(s1)) + s1) == 0.0
    assert form_max_abs(wedge(hodge_star(s1), hodge_star(s2)) - wedge(s1, s2)) <= 1e-12
    assert form_max_abs(anticommutator(s1, hodge_star(s2)) + anticommutator(hodge_star(s1), s2)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_star_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    s1, s2 = random_one_form(SMALL, rng), random_one_form(SMALL, rng)
    lhs = hodge_star(s1 * a + s2 * b)
    rhs = hodge_star(s1) * a + hodge_star(s2) * b
    assert form_max_abs(lhs - rhs) <= 1e-12 * max(1.0, abs(a), abs(b))


def test_d_squared_is_exact_discretely(grid_pair):
    for g in grid_pair:
        phi = random_trig_field(g, np.random.default_rng(3))
        assert form_max_abs(d1(d0(phi))) < 1e-11


def test_antiderivation_second_order(grid_pair):
    norms = []
    for g in grid_pair:
        rng = np.random.default_rng(11)
        s, p = random_one_form(g, rng), random_trig_field(g, rng)
        diff = d1(commutator(s, p)) - (commutator(d1(s), p) - anticommutator(s, d0(p)))
        norms.append(form_norm(diff, margin(g)))
    assert 1.8 <= order(*norms) <= 2.2


def test_two_form_algebra(rng):
    a = TwoForm(random_trig_field(SMALL, rng))
    m = random_trig_field(SMALL, rng)
    assert form_max_abs((a @ m) - TwoForm(a.coeff @ m)) == 0.0
    assert form_max_abs(a + (-a)) == 0.0
