import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstab.errors import DimensionError, ParameterError, TruncationError, ValidationError
from qstab.focklab.operators import (
    CoeffTable,
    FockOperator,
    build_poly_op,
    build_z,
    coherent_state,
    commutator,
    derivative_tables,
    fock_annihilation,
    fock_state,
    interior,
    interior_size,
    number_operator,
    pure_kerr,
    saturated_kerr,
    thermal_state,
)


def test_annihilation_entries():
    a = fock_annihilation(5).matrix
    assert np.allclose(np.diag(a, 1), np.sqrt([1, 2, 3, 4]))
    assert np.allclose(number_operator(5).matrix, np.diag(np.arange(5)))


def test_ccr_on_interior():
    a = fock_annihilation(10)
    c = commutator(a, a.dag())
    assert np.allclose(interior(c, 2), np.eye(interior_size(10, 2)))
    # the truncation edge breaks the relation
    assert not np.isclose(c.matrix[-1, -1], 1)


def test_fock_operator_algebra():
    a = fock_annihilation(4)
    b = 2 * a + a.dag() - a
    assert np.allclose(b.matrix, a.matrix + a.dag().matrix)
    assert np.allclose((-a).matrix, -a.matrix)
    with pytest.raises(DimensionError):
        FockOperator(np.zeros((2, 3)))


def test_interior_too_small():
    with pytest.raises(TruncationError):
        interior(np.eye(3), 3)


def test_products_exact_on_leading_block():
    # degree-4 product at dim 12 matches dim 40 on the leading 12 - 4 levels
    small = build_poly_op(pure_kerr(), build_z(1, 0, 12)).matrix
    big = build_poly_op(pure_kerr(), build_z(1, 0, 40)).matrix
    assert np.allclose(small[:8, :8], big[:8, :8])


def test_coeff_table_hermitian_check():
    CoeffTable({(1, 2): 1j, (2, 1): -1j})
    with pytest.raises(ValidationError):
        CoeffTable({(1, 2): 1j})
    CoeffTable({(1, 2): 1j}, hermitian=False)


def test_coeff_table_rejects_bad_index_and_value():
    with pytest.raises(ParameterError):
        CoeffTable({(-1, 0): 1})
    with pytest.raises(ParameterError):
        CoeffTable({(1, 1): np.inf})


def test_coeff_table_degree_equality_and_list():
    t = CoeffTable({(2, 2): 1.0, (1, 1): 0.0})
    assert t.degree == 4 and t == pure_kerr()
    assert t.to_list() == [[2, 2, 1.0, 0.0]]
    assert CoeffTable({}).degree == 0


def test_build_poly_op_self_adjoint():
    z = build_z(0.7 + 0.2j, 0.3 - 0.1j, 16)
    f = build_poly_op(CoeffTable({(1, 2): 0.5j, (2, 1): -0.5j, (1, 1): 2.0}), z).matrix
    assert np.allclose(f, f.conj().T)


def test_build_poly_op_truncation_guard():
    with pytest.raises(TruncationError):
        build_poly_op(pure_kerr(), build_z(1, 0, 5))


def test_saturated_kerr_validation_and_entries():
    t = saturated_kerr(4.0, 6)
    assert t.entries == {(2, 2): 1.0, (3, 3): -0.25, (4, 4): 0.0625, (5, 5): -0.015625, (6, 6): 0.00390625}
    for bad in [(0, 4), (4, 3), (4, 2), (4, 4.5)]:
        with pytest.raises(ParameterError):
            saturated_kerr(*bad)


tables = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    max_size=6,
)


@settings(max_examples=40, deadline=None)
@given(tables)
def test_derivative_rules_match_commutators(entries):
    # with z = a, [z, z*] = 1 so [f, z*] = df/dz, [w1, z*] = d2f/dz2, [z, w1] = d2f/dz dz*
    coeffs = CoeffTable(entries, hermitian=False)
    dim = 20
    z = build_z(1, 0, dim)
    zm, zs = z.matrix, z.matrix.conj().T
    f = build_poly_op(coeffs, z).matrix
    t1, t2, t3 = derivative_tables(coeffs)
    w1 = build_poly_op(t1, z).matrix
    w2 = build_poly_op(t2, z).matrix
    w3 = build_poly_op(t3, z).matrix
    k = interior_size(dim, coeffs.degree + 1)
    assert np.allclose((f @ zs - zs @ f)[:k, :k], w1[:k, :k])
    assert np.allclose((w1 @ zs - zs @ w1)[:k, :k], w2[:k, :k])
    assert np.allclose((zm @ w1 - w1 @ zm)[:k, :k], w3[:k, :k])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4), st.complex_numbers(max_magnitude=5, allow_nan=False,
                                                               allow_infinity=False))
def test_monomial_derivative_table(k, l, s):
    t1, t2, t3 = derivative_tables(CoeffTable({(k, l): s}, hermitian=False))
    expect1 = {(k - 1, l): k * s} if k >= 1 and s != 0 else {}
    expect2 = {(k - 2, l): k * (k - 1) * s} if k >= 2 and s != 0 else {}
    expect3 = {(k - 1, l - 1): k * l * s} if k >= 1 and l >= 1 and s != 0 else {}
    assert t1.entries == expect1 and t2.entries == expect2 and t3.entries == expect3


def test_states():
    assert np.trace(fock_state(3, 6)) == 1
    with pytest.raises(ParameterError):
        fock_state(6, 6)
    rho = coherent_state(1.5, 40)
    a = fock_annihilation(40).matrix
    assert np.trace(rho @ a) == pytest.approx(1.5, abs=1e-10)
    th = thermal_state(0.5, 60)
    assert np.trace(th @ number_operator(60).matrix).real == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(thermal_state(0, 4), fock_state(0, 4))
    with pytest.raises(ParameterError):
        thermal_state(-1, 4)
