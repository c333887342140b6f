import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import ImmutableMatrix

from algebra.errors import ClosureCapExceeded, NotUnimodularError, PreconditionError, SingularMatrixError
from algebra.matrix_group import (
    GenWord,
    ModMatrix,
    batch_inverse_mod,
    closure,
    commutator,
    decompose_glz,
    diag_t,
    elementary,
    enumerate_gl,
    gamma2_alt_generators,
    gamma2_generators,
    gl2_order,
    identity,
    in_principal_congruence,
    in_sv,
    invert,
    principal_kernel,
    reduce_mod,
    resolve_tag,
    sv_bruteforce,
    sv_generator_names,
    sv_generators,
    sv_order,
    sv_reduce,
    swap_matrix_word,
    tag_factors,
)

RANK3_VECTORS = [tuple(int(bit) for bit in f"{n:03b}") for n in range(8)]


def test_integer_matrices():
    x12 = elementary(1, 2, 3)
    assert x12 == ImmutableMatrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
    assert invert(x12) == ImmutableMatrix([[1, -1, 0], [0, 1, 0], [0, 0, 1]])
    assert invert(diag_t(2, 3)) == diag_t(2, 3)
    assert commutator(elementary(1, 3, 3), elementary(3, 2, 3)) == x12
    with pytest.raises(NotUnimodularError):
        invert(ImmutableMatrix([[2, 0], [0, 1]]))
    with pytest.raises(PreconditionError):
        elementary(2, 2, 3)


def test_principal_congruence():
    assert in_principal_congruence(elementary(1, 2, 3) ** 2, 2)
    assert not in_principal_congruence(elementary(1, 2, 3), 2)
    assert not in_principal_congruence(ImmutableMatrix([[3, 0], [0, 1]]), 2)
    assert in_principal_congruence(diag_t(1, 3), 2)


def test_mod_matrix():
    m = ModMatrix.from_rows([[1, 1], [0, 1]], 3)
    assert m.inverse() == ModMatrix.from_rows([[1, 2], [0, 1]], 3)
    assert (m @ m.inverse()).is_identity()
    assert (m ** 3).is_identity()
    assert m ** -1 == m.inverse()
    with pytest.raises(SingularMatrixError):
        ModMatrix.from_rows([[2, 0], [0, 1]], 4).inverse()
    with pytest.raises(PreconditionError):
        ModMatrix(((1, 5), (0, 1)), 3)


def test_tags():
    assert resolve_tag("X[1,3]X[2,3]", 3) == elementary(1, 3, 3) * elementary(2, 3, 3)
    assert resolve_tag("T[2]", 3) == diag_t(2, 3)
    assert tag_factors("X[1,2]X[1,2]") == [("X", 1, 2), ("X", 1, 2)]
    with pytest.raises(PreconditionError):
        tag_factors("Y[1,2]")


def test_generator_sets():
    assert len(gamma2_generators(3)) == 6 + 3
    assert gamma2_generators(3)[0] == elementary(1, 2, 3) ** 2
    alt = gamma2_alt_generators(3, 3)
    assert alt[:2] == [elementary(3, 1, 3), elementary(3, 2, 3)]
    assert alt[2:4] == [elementary(1, 3, 3) ** 2, elementary(2, 3, 3) ** 2]
    assert sv_generator_names((1, 1, 0)) == ["X[3,1]", "X[3,2]", "X[1,3]X[2,3]"]
    assert len(sv_generator_names((0, 0, 0))) == 6


def test_orders():
    assert gl2_order(3) == 168
    assert gl2_order(4) == 20160
    assert sv_order((0, 0, 0)) == 168
    assert sv_order((1, 0, 0)) == 24
    assert sv_order((1, 0, 1, 0)) == 1344


def test_enumeration():
    assert len(enumerate_gl(2, 2)) == 6
    assert len(enumerate_gl(3, 2)) == 168
    assert len(enumerate_gl(2, 3)) == 48
    assert len(principal_kernel(3, 4, 2)) == 512
    with pytest.raises(PreconditionError):
        enumerate_gl(5, 2)


def test_batch_inverse():
    matrices = enumerate_gl(2, 3)
    inverses = batch_inverse_mod(matrices, 3)
    products = np.matmul(matrices, inverses) % 3
    assert np.all(products == np.eye(2, dtype=np.int64))


@pytest.mark.parametrize("v", RANK3_VECTORS)
def test_sv_closure_matches_bruteforce(v):
    generated = closure(sv_generators(v), cap=1000)
    assert generated == sv_bruteforce(v)
    assert len(generated) == sv_order(v)
    assert all(in_sv(m, v) for m in generated)


def test_closure_edge_cases():
    unit = ModMatrix.identity(3, 2)
    assert closure([], identity_element=unit) == frozenset({unit})
    assert closure([unit]) == frozenset({unit})
    with pytest.raises(PreconditionError):
        closure([])
    with pytest.raises(ClosureCapExceeded):
        closure(sv_generators((0, 0, 0)), cap=10)
    with pytest.raises(SingularMatrixError):
        closure([ModMatrix.from_rows([[1, 1], [1, 1]], 2)])


@pytest.mark.parametrize("v", RANK3_VECTORS + [(1, 1, 0, 0), (1, 1, 1, 1)])
def test_sv_reduce_rebuilds_every_element(v):
    elements = sv_bruteforce(v)
    if len(elements) > 200:
        elements = sorted(elements)[:200]
    allowed = set(sv_generator_names(v))
    for m in elements:
        word = sv_reduce(m, v)
        assert set(word.tags()) <= allowed
        assert word.evaluate(len(v), 2) == m


def test_sv_reduce_rejects_outsiders():
    with pytest.raises(PreconditionError):
        sv_reduce(reduce_mod(elementary(1, 2, 3), 2), (1, 0, 0))


def test_swap_word():
    swap = swap_matrix_word(1, 2, 3).evaluate(3, 2)
    assert swap == ModMatrix.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 1]], 2)


def test_gen_word():
    word = GenWord((("X[1,2]", 2), ("T[1]", 1)))
    assert str(word) == "X[1,2]^2 T[1]"
    assert word.evaluate(3) == elementary(1, 2, 3) ** 2 * diag_t(1, 3)
    assert (word + word.inverse()).evaluate(3) == identity(3)
    assert str(GenWord()) == "1"


unimodular_factors = st.lists(
    st.one_of(
        st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(-3, 3)).filter(lambda t: t[0] != t[1]),
        st.tuples(st.just(0), st.integers(1, 3), st.just(1)),
    ),
    max_size=10,
)


@given(unimodular_factors)
def test_decompose_glz_rebuilds_matrix(factors):
    m = identity(3)
    for i, j, exponent in factors:
        m = m * (diag_t(j, 3) if i == 0 else elementary(i, j, 3) ** exponent)
    m = ImmutableMatrix(m)
    assert decompose_glz(m).evaluate(3) == m


def test_decompose_glz_examples():
    minus = ImmutableMatrix([[-1, 0, 0], [0, -1, 0], [0, 0, 1]])
    assert decompose_glz(minus).evaluate(3) == minus
    assert decompose_glz(diag_t(3, 3)).evaluate(3) == diag_t(3, 3)
    assert len(decompose_glz(identity(3))) == 0
    with pytest.raises(NotUnimodularError):
        decompose_glz(ImmutableMatrix([[2, 1], [1, 1]]) * 2)


def test_glz_generators_cover_decompositions():
    from algebra.matrix_group import determinant, glz_generators, multiply

    table = glz_generators(3)
    assert len(table) == 7
    m = multiply(elementary(2, 3, 3) ** 4, diag_t(1, 3))
    assert determinant(m) == -1
    word = decompose_glz(m)
    assert set(word.tags()) <= set(table)
    assert word.evaluate_with(table, identity(3)) == m


def test_level_two_generators_give_the_kernel_mod_four():
    kernel = principal_kernel(3, 4, 2)
    generated = closure([reduce_mod(g, 4) for g in gamma2_generators(3)])
    assert len(generated) == 512
    assert generated == kernel
    alternative = closure([reduce_mod(g, 4) for g in gamma2_alt_generators(3, 3)])
    assert kernel <= alternative
    assert len(alternative) == 2048


TRIPLES = [
    (r, i, j, k)
    for r in (3, 4)
    for i in range(1, r + 1)
    for j in range(1, r + 1)
    for k in range(1, r + 1)
    if len({i, j, k}) == 3
]


@pytest.mark.parametrize("r, i, j, k", TRIPLES)
def test_elementary_relations(r, i, j, k):
    assert commutator(elementary(j, i, r), elementary(i, k, r)) == elementary(j, k, r)
    signed_swap = elementary(i, j, r) * invert(elementary(j, i, r)) * elementary(i, j, r)
    assert signed_swap ** 2 == diag_t(i, r) * diag_t(j, r)


@pytest.mark.parametrize("r, i, j, k", TRIPLES)
def test_swap_word_swaps_rows(r, i, j, k):
    rows = [[1 if a == b else 0 for b in range(r)] for a in range(r)]
    rows[i - 1], rows[j - 1] = rows[j - 1], rows[i - 1]
    assert swap_matrix_word(i, j, k).evaluate(r, 2) == ModMatrix.from_rows(rows, 2)


def unimodular(factors):
    m = identity(3)
    for i, j, exponent in factors:
        m = m * (diag_t(j, 3) if i == 0 else elementary(i, j, 3) ** exponent)
    return ImmutableMatrix(m)


@given(unimodular_factors, unimodular_factors, st.integers(2, 6))
def test_reduce_mod_is_multiplicative(first, second, modulus):
    a, b = unimodular(first), unimodular(second)
    assert reduce_mod(a * b, modulus) == reduce_mod(a, modulus) @ reduce_mod(b, modulus)
    assert reduce_mod(invert(a), modulus) == reduce_mod(a, modulus).inverse()
