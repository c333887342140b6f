import pytest

from algebra.errors import CertificateError, PreconditionError
from algebra.free_group import generator, in_derived_subgroup, parse_word
from algebra.loop_subgroup import LoopSubgroup
from algebra.matrix_group import (
    diag_t,
    elementary,
    gamma2_alt_generators,
    gamma2_generators,
    reduce_mod,
    sv_generators,
)
from processors.stabilizer_builder import StabilizerBuilder


def assert_certified(stabilizer, U):
    checks = stabilizer.certificate(U, with_basis=True)
    assert all(checks.values()), checks


@pytest.mark.parametrize("j, prefix, target", [
    (3, "y x y^-1 x y x^-2 y^-1 x", (1, 3)),
    (3, "x y x^-1 y x y^-2 x^-1 y", (2, 3)),
    (1, "z", (3, 1)),
    (2, "z", (3, 2)),
])
def test_worked_prefixes_on_331(u331, j, prefix, target):
    prefix = parse_word(prefix, 3)
    witness = prefix * generator(3, target[0]).inverse()
    assert in_derived_subgroup(witness)
    assert u331.in_normal_core(prefix)
    stabilizer = StabilizerBuilder(u331).core_prefix(j, prefix, elementary(*target, 3), "worked", "example",
                                                     witness=witness)
    assert stabilizer.witness == witness
    assert stabilizer.gamma.b_matrix() == elementary(*target, 3)
    assert_certified(stabilizer, u331)


def test_witness_must_have_zero_exponent_sums(u331):
    prefix = parse_word("y x y^-1 x y x^-2 y^-1 x", 3)
    with pytest.raises(CertificateError):
        StabilizerBuilder(u331).core_prefix(3, prefix, elementary(1, 3, 3), "worked", "example", witness=prefix)


def test_looplet_preimage(u331):
    stabilizer = StabilizerBuilder(u331).preimage_elementary(3, 1)
    assert stabilizer.gamma.formatted_images() == ["z x", "y", "z"]
    assert stabilizer.construction == "trivial-looplet"
    assert stabilizer.target == elementary(3, 1, 3)


def test_odd_preimage_uses_auxiliary_loop(u331):
    stabilizer = StabilizerBuilder(u331).preimage_elementary(1, 3)
    assert stabilizer.construction == "odd"
    assert stabilizer.target == elementary(1, 3, 3)
    assert in_derived_subgroup(stabilizer.witness)
    assert_certified(stabilizer, u331)


def test_odd_preimage_preconditions(u331):
    builder = StabilizerBuilder(LoopSubgroup((2, 3, 1)))
    with pytest.raises(PreconditionError):
        builder.preimage_elementary(1, 2)
    with pytest.raises(PreconditionError):
        StabilizerBuilder(u331).preimage_elementary(1, 2)
    with pytest.raises(PreconditionError):
        StabilizerBuilder(u331).preimage_elementary(1, 1)


def test_commutator_route(u331):
    stabilizer = StabilizerBuilder(u331).preimage_via_commutator(1, 2)
    assert stabilizer.construction == "commutator"
    assert stabilizer.target == elementary(1, 2, 3)
    assert_certified(stabilizer, u331)


def test_squared_preimage(u331, u221):
    stabilizer = StabilizerBuilder(u331).preimage_elementary_squared(1, 3)
    assert stabilizer.target == elementary(1, 3, 3) ** 2
    assert_certified(stabilizer, u331)
    even = StabilizerBuilder(u221).preimage_elementary_squared(1, 3)
    assert even.witness == generator(3, 1) ** 0
    assert_certified(even, u221)


def test_double_preimage(u221):
    stabilizer = StabilizerBuilder(u221).preimage_double(1, 2, 3)
    assert stabilizer.target == elementary(1, 3, 3) * elementary(2, 3, 3)
    assert stabilizer.construction == "double"
    assert_certified(stabilizer, u221)
    with pytest.raises(PreconditionError):
        StabilizerBuilder(LoopSubgroup((2, 3, 1))).preimage_double(1, 2, 3)


def test_tau_reverses_loop(u331):
    stabilizer = StabilizerBuilder(u331).tau(1)
    assert stabilizer.target == diag_t(1, 3)
    assert str(stabilizer.coset_map) == "(2,3)"
    assert_certified(stabilizer, u331)


def test_certificate_rejects_wrong_target(u331):
    builder = StabilizerBuilder(u331)
    with pytest.raises(CertificateError):
        builder.core_prefix(1, generator(3, 3), elementary(3, 2, 3), "wrong", "X[3,2]")
    with pytest.raises(PreconditionError):
        builder.core_prefix(3, generator(3, 1), elementary(1, 3, 3), "outside core", "X[1,3]")
    with pytest.raises(PreconditionError):
        builder.core_prefix(3, generator(3, 3) ** 2, elementary(1, 3, 3), "self", "X[1,3]")


def test_products_stay_certified(u331):
    builder = StabilizerBuilder(u331)
    first = builder.preimage_elementary(3, 1)
    second = builder.tau(2)
    product = first.compose(second)
    assert product.target == elementary(3, 1, 3) * diag_t(2, 3)
    assert_certified(product, u331)
    assert_certified(product.inverse(), u331)
    assert_certified(first.commutator(builder.preimage_elementary(3, 2)), u331)


def test_generator_families_on_331(u331):
    builder = StabilizerBuilder(u331)
    gamma2 = builder.gamma2_preimages()
    assert [s.target for s in gamma2] == gamma2_alt_generators(3, 3)
    sv = builder.sv_preimages()
    assert [reduce_mod(s.target, 2) for s in sv] == sv_generators((0, 0, 0))


def test_generator_families_on_222():
    U = LoopSubgroup((2, 2, 2))
    builder = StabilizerBuilder(U)
    assert [s.target for s in builder.gamma2_preimages()] == gamma2_generators(3)
    assert [reduce_mod(s.target, 2) for s in builder.sv_preimages()] == sv_generators((1, 1, 1))


def test_theorem_range():
    with pytest.raises(PreconditionError):
        StabilizerBuilder(LoopSubgroup((3, 1, 1))).sv_preimages()
    with pytest.raises(PreconditionError):
        StabilizerBuilder(LoopSubgroup((3, 3))).gamma2_preimages()


def test_preimage_dispatch(u331, u221):
    assert StabilizerBuilder(u331).preimage("tau", 2, 1).name == "T[2]"
    assert StabilizerBuilder(u221).preimage("double", 1, 2, 3).name == "X[1,3]X[2,3]"
    with pytest.raises(PreconditionError):
        StabilizerBuilder(u221).preimage("double", 1, 2)
    with pytest.raises(PreconditionError):
        StabilizerBuilder(u221).preimage("shear", 1, 2)


def test_summary(u331):
    summary = StabilizerBuilder(u331).preimage_elementary(3, 1).summary(u331)
    assert summary["images"] == ["z x", "y", "z"]
    assert summary["b_matrix"] == [[1, 0, 0], [0, 1, 0], [1, 0, 1]]
    assert summary["coset_map"] == "()"
    assert all(summary["certificate"].values())


def test_check_target(u221):
    builder = StabilizerBuilder(u221)
    stabilizer = builder.preimage_double(1, 2, 3)
    assert builder.check_target(stabilizer, "X[1,3]X[2,3]")
    assert not builder.check_target(stabilizer, "X[1,3]")
