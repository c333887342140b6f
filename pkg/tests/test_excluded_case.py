from functools import reduce

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import ImmutableMatrix

from algebra.errors import NotUnimodularError, PreconditionError
from algebra.loop_subgroup import LoopSubgroup
from algebra.matrix_group import diag_t, elementary, in_principal_congruence, invert
from processors.excluded_case import ExcludedCase, ExcludedCaseVerifier


def test_from_loop_subgroup():
    case = ExcludedCase.from_loop_subgroup(LoopSubgroup((1, 4, 1)))
    assert (case.r, case.s1, case.loop_index) == (3, 4, 2)
    assert case.loop_subgroup() == LoopSubgroup((1, 4, 1))
    with pytest.raises(PreconditionError):
        ExcludedCase.from_loop_subgroup(LoopSubgroup((3, 3, 1)))
    with pytest.raises(PreconditionError):
        ExcludedCase(3, 1)


def test_uprime_stabilizer():
    case = ExcludedCase(3, 2)
    assert case.uprime_contains((2, 1, 5))
    assert not case.uprime_contains((1, 0, 0))
    assert case.in_stab_uprime(elementary(2, 1, 3))
    assert not case.in_stab_uprime(elementary(1, 2, 3))
    assert case.in_stab_uprime(elementary(1, 2, 3) ** 2)
    assert case.in_stab_uprime(diag_t(1, 3))
    with pytest.raises(NotUnimodularError):
        case.in_stab_uprime(ImmutableMatrix([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))


@pytest.mark.parametrize("s1, order", [(2, 24), (3, 864), (4, 3072)])
def test_filtered_shadow_orders(s1, order):
    assert len(ExcludedCase(3, s1).filtered_shadow()) == order


def test_candidates():
    verifier = ExcludedCaseVerifier(ExcludedCase(3, 2))
    candidates = verifier.candidate_generators()
    assert len(candidates) == 9
    assert [c.name for c in candidates[:3]] == ["T[1]", "T[2]", "T[3]"]
    assert candidates[-1].construction == "power"
    assert candidates[-1].target == elementary(1, 3, 3) ** 2


def test_gamma_s1_samples():
    verifier = ExcludedCaseVerifier(ExcludedCase(3, 3), trials=10)
    samples = verifier.gamma_s1_samples()
    assert len(samples) == 10
    assert all(in_principal_congruence(sample, 3) for sample in samples)
    assert all(verifier.case.gamma_s1_contained(sample) for sample in samples)


def test_verify_s1_two():
    report = ExcludedCaseVerifier(ExcludedCase(3, 2), trials=20).verify_excluded()
    assert report["passed"], report["checks"]
    assert report["kind"] == "excluded"
    assert report["candidate_count"] == 9
    assert report["closure_order"] == 24
    assert report["filtered_order"] == 24
    level = next(check for check in report["checks"] if check["name"] == "level_consistency")
    assert not level.get("skipped")
    assert "12288" in level["detail"]


@pytest.mark.parametrize("s1, order", [(2, 24), (3, 864), (4, 3072)])
def test_verify_rank3(s1, order):
    report = ExcludedCaseVerifier(ExcludedCase(3, s1)).verify_excluded()
    assert report["passed"], report["checks"]
    assert report["gamma_s1_trials"] == 100
    assert report["closure_order"] == order
    assert report["filtered_order"] == order


def test_verify_other_loop_index():
    report = ExcludedCaseVerifier(ExcludedCase(3, 2, loop_index=3), trials=10).verify_excluded()
    assert report["passed"], report["checks"]
    assert report["loops"] == [1, 1, 2]


def test_large_s1_skips_enumeration():
    report = ExcludedCaseVerifier(ExcludedCase(3, 5), trials=10).verify_excluded()
    assert report["passed"], report["checks"]
    closure = next(check for check in report["checks"] if check["name"] == "closure_equals_filtered")
    assert closure["skipped"]
    assert report["closure_order"] is None


def test_rank4_skips_the_level_closure():
    report = ExcludedCaseVerifier(ExcludedCase(4, 2), trials=10).verify_excluded()
    assert report["passed"], report["checks"]
    level = next(check for check in report["checks"] if check["name"] == "level_consistency")
    assert level["skipped"]
    assert "over budget" in level["detail"]


STAB_FACTORS = [
    elementary(2, 1, 3),
    elementary(3, 2, 3),
    elementary(2, 3, 3),
    elementary(1, 2, 3),
    elementary(1, 3, 3),
    elementary(1, 2, 3) ** 2,
    diag_t(1, 3),
]


@given(
    st.lists(st.sampled_from(STAB_FACTORS), min_size=1, max_size=5),
    st.lists(st.sampled_from(STAB_FACTORS), min_size=1, max_size=5),
)
def test_uprime_stabilizer_is_a_group(first, second):
    case = ExcludedCase(3, 2)
    a, b = (ImmutableMatrix(reduce(lambda m, f: m * f, factors)) for factors in (first, second))
    if case.in_stab_uprime(a) and case.in_stab_uprime(b):
        assert case.in_stab_uprime(a * b)
        assert case.in_stab_uprime(invert(a))
