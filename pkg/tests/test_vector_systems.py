"""Exact checks of the codeword and vector-grid constructions."""

import dataclasses
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_dot, sylvester_rows
from sparsehard.errors import DimensionError, GadgetShapeError, ParameterError
from sparsehard.vector_systems import (
    Codeword,
    build_hadamard_code_set,
    build_incoherent_vector_system,
    complement,
    dot,
    verify_system,
)


def test_hadamard_m2_supports_match_hand_enumeration():
    # Sylvester rows of order 4: (1,-1,1,-1), (1,1,-1,-1), (1,-1,-1,1)
    codes = build_hadamard_code_set(2)
    assert codes.order == 4
    supports = {c.support for c in codes.codewords}
    assert supports == {(0, 2), (0, 1), (0, 3)}
    # stored order is lexicographic by support
    assert [c.support for c in codes.codewords] == [(0, 1), (0, 2), (0, 3)]
    for a, b in combinations(codes.codewords, 2):
        assert len(a.support_set & b.support_set) == 1
        assert dot(a, b).squared == Fraction(1, 4)


def test_hadamard_m1_single_codeword():
    codes = build_hadamard_code_set(1)
    assert len(codes) == 1
    assert codes.codewords[0].support == (0,)
    assert codes.codewords[0].length == 2


def test_hadamard_m3_pairwise_dots_brute_force():
    codes = build_hadamard_code_set(3)
    assert len(codes) == 7
    for a, b in combinations(codes.codewords, 2):
        assert dot(a, b).squared == Fraction(1, 4)
        assert dense_dot(8, a.support, b.support) == pytest.approx(0.5)


def test_hadamard_rows_agree_with_dense_sylvester():
    for m in (2, 3, 4):
        order = 1 << m
        rows = sylvester_rows(order)
        expected = {
            tuple(int(c) for c in range(order) if rows[r, c] == 1)
            for r in range(1, order)
        }
        got = {c.support for c in build_hadamard_code_set(m).codewords}
        assert got == expected


def test_hadamard_parameter_errors():
    with pytest.raises(ParameterError):
        build_hadamard_code_set(0)
    with pytest.raises(ParameterError):
        build_hadamard_code_set(30, dimension_cap=1_000_000)


def test_complement_set_and_orthogonality():
    c = Codeword(4, (0, 2))
    cc = complement(c)
    assert cc.support == (1, 3)
    assert dot(c, cc).squared == 0
    assert complement(cc) == c  # involution


def test_complement_rejects_non_half_support():
    with pytest.raises(GadgetShapeError):
        complement(Codeword(4, (0,)))


def test_complement_cross_dot_half_over_small_orders():
    for m in (2, 3, 4):
        codes = build_hadamard_code_set(m)
        for a, b in combinations(codes.codewords, 2):
            assert dot(a, complement(b)).squared == Fraction(1, 4)
            assert dot(complement(a), b).squared == Fraction(1, 4)
            assert dense_dot(
                codes.order, a.support, complement(b).support
            ) == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.data())
def test_complement_is_involution_on_half_supports(m, data):
    length = 2 << m
    supp = data.draw(
        st.sets(st.integers(0, length - 1), min_size=length // 2, max_size=length // 2)
    )
    c = Codeword(length, tuple(sorted(supp)))
    assert complement(complement(c)) == c


def test_dot_length_mismatch():
    with pytest.raises(DimensionError):
        dot(Codeword(4, (0,)), Codeword(8, (0,)))


def test_dot_self_and_disjoint():
    c = Codeword(6, (0, 3, 5))
    assert dot(c, c).squared == 1
    assert dot(c, c).value == pytest.approx(1.0)
    other = Codeword(6, (1, 2))
    assert dot(c, other).squared == 0


def test_system_l3_d3_bottom_group_matches_stated_strings():
    sys33 = build_incoherent_vector_system(3, 3)
    # deepest group repeats the one-hot seeds: 100100..., 010010..., 001001...
    bottom = sys33.vectors[2]
    assert bottom[0].support == tuple(range(0, 27, 3))
    assert bottom[1].support == tuple(range(1, 27, 3))
    assert bottom[2].support == tuple(range(2, 27, 3))
    assert verify_system(sys33).ok


def test_system_l2_d1_is_standard_basis():
    sys21 = build_incoherent_vector_system(2, 1)
    assert [v.support for v in sys21.vectors[0]] == [(0,), (1,)]
    assert verify_system(sys21).ok


def test_system_l3_d2_pairwise_dot_table_brute_force():
    sys32 = build_incoherent_vector_system(3, 2)
    vectors = sys32.all_vectors()
    assert len(vectors) == 6
    assert all(v.length == 9 and v.support_size == 3 for v in vectors)
    for i1 in range(2):
        for i2 in range(2):
            for j1 in range(3):
                for j2 in range(3):
                    a, b = sys32.vectors[i1][j1], sys32.vectors[i2][j2]
                    got = dot(a, b)
                    expect = dense_dot(9, a.support, b.support)
                    assert got.value == pytest.approx(expect)
                    if i1 == i2:
                        want = 1 if j1 == j2 else 0
                    else:
                        want = Fraction(1, 9)
                        assert len(a.support_set & b.support_set) == 1
                    assert got.squared == want


def test_system_l4_d2_verifies():
    sys42 = build_incoherent_vector_system(4, 2)
    assert len(sys42.all_vectors()) == 8
    assert sys42.dimension == 16
    assert verify_system(sys42).ok


def test_system_determinism():
    a = build_incoherent_vector_system(3, 3)
    b = build_incoherent_vector_system(3, 3)
    assert a == b


def test_system_parameter_errors():
    with pytest.raises(ParameterError):
        build_incoherent_vector_system(2, 3)  # d > ell
    with pytest.raises(ParameterError):
        build_incoherent_vector_system(0, 0)
    with pytest.raises(ParameterError):
        build_incoherent_vector_system(10, 7, dimension_cap=1_000_000)


def test_verify_reports_partition_fault_on_mutated_support():
    sys33 = build_incoherent_vector_system(3, 3)
    victim = sys33.vectors[1][0]
    moved = list(victim.support)
    moved[0] = sys33.vectors[1][1].support[0]  # collide with a sibling
    mutated_group = (
        dataclasses.replace(victim, support=tuple(sorted(set(moved)))),
    ) + sys33.vectors[1][1:]
    mutated = dataclasses.replace(
        sys33, vectors=sys33.vectors[:1] + (mutated_group,) + sys33.vectors[2:]
    )
    report = verify_system(mutated)
    assert not report.ok
    failed = {c.name for c in report.failures()}
    assert "within_group_partition" in failed


def test_verify_detail_names_offending_pair():
    sys32 = build_incoherent_vector_system(3, 2)
    foreign = Codeword(9, (0, 3, 6))  # duplicates a group-1 vector
    group = (foreign,) + sys32.vectors[0][1:]
    mutated = dataclasses.replace(sys32, vectors=(group,) + sys32.vectors[1:])
    report = verify_system(mutated)
    assert not report.ok
    assert any(c.detail for c in report.failures())
