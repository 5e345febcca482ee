"""Codeword families used as reduction gadgets.

Two constructions live here: half-support 0/1 codes read off the rows of a
Sylvester matrix (pairwise normalized dot product exactly 1/2), and the
recursively built grid of vectors with within-group dot 0 and cross-group
dot exactly 1/ell.

Entry values such as ell**((1-d)/2) are irrational, so every equality test
runs on squared quantities kept as exact rationals: a codeword stores only
its integer support, the entry value is the derived constant
1/sqrt(support size), and inner products are compared through
|intersection|**2 / (|supp a| * |supp b|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

from .errors import (
    DEFAULT_DIMENSION_CAP,
    DimensionError,
    GadgetShapeError,
    ParameterError,
)

__all__ = [
    "Codeword",
    "HadamardCodeSet",
    "IncoherentVectorSystem",
    "InnerProduct",
    "PropertyCheck",
    "SystemReport",
    "build_hadamard_code_set",
    "build_incoherent_vector_system",
    "complement",
    "dot",
    "verify_system",
]


@dataclass(frozen=True)
class Codeword:
    """A 0/1 indicator vector scaled to unit Euclidean norm.

    Only the support is stored; every nonzero entry equals
    1/sqrt(len(support)), so entry_value_squared * len(support) == 1 holds
    by construction and is checkable in rational arithmetic.
    """

    length: int
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ParameterError("codeword length must be positive")
        if not self.support:
            raise ParameterError("codeword support must be non-empty")
        if list(self.support) != sorted(set(self.support)):
            raise ParameterError("support must be strictly increasing")
        if self.support[0] < 0 or self.support[-1] >= self.length:
            raise ParameterError("support index out of bounds")

    @property
    def support_size(self) -> int:
        return len(self.support)

    @property
    def entry_value_squared(self) -> Fraction:
        return Fraction(1, len(self.support))

    @property
    def entry_value(self) -> float:
        return 1.0 / math.sqrt(len(self.support))

    @cached_property
    def support_set(self) -> frozenset[int]:
        return frozenset(self.support)


class InnerProduct(NamedTuple):
    """Inner product of two codewords: exact square plus float value."""

    squared: Fraction
    value: float


def dot(a: Codeword, b: Codeword) -> InnerProduct:
    """Inner product of two codewords of equal length.

    The value is |supp(a) & supp(b)| * entry(a) * entry(b); its square is
    returned as an exact rational so equality tests carry no tolerance.
    """
    if a.length != b.length:
        raise DimensionError(
            f"codeword lengths differ: {a.length} != {b.length}"
        )
    inter = len(a.support_set & b.support_set)
    squared = Fraction(inter * inter, a.support_size * b.support_size)
    return InnerProduct(squared, inter * a.entry_value * b.entry_value)


@dataclass(frozen=True)
class HadamardCodeSet:
    """All non-constant rows of a Sylvester matrix, read as 0/1 codewords.

    order is a power of two; the all-ones row is excluded, leaving order-1
    codewords of support size order/2 whose pairwise normalized dot
    products are exactly 1/2. Codewords are kept sorted lexicographically
    by support.
    """

    order: int
    codewords: tuple[Codeword, ...]

    def __len__(self) -> int:
        return len(self.codewords)


def build_hadamard_code_set(
    m: int, *, dimension_cap: int = DEFAULT_DIMENSION_CAP
) -> HadamardCodeSet:
    """Half-support code set from the order-2**m Sylvester construction.

    Rows are doubled as [row | row] and [row | inverted row]; +1 entries
    become support members. The all-ones row is dropped. Cost is quadratic
    in the order, so the dimension cap also bounds the work.
    """
    if m < 1:
        raise ParameterError("Sylvester order exponent must be >= 1")
    order = 1 << m
    if order > dimension_cap:
        raise ParameterError(
            f"code dimension 2**{m} exceeds cap {dimension_cap}"
        )
    rows: list[tuple[int, ...]] = [(0,)]
    size = 1
    while size < order:
        doubled: list[tuple[int, ...]] = []
        for supp in rows:
            doubled.append(supp + tuple(i + size for i in supp))
        for supp in rows:
            inside = set(supp)
            flipped = tuple(i + size for i in range(size) if i not in inside)
            doubled.append(supp + flipped)
        rows = doubled
        size *= 2
    half = order // 2
    codewords = []
    for supp in rows[1:]:
        assert len(supp) == half, "non-constant Sylvester row must be half-support"
        codewords.append(Codeword(order, supp))
    codewords.sort(key=lambda c: c.support)
    return HadamardCodeSet(order, tuple(codewords))


def complement(c: Codeword) -> Codeword:
    """Swap zeros and nonzeros of a half-support codeword.

    Only defined when |support| == length/2; the complement then has the
    same entry value and is orthogonal to its mate.
    """
    if 2 * c.support_size != c.length:
        raise GadgetShapeError(
            f"complement needs support size {c.length}/2, got {c.support_size}"
        )
    inside = c.support_set
    supp = tuple(i for i in range(c.length) if i not in inside)
    return Codeword(c.length, supp)


@dataclass(frozen=True)
class IncoherentVectorSystem:
    """Grid of ell*d unit vectors in dimension ell**d.

    vectors[i][j] is the j-th vector of group i (both zero-based). Within a
    group, supports are pairwise disjoint and partition the coordinate
    range; across groups every pair has normalized dot product exactly
    1/ell. Construction does not enforce those identities: verify_system
    is the authority, which keeps fault-injected systems representable.
    """

    ell: int
    d: int
    vectors: tuple[tuple[Codeword, ...], ...]

    def __post_init__(self) -> None:
        if self.ell < 1 or self.d < 1:
            raise ParameterError("ell and d must be positive")
        if self.d > self.ell:
            raise ParameterError("group count d must not exceed ell")

    @property
    def dimension(self) -> int:
        return self.ell**self.d

    def all_vectors(self) -> tuple[Codeword, ...]:
        return tuple(v for group in self.vectors for v in group)


def build_incoherent_vector_system(
    ell: int, d: int, *, dimension_cap: int = DEFAULT_DIMENSION_CAP
) -> IncoherentVectorSystem:
    """Recursive construction of the incoherent grid for 1 <= d <= ell.

    Step k starts from the ell one-hot seed strings, expands each
    coordinate to a run of length ell**(k-1), concatenates ell**(d-k)
    copies to reach length ell**d, and normalizes; the resulting group is
    stored at index d-k. Identical inputs yield bit-identical supports,
    and each group comes out sorted lexicographically by support.
    """
    if ell < 1 or d < 1:
        raise ParameterError("ell and d must be positive")
    if d > ell:
        raise ParameterError(f"need d <= ell, got d={d}, ell={ell}")
    dimension = ell**d
    if dimension > dimension_cap:
        raise ParameterError(
            f"system dimension {ell}**{d} exceeds cap {dimension_cap}"
        )
    groups: list[tuple[Codeword, ...] | None] = [None] * d
    run = 1  # expanded length of a single seed symbol: ell**(k-1)
    for k in range(1, d + 1):
        window = run * ell
        copies = dimension // window
        group = []
        for t in range(ell):
            start = t * run
            supp = tuple(
                c * window + p
                for c in range(copies)
                for p in range(start, start + run)
            )
            group.append(Codeword(dimension, supp))
        groups[d - k] = tuple(group)
        run = window
    return IncoherentVectorSystem(ell, d, tuple(groups))  # type: ignore[arg-type]


class PropertyCheck(NamedTuple):
    name: str
    passed: bool
    detail: str | None = None


@dataclass(frozen=True)
class SystemReport:
    """verify_system outcome: one entry per checked property."""

    checks: tuple[PropertyCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[PropertyCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


def verify_system(sys: IncoherentVectorSystem) -> SystemReport:
    """Check the four defining properties of an incoherent vector grid.

    All comparisons are exact; each failed check reports the first
    counterexample found under a fixed scan order.
    """
    checks = [
        _check_shape(sys),
        _check_within_group_partition(sys),
        _check_cross_group_dot(sys),
        _check_lexicographic_order(sys),
    ]
    return SystemReport(tuple(checks))


def _check_shape(sys: IncoherentVectorSystem) -> PropertyCheck:
    name = "shape"
    dim = sys.dimension
    want_support = sys.ell ** (sys.d - 1)
    if len(sys.vectors) != sys.d:
        return PropertyCheck(name, False, f"expected {sys.d} groups, found {len(sys.vectors)}")
    for i, group in enumerate(sys.vectors):
        if len(group) != sys.ell:
            return PropertyCheck(
                name, False, f"group {i} has {len(group)} vectors, expected {sys.ell}"
            )
        for j, vec in enumerate(group):
            if vec.length != dim:
                return PropertyCheck(
                    name, False, f"vector ({i},{j}) has dimension {vec.length}, expected {dim}"
                )
            if vec.support_size != want_support:
                return PropertyCheck(
                    name,
                    False,
                    f"vector ({i},{j}) has support size {vec.support_size}, expected {want_support}",
                )
    return PropertyCheck(name, True)


def _check_within_group_partition(sys: IncoherentVectorSystem) -> PropertyCheck:
    name = "within_group_partition"
    dim = sys.dimension
    for i, group in enumerate(sys.vectors):
        seen: set[int] = set()
        total = 0
        for j, vec in enumerate(group):
            total += vec.support_size
            overlap = seen & vec.support_set
            if overlap:
                return PropertyCheck(
                    name,
                    False,
                    f"group {i}: vector {j} reuses coordinate {min(overlap)}",
                )
            seen |= vec.support_set
        if total != dim or len(seen) != dim:
            return PropertyCheck(
                name, False, f"group {i} covers {len(seen)} of {dim} coordinates"
            )
    return PropertyCheck(name, True)


def _check_cross_group_dot(sys: IncoherentVectorSystem) -> PropertyCheck:
    name = "cross_group_dot"
    want = Fraction(1, sys.ell * sys.ell)
    for i1 in range(sys.d):
        for i2 in range(i1 + 1, sys.d):
            for j1, v1 in enumerate(sys.vectors[i1]):
                for j2, v2 in enumerate(sys.vectors[i2]):
                    got = dot(v1, v2).squared
                    if got != want:
                        return PropertyCheck(
                            name,
                            False,
                            f"pair ({i1},{j1})x({i2},{j2}) has dot^2 {got}, expected {want}",
                        )
    return PropertyCheck(name, True)


def _check_lexicographic_order(sys: IncoherentVectorSystem) -> PropertyCheck:
    name = "lexicographic_order"
    for i, group in enumerate(sys.vectors):
        for j in range(len(group) - 1):
            if group[j].support >= group[j + 1].support:
                return PropertyCheck(
                    name, False, f"group {i}: vectors {j} and {j + 1} out of order"
                )
    return PropertyCheck(name, True)
