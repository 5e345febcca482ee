"""Compile constraint systems into sparse-approximation instances.

Three compilers share one shape: the target is the all-ones vector, each
(hyper-)edge owns a contiguous block of coordinates, and every column is a
scaled indicator assembled from per-block codewords. The two-layered form
fills blocks with half-support code rows and their complements; the
multilayered forms place vectors of an incoherent grid, with the group
chosen by the (possibly projected) label and the position inside the
group chosen by the layer. An identity matrix is always appended so the
dictionary spans the whole space.

Coherence is computed exactly on squared inner products; floats appear
only in the reported convenience value.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    DEFAULT_DIMENSION_CAP,
    BudgetExceededError,
    IncompleteAssignmentError,
    ParameterError,
    memory_cap_bytes,
)
from .label_cover import UNIQUE, Assignment, LabelCoverInstance, multilayer, smoothness
from .vector_systems import (
    InnerProduct,
    build_hadamard_code_set,
    build_incoherent_vector_system,
    complement,
)

__all__ = [
    "CoherenceReport",
    "GadgetRef",
    "IdentityRef",
    "ReductionParams",
    "SparseInstance",
    "SupportColumn",
    "assignment_to_support",
    "coherence",
    "column_dot",
    "coverage_fraction",
    "reduce_multilayered_smooth",
    "reduce_multilayered_unique",
    "reduce_two_layered",
]

TWO_LAYERED = "two_layered"
MULTILAYERED_SMOOTH = "multilayered_smooth"
MULTILAYERED_UNIQUE = "multilayered_unique"


@dataclass(frozen=True)
class SupportColumn:
    """A dictionary column: integer support plus the derived uniform
    entry value 1/sqrt(support size)."""

    dimension: int
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ParameterError("column dimension must be positive")
        if not self.support:
            raise ParameterError("column support must be non-empty")
        if list(self.support) != sorted(set(self.support)):
            raise ParameterError("support must be strictly increasing")
        if self.support[0] < 0 or self.support[-1] >= self.dimension:
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


def column_dot(a: SupportColumn, b: SupportColumn) -> InnerProduct:
    """Exact-squared inner product of two columns of equal dimension."""
    if a.dimension != b.dimension:
        raise ParameterError("column dimensions differ")
    inter = len(a.support_set & b.support_set)
    squared = Fraction(inter * inter, a.support_size * b.support_size)
    return InnerProduct(squared, inter * a.entry_value * b.entry_value)


class GadgetRef(NamedTuple):
    """Provenance of a gadget column: which vertex-label pair built it."""

    layer: int
    vertex: int
    label: int


class IdentityRef(NamedTuple):
    """Provenance of an appended identity column."""

    coordinate: int


@dataclass(frozen=True)
class ReductionParams:
    """Construction metadata carried by a compiled instance."""

    kind: str
    smoothness: Fraction
    gadget_mu_bound: Fraction
    base_edges: tuple[tuple[int, int], ...]
    code_order: int | None = None
    ell: int | None = None
    d: int | None = None
    t_declared: int | None = None
    identity_exceeds_gadget_bound: bool = False

    @property
    def declared_smoothness_satisfied(self) -> bool | None:
        if self.t_declared is None:
            return None
        return self.smoothness <= Fraction(1, self.t_declared)


@dataclass(frozen=True)
class SparseInstance:
    """Dictionary plus all-ones target plus sparsity budget.

    Columns are ordered (layer, vertex, label) with the identity block
    last; provenance records the origin of every column, and each
    (hyper-)edge owns the contiguous coordinate range
    [edge*block_width, (edge+1)*block_width).
    """

    m_dim: int
    k: int
    block_width: int
    n_blocks: int
    columns: tuple[SupportColumn, ...]
    provenance: tuple[GadgetRef | IdentityRef, ...]
    layer_sizes: tuple[int, ...]
    layer_label_counts: tuple[int, ...]
    params: ReductionParams
    planted_support: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.columns) != len(self.provenance):
            raise ParameterError("one provenance record per column is required")
        if self.block_width * self.n_blocks != self.m_dim:
            raise ParameterError("blocks do not partition the coordinates")

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def gadget_count(self) -> int:
        return self.n_cols - self.m_dim

    def block_range(self, edge_idx: int) -> range:
        if not 0 <= edge_idx < self.n_blocks:
            raise ParameterError(f"block index {edge_idx} out of range")
        start = edge_idx * self.block_width
        return range(start, start + self.block_width)

    @cached_property
    def column_index(self) -> dict[GadgetRef, int]:
        return {
            ref: i
            for i, ref in enumerate(self.provenance)
            if isinstance(ref, GadgetRef)
        }

    def coherence_exponent(self) -> float | None:
        """log k / log ell: the achieved sparsity-vs-incoherence exponent."""
        if self.params.ell is None or self.params.ell <= 1:
            return None
        return math.log(self.k) / math.log(self.params.ell)

    def to_dense(self) -> np.ndarray:
        """Dense float copy of the dictionary, columns in stored order."""
        need = self.m_dim * self.n_cols * 8
        cap = memory_cap_bytes()
        if need > cap:
            raise BudgetExceededError(need, cap, what="dense dictionary bytes")
        phi = np.zeros((self.m_dim, self.n_cols))
        for j, col in enumerate(self.columns):
            phi[list(col.support), j] = col.entry_value
        return phi

    def dense_target(self) -> np.ndarray:
        return np.ones(self.m_dim)


def _require_positive_degrees(inst: LabelCoverInstance) -> None:
    if any(d == 0 for d in inst.left_degrees()) or any(
        d == 0 for d in inst.right_degrees()
    ):
        raise ParameterError(
            "every vertex needs at least one incident edge to own a column"
        )


def _append_identity(
    columns: list[SupportColumn], provenance: list[GadgetRef | IdentityRef], m_dim: int
) -> None:
    for coord in range(m_dim):
        columns.append(SupportColumn(m_dim, (coord,)))
        provenance.append(IdentityRef(coord))


def _identity_flag(
    columns: Iterable[SupportColumn], bound: Fraction
) -> bool:
    min_support = min(c.support_size for c in columns)
    exceeds = Fraction(1, min_support) > bound * bound
    if exceeds:
        warnings.warn(
            "identity columns dominate the gadget coherence bound at these "
            "tiny parameters; full-scope coherence will exceed the claim",
            stacklevel=3,
        )
    return exceeds


def reduce_two_layered(
    inst: LabelCoverInstance,
    t_declared: int | None = None,
    *,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> SparseInstance:
    """Two-layered compiler: one block per edge, filled with half-support
    code rows on the right side and their constraint-selected complements
    on the left side.

    A perfect assignment picks one column per vertex whose supports tile
    every block exactly; the claimed gadget coherence bound is
    1/2 + measured smoothness. t_declared is recorded as metadata only.
    """
    _require_positive_degrees(inst)
    order_exp = inst.sigma_w_size.bit_length()  # smallest 2**m > sigma_w
    codes = build_hadamard_code_set(order_exp, dimension_cap=dimension_cap)
    width = codes.order
    m_dim = width * len(inst.edges)
    if m_dim > dimension_cap:
        raise ParameterError(f"instance dimension {m_dim} exceeds cap {dimension_cap}")
    code_supports = [codes.codewords[i].support for i in range(inst.sigma_w_size)]
    comp_supports = [
        complement(codes.codewords[i]).support for i in range(inst.sigma_w_size)
    ]

    columns: list[SupportColumn] = []
    provenance: list[GadgetRef | IdentityRef] = []
    for v in range(inst.n_left):
        incident = inst.left_incident[v]
        for label in range(inst.sigma_v_size):
            supp: list[int] = []
            for e in incident:
                offset = e * width
                supp.extend(offset + i for i in comp_supports[inst.constraints[e][label]])
            columns.append(SupportColumn(m_dim, tuple(sorted(supp))))
            provenance.append(GadgetRef(0, v, label))
    for w in range(inst.n_right):
        incident = inst.right_incident[w]
        for label in range(inst.sigma_w_size):
            supp = []
            for e in incident:
                offset = e * width
                supp.extend(offset + i for i in code_supports[label])
            columns.append(SupportColumn(m_dim, tuple(sorted(supp))))
            provenance.append(GadgetRef(1, w, label))

    smooth = smoothness(inst)
    bound = Fraction(1, 2) + smooth
    identity_flag = _identity_flag(columns, bound)
    _append_identity(columns, provenance, m_dim)
    params = ReductionParams(
        kind=TWO_LAYERED,
        smoothness=smooth,
        gadget_mu_bound=bound,
        base_edges=inst.edges,
        code_order=codes.order,
        t_declared=t_declared,
        identity_exceeds_gadget_bound=identity_flag,
    )
    sparse = SparseInstance(
        m_dim=m_dim,
        k=inst.n_left + inst.n_right,
        block_width=width,
        n_blocks=len(inst.edges),
        columns=tuple(columns),
        provenance=tuple(provenance),
        layer_sizes=(inst.n_left, inst.n_right),
        layer_label_counts=(inst.sigma_v_size, inst.sigma_w_size),
        params=params,
    )
    if inst.planted is not None:
        support = assignment_to_support(sparse, inst.planted)
        sparse = dataclasses.replace(sparse, planted_support=support)
    return sparse


def _reduce_multilayered(
    inst: LabelCoverInstance,
    ell: int,
    kind: str,
    *,
    dimension_cap: int,
) -> SparseInstance:
    _require_positive_degrees(inst)
    lifted = multilayer(inst, ell)  # validates ell even and >= 2
    d = inst.sigma_w_size
    if d > ell:
        raise ParameterError(
            f"codeword group count {d} exceeds layer count {ell}; "
            "the incoherent grid needs d <= ell"
        )
    width = ell**d
    m_dim = width * len(inst.edges)
    if m_dim > dimension_cap:
        raise ParameterError(f"instance dimension {m_dim} exceeds cap {dimension_cap}")
    system = build_incoherent_vector_system(ell, d, dimension_cap=dimension_cap)

    columns: list[SupportColumn] = []
    provenance: list[GadgetRef | IdentityRef] = []
    for layer in range(ell):
        on_left = lifted.layer_is_left(layer)
        n_vertices = inst.n_left if on_left else inst.n_right
        n_labels = inst.sigma_v_size if on_left else inst.sigma_w_size
        for vertex in range(n_vertices):
            incident = (
                inst.left_incident[vertex] if on_left else inst.right_incident[vertex]
            )
            for label in range(n_labels):
                supp: list[int] = []
                for e in incident:
                    group = inst.constraints[e][label] if on_left else label
                    offset = e * width
                    supp.extend(
                        offset + i for i in system.vectors[group][layer].support
                    )
                columns.append(SupportColumn(m_dim, tuple(sorted(supp))))
                provenance.append(GadgetRef(layer, vertex, label))

    smooth = smoothness(inst)
    if kind == MULTILAYERED_UNIQUE:
        bound = Fraction(1, ell)
    else:
        bound = smooth + Fraction(1, ell)
    identity_flag = _identity_flag(columns, bound)
    _append_identity(columns, provenance, m_dim)
    params = ReductionParams(
        kind=kind,
        smoothness=smooth,
        gadget_mu_bound=bound,
        base_edges=inst.edges,
        ell=ell,
        d=d,
        identity_exceeds_gadget_bound=identity_flag,
    )
    sparse = SparseInstance(
        m_dim=m_dim,
        k=(ell // 2) * (inst.n_left + inst.n_right),
        block_width=width,
        n_blocks=len(inst.edges),
        columns=tuple(columns),
        provenance=tuple(provenance),
        layer_sizes=lifted.layer_sizes,
        layer_label_counts=lifted.layer_alphabets,
        params=params,
    )
    if inst.planted is not None:
        repeated = Assignment.repeated(inst.planted.left, inst.planted.right, ell)
        sparse = dataclasses.replace(
            sparse, planted_support=assignment_to_support(sparse, repeated)
        )
    return sparse


def reduce_multilayered_smooth(
    inst: LabelCoverInstance,
    ell: int,
    *,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> SparseInstance:
    """Multilayered compiler for projection constraints.

    Right-side labels index codeword groups directly; left-side labels are
    pushed through the edge map first, so two left labels merged by every
    incident constraint yield duplicate columns. The claimed gadget
    coherence bound is measured smoothness + 1/ell.
    """
    return _reduce_multilayered(
        inst, ell, MULTILAYERED_SMOOTH, dimension_cap=dimension_cap
    )


def reduce_multilayered_unique(
    inst: LabelCoverInstance,
    ell: int,
    *,
    dimension_cap: int = DEFAULT_DIMENSION_CAP,
) -> SparseInstance:
    """Multilayered compiler for bijective constraints.

    Bijections never merge labels, so no vertex owns duplicate columns and
    the gadget coherence is exactly 1/ell. The instance records ell and k
    so callers can confirm the achieved exponent log k / log ell.
    """
    if inst.flavor != UNIQUE:
        raise ParameterError("this compiler requires bijective constraints")
    if inst.sigma_w_size > ell:
        raise ParameterError(
            f"label count {inst.sigma_w_size} exceeds layer count {ell}"
        )
    return _reduce_multilayered(
        inst, ell, MULTILAYERED_UNIQUE, dimension_cap=dimension_cap
    )


@dataclass(frozen=True)
class CoherenceReport:
    """Maximum pairwise column inner product, exact in its square."""

    scope: str  # "gadget" or "full"
    mu: float
    mu_squared: Fraction
    witness: tuple[int, int] | None
    bound_claimed: Fraction | None
    bound_satisfied: bool | None


def coherence(inst: SparseInstance, scope: str = "gadget") -> CoherenceReport:
    """Exact coherence over the requested column-pair scope.

    Gadget scope ranges over constructed columns only; full scope also
    accounts for the appended identity, whose best dot against a gadget
    column is that column's entry value.
    """
    if scope not in ("gadget", "full"):
        raise ParameterError(f"unknown scope {scope!r}")
    n_gadget = inst.gadget_count
    best = Fraction(0)
    witness: tuple[int, int] | None = None
    for i in range(n_gadget):
        ci = inst.columns[i]
        for j in range(i + 1, n_gadget):
            sq = column_dot(ci, inst.columns[j]).squared
            if sq > best:
                best = sq
                witness = (i, j)
    if scope == "full" and n_gadget > 0:
        # identity-identity pairs are orthogonal; the best identity-gadget
        # pair is the fattest entry of the thinnest gadget column
        for i in range(n_gadget):
            sq = inst.columns[i].entry_value_squared
            if sq > best:
                best = sq
                witness = (i, n_gadget + inst.columns[i].support[0])
    bound = inst.params.gadget_mu_bound if scope == "gadget" else None
    satisfied = None if bound is None else best <= bound * bound
    return CoherenceReport(
        scope=scope,
        mu=math.sqrt(float(best)),
        mu_squared=best,
        witness=witness,
        bound_claimed=bound,
        bound_satisfied=satisfied,
    )


def assignment_to_support(inst: SparseInstance, a: Assignment) -> tuple[int, ...]:
    """Column index set selecting one column per vertex per the assignment."""
    if len(a.layers) != len(inst.layer_sizes):
        raise IncompleteAssignmentError(
            f"expected {len(inst.layer_sizes)} layers, got {len(a.layers)}"
        )
    picked: list[int] = []
    for layer, (labels, size, alpha) in enumerate(
        zip(a.layers, inst.layer_sizes, inst.layer_label_counts)
    ):
        if len(labels) != size:
            raise IncompleteAssignmentError(f"layer {layer} does not label every vertex")
        for vertex, label in enumerate(labels):
            if not 0 <= label < alpha:
                raise ParameterError(f"layer {layer}: label {label} out of range")
            picked.append(inst.column_index[GadgetRef(layer, vertex, label)])
    return tuple(sorted(picked))


def coverage_fraction(inst: SparseInstance, support: Iterable[int]) -> Fraction:
    """|union of selected supports| / dimension, as an exact rational."""
    covered: set[int] = set()
    for idx in support:
        if not 0 <= idx < inst.n_cols:
            raise ParameterError(f"column index {idx} out of range")
        covered |= inst.columns[idx].support_set
    return Fraction(len(covered), inst.m_dim)
