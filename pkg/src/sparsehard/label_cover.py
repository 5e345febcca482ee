"""Bipartite and multilayered constraint-system modeling.

Instances carry per-edge total maps from left labels to right labels
(projection flavor) or bijections (unique flavor). The module builds
instances from bounded-occurrence 3-CNF formulas, raises them to
coordinatewise powers, lifts them to alternating multilayer systems, and
evaluates assignments exactly. All fractions of satisfied constraints are
exact rationals; brute-force optimization refuses politely when the
assignment space exceeds its budget.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, NamedTuple

from .errors import (
    DEFAULT_ASSIGNMENT_CAP,
    BudgetExceededError,
    IncompleteAssignmentError,
    MalformedFormulaError,
    ParameterError,
)

__all__ = [
    "Assignment",
    "LabelCoverInstance",
    "Max3SatFormula",
    "MultilayeredInstance",
    "OptimumResult",
    "StrongEvaluation",
    "brute_force_optimum",
    "evaluate",
    "evaluate_strong",
    "generate",
    "max3sat_to_label_cover",
    "multilayer",
    "parallel_repetition",
    "random_max3sat",
    "smoothness",
    "smoothness_detail",
]

PROJECTION = "projection"
UNIQUE = "unique"

GENERATOR_KINDS = (
    "planted-satisfiable-projection",
    "planted-satisfiable-unique",
    "random-unique",
    "anti-satisfiable-unique-gadget",
)


@dataclass(frozen=True)
class Assignment:
    """Per-layer label maps; two layers in the plain bipartite case."""

    layers: tuple[tuple[int, ...], ...]

    @classmethod
    def two_layered(cls, left: Iterable[int], right: Iterable[int]) -> "Assignment":
        return cls((tuple(left), tuple(right)))

    @classmethod
    def repeated(cls, left: Iterable[int], right: Iterable[int], ell: int) -> "Assignment":
        """Reuse one bipartite assignment on all ell alternating layers."""
        if ell % 2 != 0 or ell < 2:
            raise ParameterError("layer count must be even and >= 2")
        l, r = tuple(left), tuple(right)
        return cls((l, r) * (ell // 2))

    @property
    def left(self) -> tuple[int, ...]:
        return self.layers[0]

    @property
    def right(self) -> tuple[int, ...]:
        return self.layers[1]


@dataclass(frozen=True)
class Max3SatFormula:
    """3-CNF with distinct variables per clause, DIMACS-style literals.

    With exactly_five set, every variable must occur in exactly five
    clauses, which pins the clause/variable counts of the derived
    constraint game.
    """

    n_vars: int
    clauses: tuple[tuple[int, int, int], ...]
    exactly_five: bool = False

    def __post_init__(self) -> None:
        if self.n_vars < 1:
            raise MalformedFormulaError("formula needs at least one variable")
        for clause in self.clauses:
            if len(clause) != 3:
                raise MalformedFormulaError(f"clause {clause} is not ternary")
            for lit in clause:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise MalformedFormulaError(f"literal {lit} out of range")
            if len(set(clause)) != 3:
                raise MalformedFormulaError(f"clause {clause} repeats a literal")
        if self.exactly_five:
            counts = self.occurrences()
            bad = [v + 1 for v, c in enumerate(counts) if c != 5]
            if bad:
                raise MalformedFormulaError(
                    f"variables {bad} do not occur exactly five times"
                )

    def occurrences(self) -> tuple[int, ...]:
        counts = [0] * self.n_vars
        for clause in self.clauses:
            for lit in clause:
                counts[abs(lit) - 1] += 1
        return tuple(counts)


def random_max3sat(n_vars: int, seed: int) -> Max3SatFormula:
    """Seeded formula in which every variable occurs exactly five times.

    Shuffles five copies of each variable into triples and re-deals until
    no triple repeats a variable; signs are drawn afterwards. Requires
    n_vars divisible by 3 so that 5*n_vars splits into triples.
    """
    if n_vars < 3 or n_vars % 3 != 0:
        raise ParameterError("variable count must be a positive multiple of 3")
    rng = random.Random(seed)
    slots = [v for v in range(1, n_vars + 1) for _ in range(5)]
    for _ in range(100_000):
        rng.shuffle(slots)
        triples = [tuple(slots[i : i + 3]) for i in range(0, len(slots), 3)]
        if all(len(set(t)) == 3 for t in triples):
            clauses = tuple(
                tuple(v if rng.random() < 0.5 else -v for v in t) for t in triples
            )
            return Max3SatFormula(n_vars, clauses, exactly_five=True)
    raise MalformedFormulaError("could not deal a repeat-free clause set")


@dataclass(frozen=True)
class LabelCoverInstance:
    """Bipartite constraint system with one total map per edge.

    constraints[e][a] gives the right label that edge e forces when the
    left endpoint takes label a. Regularity is recorded by the degree
    helpers, not enforced: evaluators accept irregular graphs.
    """

    n_left: int
    n_right: int
    sigma_v_size: int
    sigma_w_size: int
    edges: tuple[tuple[int, int], ...]
    constraints: tuple[tuple[int, ...], ...]
    flavor: str = PROJECTION
    planted: Assignment | None = None
    declared_optimum: Fraction | None = None

    def __post_init__(self) -> None:
        if self.n_left < 1 or self.n_right < 1:
            raise ParameterError("vertex sets must be non-empty")
        if self.sigma_v_size < 1 or self.sigma_w_size < 1:
            raise ParameterError("label alphabets must be non-empty")
        if self.flavor not in (PROJECTION, UNIQUE):
            raise ParameterError(f"unknown flavor {self.flavor!r}")
        if len(self.edges) != len(self.constraints):
            raise ParameterError("one constraint table per edge is required")
        for v, w in self.edges:
            if not (0 <= v < self.n_left and 0 <= w < self.n_right):
                raise ParameterError(f"edge ({v},{w}) out of range")
        for e, table in enumerate(self.constraints):
            if len(table) != self.sigma_v_size:
                raise ParameterError(f"edge {e}: constraint is not total")
            if any(not 0 <= b < self.sigma_w_size for b in table):
                raise ParameterError(f"edge {e}: constraint value out of range")
        if self.flavor == UNIQUE:
            if self.sigma_v_size != self.sigma_w_size:
                raise ParameterError("unique flavor needs equal alphabets")
            for e, table in enumerate(self.constraints):
                if len(set(table)) != self.sigma_w_size:
                    raise ParameterError(f"edge {e}: constraint is not a bijection")

    @cached_property
    def left_incident(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_left)]
        for e, (v, _) in enumerate(self.edges):
            out[v].append(e)
        return tuple(tuple(es) for es in out)

    @cached_property
    def right_incident(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_right)]
        for e, (_, w) in enumerate(self.edges):
            out[w].append(e)
        return tuple(tuple(es) for es in out)

    def left_degrees(self) -> tuple[int, ...]:
        return tuple(len(es) for es in self.left_incident)

    def right_degrees(self) -> tuple[int, ...]:
        return tuple(len(es) for es in self.right_incident)

    def is_regular(self) -> tuple[bool, bool]:
        return (
            len(set(self.left_degrees())) <= 1,
            len(set(self.right_degrees())) <= 1,
        )


@dataclass(frozen=True)
class MultilayeredInstance:
    """Alternating lift: layer i copies V for even i, W for odd i (0-based).

    Hyper-edges are in one-to-one correspondence with base edges; the
    ell-1 constraints along a hyper-edge are all identical to the base
    edge's map, one per adjacent layer pair, always oriented from the
    V-side layer to the W-side layer.
    """

    ell: int
    base: LabelCoverInstance

    def __post_init__(self) -> None:
        if self.ell < 2 or self.ell % 2 != 0:
            raise ParameterError("layer count must be even and >= 2")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple(
            self.base.n_left if i % 2 == 0 else self.base.n_right
            for i in range(self.ell)
        )

    @property
    def layer_alphabets(self) -> tuple[int, ...]:
        return tuple(
            self.base.sigma_v_size if i % 2 == 0 else self.base.sigma_w_size
            for i in range(self.ell)
        )

    @property
    def hyper_edges(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            (v, w) * (self.ell // 2) for v, w in self.base.edges
        )

    def constraints_for(self, edge_idx: int) -> tuple[int, ...]:
        """The shared table of all ell-1 constraints of a hyper-edge."""
        return self.base.constraints[edge_idx]

    def layer_is_left(self, layer: int) -> bool:
        return layer % 2 == 0


class StrongEvaluation(NamedTuple):
    strong_fraction: Fraction
    weak_profile: tuple[int, ...]  # index s: hyper-edges with s constraints satisfied


class OptimumResult(NamedTuple):
    value: Fraction
    witness: Assignment


class SmoothnessDetail(NamedTuple):
    value: Fraction
    witness: tuple[int, int, int] | None  # (vertex, label_a, label_b)
    vacuous_vertices: tuple[int, ...]


def _check_two_layered(inst: LabelCoverInstance, a: Assignment) -> None:
    if len(a.layers) != 2:
        raise IncompleteAssignmentError("bipartite instance needs two layers")
    if len(a.left) != inst.n_left or len(a.right) != inst.n_right:
        raise IncompleteAssignmentError("assignment does not label every vertex")
    if any(not 0 <= x < inst.sigma_v_size for x in a.left):
        raise ParameterError("left label out of range")
    if any(not 0 <= x < inst.sigma_w_size for x in a.right):
        raise ParameterError("right label out of range")


def evaluate(inst: LabelCoverInstance, a: Assignment) -> Fraction:
    """Exact fraction of edges whose map sends the left label to the right one.

    An empty edge set evaluates to 1 (vacuous satisfaction), keeping the
    rational arithmetic total.
    """
    _check_two_layered(inst, a)
    if not inst.edges:
        return Fraction(1)
    sat = sum(
        1
        for e, (v, w) in enumerate(inst.edges)
        if inst.constraints[e][a.left[v]] == a.right[w]
    )
    return Fraction(sat, len(inst.edges))


def _check_layered(inst: MultilayeredInstance, a: Assignment) -> None:
    if len(a.layers) != inst.ell:
        raise IncompleteAssignmentError(
            f"expected {inst.ell} layers, got {len(a.layers)}"
        )
    for i, (labels, size, alpha) in enumerate(
        zip(a.layers, inst.layer_sizes, inst.layer_alphabets)
    ):
        if len(labels) != size:
            raise IncompleteAssignmentError(f"layer {i} does not label every vertex")
        if any(not 0 <= x < alpha for x in labels):
            raise ParameterError(f"layer {i}: label out of range")


def _satisfied_in_hyper_edge(
    inst: MultilayeredInstance, a: Assignment, edge_idx: int
) -> int:
    v, w = inst.base.edges[edge_idx]
    table = inst.constraints_for(edge_idx)
    count = 0
    for j in range(inst.ell - 1):
        left_layer, right_layer = (j, j + 1) if j % 2 == 0 else (j + 1, j)
        if table[a.layers[left_layer][v]] == a.layers[right_layer][w]:
            count += 1
    return count


def evaluate_strong(inst: MultilayeredInstance, a: Assignment) -> StrongEvaluation:
    """Strong fraction (all ell-1 constraints hold) plus the weak profile.

    The profile histogram counts hyper-edges by how many of their
    constraints the assignment satisfies.
    """
    _check_layered(inst, a)
    n_edges = len(inst.base.edges)
    profile = [0] * inst.ell
    if n_edges == 0:
        return StrongEvaluation(Fraction(1), tuple(profile))
    strong = 0
    for e in range(n_edges):
        sat = _satisfied_in_hyper_edge(inst, a, e)
        profile[sat] += 1
        if sat == inst.ell - 1:
            strong += 1
    return StrongEvaluation(Fraction(strong, n_edges), tuple(profile))


def multilayer(inst: LabelCoverInstance, ell: int) -> MultilayeredInstance:
    """Lift to ell alternating layers, one hyper-edge per base edge."""
    return MultilayeredInstance(ell, inst)


def smoothness(inst: LabelCoverInstance) -> Fraction:
    """Worst-case label-pair collision probability over a random neighbor."""
    return smoothness_detail(inst).value


def smoothness_detail(inst: LabelCoverInstance) -> SmoothnessDetail:
    """As smoothness, with the witnessing (vertex, label pair) and the
    degree-0 vertices that were treated as vacuously smooth."""
    worst = Fraction(0)
    witness: tuple[int, int, int] | None = None
    vacuous: list[int] = []
    for v in range(inst.n_left):
        incident = inst.left_incident[v]
        if not incident:
            vacuous.append(v)
            continue
        for a1, a2 in combinations(range(inst.sigma_v_size), 2):
            merged = sum(
                1 for e in incident if inst.constraints[e][a1] == inst.constraints[e][a2]
            )
            frac = Fraction(merged, len(incident))
            if frac > worst:
                worst = frac
                witness = (v, a1, a2)
    return SmoothnessDetail(worst, witness, tuple(vacuous))


def max3sat_to_label_cover(f: Max3SatFormula) -> LabelCoverInstance:
    """Clause-variable game: left vertices are clauses labeled by their
    seven satisfying assignments, right vertices are variables labeled by
    bits, and each clause-occurrence edge restricts the clause label to
    the variable's bit.

    Satisfying assignments of a clause are indexed in lexicographic order
    of their bit triples.
    """
    edges: list[tuple[int, int]] = []
    constraints: list[tuple[int, ...]] = []
    for c_idx, clause in enumerate(f.clauses):
        variables = [abs(lit) - 1 for lit in clause]
        if len(set(variables)) != 3:
            raise MalformedFormulaError(f"clause {clause} repeats a variable")
        satisfying = [
            bits
            for bits in product((0, 1), repeat=3)
            if any((bits[i] == 1) != (clause[i] < 0) for i in range(3))
        ]
        assert len(satisfying) == 7, "a ternary clause has exactly 7 satisfying rows"
        for occ in range(3):
            edges.append((c_idx, variables[occ]))
            constraints.append(tuple(bits[occ] for bits in satisfying))
    return LabelCoverInstance(
        n_left=len(f.clauses),
        n_right=f.n_vars,
        sigma_v_size=7,
        sigma_w_size=2,
        edges=tuple(edges),
        constraints=tuple(constraints),
        flavor=PROJECTION,
    )


def _encode(digits: tuple[int, ...], base: int) -> int:
    value = 0
    for d in digits:
        value = value * base + d
    return value


def _decode(value: int, base: int, width: int) -> tuple[int, ...]:
    digits = []
    for _ in range(width):
        value, d = divmod(value, base)
        digits.append(d)
    return tuple(reversed(digits))


def parallel_repetition(
    inst: LabelCoverInstance, u: int, *, cell_cap: int = DEFAULT_ASSIGNMENT_CAP
) -> LabelCoverInstance:
    """u-fold coordinatewise power of the instance.

    Vertices, edges and labels become u-tuples (big-endian encoded), and a
    product edge is satisfied when every coordinate is. Sizes obey
    |V'|=|V|**u, |E'|=|E|**u, |Sigma'|=|Sigma|**u exactly.
    """
    if u < 1:
        raise ParameterError("repetition count must be >= 1")
    n_edges = len(inst.edges) ** u
    sigma_v = inst.sigma_v_size**u
    sigma_w = inst.sigma_w_size**u
    cells = n_edges * sigma_v
    if cells > cell_cap:
        raise ParameterError(
            f"repetition needs {cells} constraint cells, cap is {cell_cap}"
        )
    edges: list[tuple[int, int]] = []
    constraints: list[tuple[int, ...]] = []
    for edge_tuple in product(range(len(inst.edges)), repeat=u):
        v_tuple = tuple(inst.edges[e][0] for e in edge_tuple)
        w_tuple = tuple(inst.edges[e][1] for e in edge_tuple)
        edges.append(
            (_encode(v_tuple, inst.n_left), _encode(w_tuple, inst.n_right))
        )
        tables = [inst.constraints[e] for e in edge_tuple]
        row = []
        for a in range(sigma_v):
            digits = _decode(a, inst.sigma_v_size, u)
            image = tuple(tables[i][digits[i]] for i in range(u))
            row.append(_encode(image, inst.sigma_w_size))
        constraints.append(tuple(row))
    planted = None
    if inst.planted is not None:
        # vertex tuples inherit the tuple of their coordinates' planted labels
        left = tuple(
            _encode(tuple(inst.planted.left[d] for d in _decode(vid, inst.n_left, u)), inst.sigma_v_size)
            for vid in range(inst.n_left**u)
        )
        right = tuple(
            _encode(tuple(inst.planted.right[d] for d in _decode(wid, inst.n_right, u)), inst.sigma_w_size)
            for wid in range(inst.n_right**u)
        )
        planted = Assignment.two_layered(left, right)
    declared = inst.declared_optimum if inst.declared_optimum == 1 else None
    return LabelCoverInstance(
        n_left=inst.n_left**u,
        n_right=inst.n_right**u,
        sigma_v_size=sigma_v,
        sigma_w_size=sigma_w,
        edges=tuple(edges),
        constraints=tuple(constraints),
        flavor=inst.flavor,
        planted=planted,
        declared_optimum=declared,
    )


def _assignment_space(sizes: Iterable[int], alphabets: Iterable[int]) -> int:
    space = 1
    for size, alpha in zip(sizes, alphabets):
        space *= alpha**size
    return space


def brute_force_optimum(
    inst: LabelCoverInstance | MultilayeredInstance,
    *,
    cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> OptimumResult:
    """Exact optimum by assignment enumeration, with the lexicographically
    least witness under the layer-major vertex order.

    For multilayered instances the objective is the strong fraction.
    Refuses with a budget report when the assignment space exceeds cap.
    """
    if isinstance(inst, MultilayeredInstance):
        sizes = inst.layer_sizes
        alphabets = inst.layer_alphabets
    else:
        sizes = (inst.n_left, inst.n_right)
        alphabets = (inst.sigma_v_size, inst.sigma_w_size)
    space = _assignment_space(sizes, alphabets)
    if space > cap:
        raise BudgetExceededError(space, cap, what="assignment enumeration")

    ranges = [range(alpha) for size, alpha in zip(sizes, alphabets) for _ in range(size)]
    offsets = []
    total = 0
    for size in sizes:
        offsets.append(total)
        total += size

    best: Fraction | None = None
    best_flat: tuple[int, ...] | None = None
    if isinstance(inst, MultilayeredInstance):
        base = inst.base
        n_edges = len(base.edges)
        for flat in product(*ranges):
            layers = tuple(
                flat[offsets[i] : offsets[i] + sizes[i]] for i in range(len(sizes))
            )
            if n_edges == 0:
                value = Fraction(1)
            else:
                strong = 0
                for e, (v, w) in enumerate(base.edges):
                    table = base.constraints[e]
                    ok = True
                    for j in range(inst.ell - 1):
                        ll, rl = (j, j + 1) if j % 2 == 0 else (j + 1, j)
                        if table[layers[ll][v]] != layers[rl][w]:
                            ok = False
                            break
                    if ok:
                        strong += 1
                value = Fraction(strong, n_edges)
            if best is None or value > best:
                best, best_flat = value, flat
    else:
        n_edges = len(inst.edges)
        n_left = inst.n_left
        for flat in product(*ranges):
            if n_edges == 0:
                value = Fraction(1)
            else:
                sat = sum(
                    1
                    for e, (v, w) in enumerate(inst.edges)
                    if inst.constraints[e][flat[v]] == flat[n_left + w]
                )
                value = Fraction(sat, n_edges)
            if best is None or value > best:
                best, best_flat = value, flat
    assert best is not None and best_flat is not None
    layers = tuple(
        tuple(best_flat[offsets[i] : offsets[i] + sizes[i]]) for i in range(len(sizes))
    )
    return OptimumResult(best, Assignment(layers))


def _ring_edges(n_left: int, n_right: int, degree: int) -> tuple[tuple[int, int], ...]:
    if degree < 1 or degree > n_right:
        raise ParameterError("degree must be between 1 and the right size")
    return tuple(
        (v, (v + t) % n_right) for v in range(n_left) for t in range(degree)
    )


def _require(params: dict, key: str, default: int | None = None) -> int:
    if key in params:
        value = params[key]
    elif default is not None:
        value = default
    else:
        raise ParameterError(f"generator parameter {key!r} is required")
    if not isinstance(value, int) or value < 1:
        raise ParameterError(f"generator parameter {key!r} must be a positive integer")
    return value


def generate(kind: str, params: dict, seed: int) -> LabelCoverInstance:
    """Seeded instance supply for experiments; deterministic per
    (kind, params, seed).

    planted-* kinds embed a hidden perfect assignment (exposed via the
    planted field); the anti-satisfiable gadget pairs an identity with a
    label rotation on parallel edges, pinning the optimum at exactly 1/2.
    """
    if kind not in GENERATOR_KINDS:
        raise ParameterError(f"unknown generator kind {kind!r}")
    rng = random.Random(seed)
    if kind == "planted-satisfiable-projection":
        n_left = _require(params, "n_left")
        n_right = _require(params, "n_right")
        sigma_v = _require(params, "sigma_v")
        sigma_w = _require(params, "sigma_w")
        degree = _require(params, "degree", min(2, n_right))
        edges = _ring_edges(n_left, n_right, degree)
        left = tuple(rng.randrange(sigma_v) for _ in range(n_left))
        right = tuple(rng.randrange(sigma_w) for _ in range(n_right))
        constraints = []
        for v, w in edges:
            table = [rng.randrange(sigma_w) for _ in range(sigma_v)]
            table[left[v]] = right[w]
            constraints.append(tuple(table))
        return LabelCoverInstance(
            n_left,
            n_right,
            sigma_v,
            sigma_w,
            edges,
            tuple(constraints),
            flavor=PROJECTION,
            planted=Assignment.two_layered(left, right),
            declared_optimum=Fraction(1),
        )
    if kind in ("planted-satisfiable-unique", "random-unique"):
        n_left = _require(params, "n_left")
        n_right = _require(params, "n_right")
        r_labels = _require(params, "R")
        degree = _require(params, "degree", min(2, n_right))
        edges = _ring_edges(n_left, n_right, degree)
        planted = None
        constraints = []
        if kind == "planted-satisfiable-unique":
            left = tuple(rng.randrange(r_labels) for _ in range(n_left))
            right = tuple(rng.randrange(r_labels) for _ in range(n_right))
            planted = Assignment.two_layered(left, right)
            for v, w in edges:
                perm = list(range(r_labels))
                rng.shuffle(perm)
                # swap so the hidden assignment satisfies this edge
                hole = perm.index(right[w])
                perm[hole], perm[left[v]] = perm[left[v]], perm[hole]
                constraints.append(tuple(perm))
        else:
            for _ in edges:
                perm = list(range(r_labels))
                rng.shuffle(perm)
                constraints.append(tuple(perm))
        return LabelCoverInstance(
            n_left,
            n_right,
            r_labels,
            r_labels,
            edges,
            tuple(constraints),
            flavor=UNIQUE,
            planted=planted,
            declared_optimum=Fraction(1) if planted is not None else None,
        )
    # anti-satisfiable-unique-gadget
    r_labels = _require(params, "R", 2)
    copies = _require(params, "copies", 1)
    if r_labels < 2:
        raise ParameterError("the contradiction gadget needs R >= 2")
    identity = tuple(range(r_labels))
    rotation = tuple((a + 1) % r_labels for a in range(r_labels))
    edges = []
    constraints = []
    for c in range(copies):
        edges.append((c, c))
        constraints.append(identity)
        edges.append((c, c))
        constraints.append(rotation)
    return LabelCoverInstance(
        copies,
        copies,
        r_labels,
        r_labels,
        tuple(edges),
        tuple(constraints),
        flavor=UNIQUE,
        declared_optimum=Fraction(1, 2),
    )
