"""Constraint-system modeling, lifting, and evaluation checks."""

from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import clause_game_optimum, exhaustive_label_cover_optimum
from sparsehard.errors import (
    BudgetExceededError,
    IncompleteAssignmentError,
    MalformedFormulaError,
    ParameterError,
)
from sparsehard.label_cover import (
    Assignment,
    LabelCoverInstance,
    Max3SatFormula,
    brute_force_optimum,
    evaluate,
    evaluate_strong,
    generate,
    max3sat_to_label_cover,
    multilayer,
    parallel_repetition,
    random_max3sat,
    smoothness,
    smoothness_detail,
)

SINGLE_CLAUSE = Max3SatFormula(3, (((1, 2, 3)),))


def planted_projection(seed=11, n=3, sigma_v=3, sigma_w=2, degree=2):
    return generate(
        "planted-satisfiable-projection",
        {"n_left": n, "n_right": n, "sigma_v": sigma_v, "sigma_w": sigma_w, "degree": degree},
        seed,
    )


def contradiction_gadget(r_labels=2, copies=1):
    return generate(
        "anti-satisfiable-unique-gadget", {"R": r_labels, "copies": copies}, 0
    )


# ---------------------------------------------------------------- formulas


def test_formula_rejects_repeated_literal():
    with pytest.raises(MalformedFormulaError):
        Max3SatFormula(3, ((1, 1, 2),))


def test_formula_five_occurrence_flag():
    f = random_max3sat(3, seed=5)
    assert f.occurrences() == (5, 5, 5)
    assert len(f.clauses) == 5
    with pytest.raises(MalformedFormulaError):
        Max3SatFormula(3, ((1, 2, 3),), exactly_five=True)


def test_random_max3sat_deterministic():
    assert random_max3sat(6, seed=3) == random_max3sat(6, seed=3)
    assert random_max3sat(6, seed=3) != random_max3sat(6, seed=4)


# ------------------------------------------------------- clause-variable game


def test_single_clause_game_shape_and_projection():
    game = max3sat_to_label_cover(SINGLE_CLAUSE)
    assert (game.n_left, game.n_right) == (1, 3)
    assert (game.sigma_v_size, game.sigma_w_size) == (7, 2)
    assert len(game.edges) == 3
    # satisfying assignments of (x1 or x2 or x3) in lex order; (1,0,0) is
    # the fourth (after 001, 010, 011), so label 3 projects to 1 on the
    # x1 edge and to 0 on the others
    label = 3
    assert game.constraints[0][label] == 1
    assert game.constraints[1][label] == 0
    assert game.constraints[2][label] == 0


def test_game_of_satisfiable_formula_has_perfect_assignment():
    f = Max3SatFormula(4, ((1, -2, 3), (-1, 2, 4)))
    game = max3sat_to_label_cover(f)
    best = exhaustive_label_cover_optimum(
        game.n_left, game.n_right, game.sigma_v_size, game.sigma_w_size,
        game.edges, game.constraints,
    )
    assert best == 1
    assert brute_force_optimum(game).value == 1


def test_game_of_unsatisfiable_formula_below_one():
    # all eight sign patterns over three variables: unsatisfiable
    clauses = tuple(
        tuple((v + 1) * s for v, s in enumerate(signs))
        for signs in product((1, -1), repeat=3)
    )
    f = Max3SatFormula(3, clauses)
    best = clause_game_optimum(f.clauses, f.n_vars)
    assert best == Fraction(23, 24)
    assert best < 1
    # the generic enumerator agrees on a two-clause subgame
    sub = max3sat_to_label_cover(Max3SatFormula(3, clauses[:2]))
    assert (
        exhaustive_label_cover_optimum(
            sub.n_left, sub.n_right, sub.sigma_v_size, sub.sigma_w_size,
            sub.edges, sub.constraints,
        )
        == brute_force_optimum(sub).value
    )


def test_game_rejects_repeated_variable():
    f = Max3SatFormula(3, ((1, -1, 2),))  # distinct literals, same variable
    with pytest.raises(MalformedFormulaError):
        max3sat_to_label_cover(f)


# ------------------------------------------------------- parallel repetition


def test_repetition_u1_is_identity():
    base = planted_projection()
    rep = parallel_repetition(base, 1)
    assert rep.edges == base.edges
    assert rep.constraints == base.constraints
    assert evaluate(rep, base.planted) == evaluate(base, base.planted)


def test_repetition_sizes_squared():
    game = max3sat_to_label_cover(SINGLE_CLAUSE)  # |E| = 3
    rep = parallel_repetition(game, 2)
    assert len(rep.edges) == 9
    assert rep.sigma_v_size == 49
    assert rep.sigma_w_size == 4
    assert rep.n_left == 1
    assert rep.n_right == 9


def test_repetition_preserves_perfect_optimum():
    base = LabelCoverInstance(
        n_left=1,
        n_right=2,
        sigma_v_size=2,
        sigma_w_size=2,
        edges=((0, 0), (0, 1)),
        constraints=((0, 1), (1, 0)),
    )
    assert brute_force_optimum(base).value == 1
    rep = parallel_repetition(base, 2)
    assert brute_force_optimum(rep).value == 1


def test_repetition_lifts_planted_assignment():
    base = planted_projection()
    rep = parallel_repetition(base, 2)
    assert rep.planted is not None
    assert evaluate(rep, rep.planted) == 1


def test_repetition_cap():
    game = max3sat_to_label_cover(random_max3sat(6, seed=1))
    with pytest.raises(ParameterError):
        parallel_repetition(game, 4, cell_cap=10_000)


# ----------------------------------------------------------------- evaluate


def test_evaluate_planted_is_one_and_flip_costs_degree():
    inst = planted_projection()
    assert evaluate(inst, inst.planted) == 1
    w = 0
    flipped_right = list(inst.planted.right)
    flipped_right[w] = (flipped_right[w] + 1) % inst.sigma_w_size
    flipped = Assignment.two_layered(inst.planted.left, flipped_right)
    broken = inst.right_degrees()[w]
    assert evaluate(inst, flipped) == Fraction(
        len(inst.edges) - broken, len(inst.edges)
    )


def test_evaluate_empty_edge_instance_is_one():
    inst = LabelCoverInstance(1, 1, 2, 2, (), ())
    assert evaluate(inst, Assignment.two_layered((0,), (1,))) == 1


def test_evaluate_errors():
    inst = planted_projection()
    with pytest.raises(IncompleteAssignmentError):
        evaluate(inst, Assignment.two_layered((0,), (0,)))
    with pytest.raises(ParameterError):
        evaluate(
            inst,
            Assignment.two_layered((99,) * inst.n_left, (0,) * inst.n_right),
        )


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_evaluate_is_a_probability(seed):
    inst = planted_projection(seed=seed)
    import random as _random

    rng = _random.Random(seed + 1)
    a = Assignment.two_layered(
        tuple(rng.randrange(inst.sigma_v_size) for _ in range(inst.n_left)),
        tuple(rng.randrange(inst.sigma_w_size) for _ in range(inst.n_right)),
    )
    value = evaluate(inst, a)
    assert 0 <= value <= 1
    assert brute_force_optimum(inst).value >= value


# ------------------------------------------------------------- multilayering


def test_multilayer_requires_even():
    with pytest.raises(ParameterError):
        multilayer(planted_projection(), 3)


def test_multilayer_l2_matches_base():
    inst = planted_projection()
    lifted = multilayer(inst, 2)
    assert len(lifted.hyper_edges) == len(inst.edges)
    a = Assignment.repeated(inst.planted.left, inst.planted.right, 2)
    strong = evaluate_strong(lifted, a)
    assert strong.strong_fraction == evaluate(inst, inst.planted)


def test_multilayer_l4_constraint_count_and_strong_completeness():
    inst = planted_projection()
    lifted = multilayer(inst, 4)
    assert len(lifted.hyper_edges) == len(inst.edges)
    assert all(len(h) == 4 for h in lifted.hyper_edges)
    # 3 constraints per hyper-edge: a fully satisfying repeated assignment
    # strongly satisfies everything
    a = Assignment.repeated(inst.planted.left, inst.planted.right, 4)
    strong = evaluate_strong(lifted, a)
    assert strong.strong_fraction == 1
    assert strong.weak_profile[3] == len(inst.edges)


def test_layer_disagreement_blocks_strong_satisfaction():
    inst = generate(
        "planted-satisfiable-unique",
        {"n_left": 2, "n_right": 2, "R": 3, "degree": 2},
        seed=9,
    )
    lifted = multilayer(inst, 4)
    layers = [list(inst.planted.left), list(inst.planted.right)] * 2
    v = 0
    layers[2][v] = (layers[2][v] + 1) % 3  # disagree with layer 0 on v
    result = evaluate_strong(lifted, Assignment(tuple(map(tuple, layers))))
    # under bijections, every hyper-edge at v misses at least one constraint
    touched = sum(1 for ev, _ in inst.edges if ev == v)
    assert sum(result.weak_profile[:3]) >= touched
    assert result.strong_fraction <= Fraction(
        len(inst.edges) - touched, len(inst.edges)
    )


def test_constant_assignment_strong_equals_base_fraction():
    inst = generate(
        "random-unique", {"n_left": 3, "n_right": 3, "R": 2, "degree": 2}, seed=17
    )
    base_assignment = Assignment.two_layered((0,) * 3, (0,) * 3)
    lifted = multilayer(inst, 4)
    repeated = Assignment.repeated((0,) * 3, (0,) * 3, 4)
    assert (
        evaluate_strong(lifted, repeated).strong_fraction
        == evaluate(inst, base_assignment)
    )


# ----------------------------------------------------------------- smoothness


def test_smoothness_of_unique_is_zero():
    inst = generate(
        "random-unique", {"n_left": 3, "n_right": 3, "R": 4, "degree": 2}, seed=2
    )
    assert smoothness(inst) == 0


def test_smoothness_of_constant_map_is_one():
    inst = LabelCoverInstance(
        1, 2, 2, 2, ((0, 0), (0, 1)), ((0, 0), (0, 0))
    )
    assert smoothness(inst) == 1


def test_smoothness_records_isolated_vertices():
    inst = LabelCoverInstance(2, 1, 2, 2, ((0, 0),), ((0, 0),))
    detail = smoothness_detail(inst)
    assert detail.vacuous_vertices == (1,)
    assert detail.value == 1  # vertex 0's single constraint merges both labels


def test_smoothness_of_clause_game_matches_exhaustive_scan():
    game = max3sat_to_label_cover(SINGLE_CLAUSE)
    # independent scan over all vertices, label pairs, and neighbors
    worst = Fraction(0)
    for v in range(game.n_left):
        incident = [e for e, (x, _) in enumerate(game.edges) if x == v]
        for a1 in range(7):
            for a2 in range(a1 + 1, 7):
                merged = sum(
                    1
                    for e in incident
                    if game.constraints[e][a1] == game.constraints[e][a2]
                )
                worst = max(worst, Fraction(merged, len(incident)))
    assert smoothness(game) == worst == Fraction(2, 3)
    detail = smoothness_detail(game)
    assert detail.witness is not None
    assert detail.vacuous_vertices == ()


# ----------------------------------------------------------- brute force, generate


def test_optimum_of_contradiction_gadget_is_half():
    gadget = contradiction_gadget()
    result = brute_force_optimum(gadget)
    assert result.value == Fraction(1, 2)
    assert gadget.declared_optimum == Fraction(1, 2)
    # all four assignments enumerated: optimum confirmed independently
    assert (
        exhaustive_label_cover_optimum(
            1, 1, 2, 2, gadget.edges, gadget.constraints
        )
        == Fraction(1, 2)
    )


def test_strong_optimum_of_lifted_gadget_is_half():
    lifted = multilayer(contradiction_gadget(), 4)
    result = brute_force_optimum(lifted)
    assert result.value == Fraction(1, 2)


def test_brute_force_witness_is_lexicographically_least():
    inst = LabelCoverInstance(1, 1, 2, 2, ((0, 0),), ((0, 1),), flavor="unique")
    result = brute_force_optimum(inst)
    assert result.value == 1
    assert result.witness.layers == ((0,), (0,))  # (1,), (1,) also attains 1


def test_brute_force_budget_refusal():
    inst = planted_projection(n=4, sigma_v=7, sigma_w=2)
    with pytest.raises(BudgetExceededError) as err:
        brute_force_optimum(inst, cap=100)
    assert err.value.required == 7**4 * 2**4
    assert err.value.allowed == 100


def test_planted_unique_optimum_is_one():
    inst = generate(
        "planted-satisfiable-unique",
        {"n_left": 3, "n_right": 3, "R": 2, "degree": 2},
        seed=1,
    )
    assert brute_force_optimum(inst).value == 1
    assert evaluate(inst, inst.planted) == 1


def test_generate_deterministic_and_kind_checked():
    params = {"n_left": 3, "n_right": 3, "R": 2, "degree": 2}
    a = generate("random-unique", params, 7)
    b = generate("random-unique", params, 7)
    assert a == b
    assert a != generate("random-unique", params, 8)
    with pytest.raises(ParameterError):
        generate("nope", {}, 0)
    with pytest.raises(ParameterError):
        generate("random-unique", {"n_left": 3}, 0)


def test_instance_validation():
    with pytest.raises(ParameterError):
        LabelCoverInstance(1, 1, 2, 2, ((0, 5),), ((0, 0),))
    with pytest.raises(ParameterError):
        LabelCoverInstance(1, 1, 2, 2, ((0, 0),), ((0,),))  # not total
    with pytest.raises(ParameterError):
        LabelCoverInstance(1, 1, 2, 2, ((0, 0),), ((0, 0),), flavor="unique")
    with pytest.raises(ParameterError):
        LabelCoverInstance(1, 1, 3, 2, ((0, 0),), ((0, 0, 1),), flavor="unique")


def test_regularity_recorded():
    inst = planted_projection(n=3, degree=2)
    assert inst.is_regular() == (True, True)
    irregular = LabelCoverInstance(
        2, 2, 2, 2, ((0, 0), (0, 1), (1, 0)), ((0, 1), (0, 1), (0, 1))
    )
    assert irregular.is_regular() == (False, False)
