"""
Pruebas de las soluciones cerradas con variables independientes, el flujo CSR y las rachas
"""
from fractions import Fraction as F

import numpy as np
import pytest

from poset_core.errors import DegenerateHider, InfeasibleDual, ValidationError, WeightTooLarge
from poset_core.generators import iter_posets
from poset_core.poset import Variant
from game_engine.engine import GameInstance, solve_oracle
from prob_model.models import IndependentModel, PseudoBayesTree, TreeNode, ValueModel, random_independent
from solvers.flow import (
    antichain_hider,
    antichain_objective,
    csr_dual_solution,
    csr_flow_strategy,
    csr_value_and_hider,
    dual_rounding,
)
from solvers.runs import run_reduction, solve_value_order, value_matrix
from solvers.tree_game import independent_caterpillar, solve_tree_game
from solvers.uncorrelated import (
    bounds,
    maxima_dominate,
    maxima_formula,
    solve_multistage,
    solve_osr_maxima,
    solve_total_order,
    solve_unordered,
)

HALF = F(1, 2)

# (valores esperados en orden, valor del juego)
VALUE_ORDERS = [
    ((F(2), HALF), F(1)),
    ((HALF, F(2), F(2), F(1, 4)), HALF),
    ((F(3, 2), HALF, F(3, 2), HALF), F(3, 5)),
    ((HALF, HALF), F(1, 3)),
]


def _values(expected):
    return ValueModel.from_pairs([(f"x{i}", e) for i, e in enumerate(expected)])


# =========================
# Ubicaciones no ordenadas y órdenes totales
# =========================
def test_unordered_osr():
    model = IndependentModel({"a": HALF, "b": HALF, "c": F(1, 4)})
    certificate = solve_unordered(model, Variant.OSR)
    assert certificate.value == F(3, 16)
    assert certificate.method == "unordered-osr"
    assert certificate.certified
    assert certificate.hider.as_dict() == {"a": F(1, 5), "b": F(1, 5), "c": F(3, 5)}


def test_unordered_csr():
    certificate = solve_unordered(IndependentModel({"a": HALF, "b": HALF}), Variant.CSR)
    assert certificate.value == F(1, 4)
    assert certificate.searcher.as_dict() == {("a",): HALF, ("b",): HALF}
    assert certificate.certified


def test_unordered_requires_independent_model(f1_model):
    with pytest.raises(ValidationError):
        solve_unordered(f1_model, Variant.OSR)


def test_unordered_osr_certain_locations():
    certificate = solve_unordered(IndependentModel({"a": F(1), "b": F(1)}), Variant.OSR)
    assert certificate.value == 1


def test_total_order_two_chain():
    certificate = solve_total_order(IndependentModel({"a": HALF, "b": HALF}), ("a", "b"))
    assert certificate.value == F(1, 3)
    assert certificate.searcher.as_dict() == {("a", "b"): F(2, 3), ("b",): F(1, 3)}
    assert certificate.hider.as_dict() == {"a": F(1, 3), "b": F(2, 3)}
    assert certificate.certified


def test_total_order_rejects_foreign_order(halves):
    with pytest.raises(ValidationError):
        solve_total_order(halves, ("a", "b"))


# =========================
# Etapas y máximos
# =========================
def test_multistage_d(halves):
    stages = [halves.restrict(["a", "b"]), halves.restrict(["c"])]
    osr = solve_multistage(stages, Variant.OSR)
    assert osr.value == F(1, 4)
    assert osr.hider.as_dict() == {"a": F(1, 4), "b": F(1, 4), "c": HALF}
    assert osr.certified
    csr = solve_multistage(stages, Variant.CSR)
    assert csr.value == F(1, 4)
    assert csr.certified


def test_multistage_on_longer_sum():
    model = IndependentModel({"a": F(1, 3), "b": F(2, 3), "c": HALF, "d": F(3, 4)})
    stages = [model.restrict(["a"]), model.restrict(["b", "c"]), model.restrict(["d"])]
    certificate = solve_multistage(stages, Variant.OSR)
    assert certificate.value == F(6, 29)
    assert certificate.certified


def test_maxima_formula_on_d_and_w(d_game, w_game):
    assert maxima_dominate(d_game.poset)
    solution = solve_osr_maxima(d_game.poset, d_game.model)
    assert solution.value == F(1, 4)
    assert solution.certified

    assert not maxima_dominate(w_game.poset)
    assert maxima_formula(w_game.poset, w_game.model) == F(3, 11)
    uncertified = solve_osr_maxima(w_game.poset, w_game.model)
    assert not uncertified.certified
    assert uncertified.certificate is None
    assert solve_oracle(w_game).value == F(7, 25)


def test_bounds_on_d(d_poset, halves):
    osr = bounds(d_poset, halves, Variant.OSR)
    assert (osr.lower, osr.upper) == (F(1, 4), F(7, 24))
    csr = bounds(d_poset, halves, Variant.CSR)
    assert (csr.lower, csr.upper) == (F(1, 5), F(1, 4))
    assert csr.lower_source == "dilworth-width"


# =========================
# Flujo CSR y redondeo del dual
# =========================
def test_csr_flow_two_chain(chain2):
    poset, model = chain2
    found = csr_value_and_hider(poset, model)
    assert found.value == F(1, 3)
    assert found.antichain == frozenset({"b"})
    flow = csr_flow_strategy(poset, model)
    assert flow.total == 3
    assert flow.searcher.as_dict() == {("a", "b"): F(2, 3), ("b",): F(1, 3)}


def test_csr_flow_on_d_matches_oracle(d_poset, halves):
    flow = csr_flow_strategy(d_poset, halves)
    game = GameInstance(d_poset, halves, Variant.CSR)
    assert 1 / flow.total == solve_oracle(game).value == F(1, 4)


def test_dual_rounding_star(star_poset, star_model):
    model = star_model(F(1, 4))
    dual = csr_dual_solution(star_poset, model)
    rounded = dual_rounding(star_poset, model, dual.g, dual.h)
    assert rounded.antichain == frozenset({"*"})
    assert rounded.objective == 6
    assert rounded.maximal


def test_dual_rounding_rejects_infeasible_dual(star_poset, star_model):
    with pytest.raises(InfeasibleDual):
        dual_rounding(star_poset, star_model(F(1, 4)), {"u1": F(2)}, {})


def test_dual_rounding_of_zero_dual(star_poset, star_model):
    rounded = dual_rounding(star_poset, star_model(F(1, 4)), {}, {})
    assert rounded.antichain == frozenset()
    assert not rounded.maximal


def test_csr_value_through_dual_when_enumeration_is_capped(d_poset, halves):
    found = csr_value_and_hider(d_poset, halves, max_elements=0)
    assert found.value == F(1, 4)
    assert antichain_objective(d_poset, halves, found.antichain) == 4


def test_antichain_hider_needs_locations(star_poset, star_model):
    with pytest.raises(DegenerateHider):
        antichain_hider(star_poset, star_model(F(1, 4)), frozenset())


@pytest.mark.slow
def test_dual_rounding_is_exact_on_small_posets():
    rng = np.random.Generator(np.random.PCG64(31))
    for n in range(1, 6):
        for poset in iter_posets(n):
            for _ in range(5):
                model = random_independent(rng, poset.elements)
                dual = csr_dual_solution(poset, model)
                rounded = dual_rounding(poset, model, dual.g, dual.h)
                value = csr_value_and_hider(poset, model).value
                assert rounded.maximal
                assert rounded.objective == dual.objective == 1 / value
                assert csr_value_and_hider(poset, model, max_elements=0).value == value


# =========================
# Juego sobre árboles
# =========================
def test_tree_game_f1(f1_tree):
    solution = solve_tree_game(f1_tree)
    assert solution.certificate.value == F(14, 177)
    assert solution.certificate.certified
    assert solution.certificate.hider.as_dict() == {"a": F(36, 59), "b": F(18, 59), "c": F(5, 59)}
    inner = solution.root.children[0]
    assert (inner.value, inner.pr) == (F(1, 6), F(1, 10))


def test_tree_game_rejects_large_weights():
    tree = PseudoBayesTree(TreeNode(F(1, 4), children=(
        TreeNode(F(2), children=(TreeNode(HALF, leaf="a"), TreeNode(HALF, leaf="b"))),
        TreeNode(HALF, leaf="c"),
    )))
    with pytest.raises(WeightTooLarge):
        solve_tree_game(tree)


def test_independent_caterpillar_value():
    tree = independent_caterpillar({"a": HALF, "b": HALF, "c": F(1, 4)})
    assert tree.internal_weights() == [F(1)]
    assert solve_tree_game(tree).certificate.value == F(3, 16)


# =========================
# Valores esperados generales
# =========================
@pytest.mark.parametrize("expected,value", VALUE_ORDERS)
def test_value_order(expected, value):
    reduced = run_reduction(_values(expected))
    assert solve_value_order(reduced.model) == value


def test_run_reduction_segments_and_dropped():
    reduced = run_reduction(_values((F(2), HALF)))
    assert reduced.segments == (("x0", "x1"),)
    assert reduced.model.expected == (F(1),)
    dropped = run_reduction(_values((F(2), F(1), F(3))))
    assert dropped.segments == (("x0",),)
    assert dropped.dropped == ("x1", "x2")


def test_value_matrix_and_unreduced_input():
    assert value_matrix(_values((HALF, F(2)))) == [[HALF, F(1)], [F(0), F(2)]]
    with pytest.raises(ValidationError):
        solve_value_order(_values((F(2), HALF)))


def test_bernoulli_values_match_total_order():
    """Con e_i = Pr(i) ≤ 1 el juego de valores es el orden total de Bernoulli."""
    probabilities = {"a": F(1, 3), "b": F(3, 4), "c": HALF}
    expected = solve_total_order(IndependentModel(probabilities), ("a", "b", "c")).value
    values = ValueModel.from_pairs([(x, probabilities[x]) for x in ("a", "b", "c")])
    assert solve_value_order(run_reduction(values).model) == expected
