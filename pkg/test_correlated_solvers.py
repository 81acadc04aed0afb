"""
Pruebas de las soluciones con variables correlacionadas y del barrido de retroceso
"""
from fractions import Fraction as F

import numpy as np
import pytest

from poset_core.errors import (
    NotIndependentCenter,
    PreconditionViolated,
    WeightTooLarge,
    WeightTooSmall,
    WrongCorrelationClass,
    ZeroCondition,
)
from poset_core.poset import Variant, antichain, total_order
from game_engine.engine import GameInstance, solve_oracle
from prob_model.models import PseudoBayesTree, TreeNode, validate_model
from solvers import conjecture
from solvers.conjecture import conjecture_scan, random_backjump_tree
from solvers.correlated import (
    backjump_value,
    bayes_factor_3,
    corollary_marginal_bound,
    corollary_upper_bound,
    correlated_bounds,
    is_backjumping,
    solve_csr_star,
    solve_osr3_total,
    solve_osr_independent_last,
    tree_for,
)

HALF = F(1, 2)

# (Pr del centro, valor, método)
STAR_CASES = [
    (F(1, 4), F(1, 6), "csr-star-center"),
    (HALF, F(1, 4), "csr-star-leaves"),
    (F(1), F(1, 4), "csr-star-leaves"),
]


@pytest.fixture
def symmetric_tree():
    """Raíz 1, factor interno 1 y hojas 1/2: modelo independiente de tres mitades."""
    return PseudoBayesTree(TreeNode(F(1), children=(
        TreeNode(F(1), children=(TreeNode(HALF, leaf="a"), TreeNode(HALF, leaf="b"))),
        TreeNode(HALF, leaf="c"),
    )))


# =========================
# Cotas
# =========================
def test_correlated_bounds_f1(f1_game, f1_tree):
    found = correlated_bounds(f1_game)
    assert found.lower == F(3, 53)
    assert found.upper == F(29, 105)
    assert found.upper_source == "tree-corollary"
    assert found.lower <= F(14, 177) <= found.upper
    assert corollary_upper_bound(f1_tree) == F(29, 105)
    assert corollary_marginal_bound(f1_tree) == F(29, 500)


def test_correlated_bounds_wrong_class(f1_model, neg3_model):
    with pytest.raises(WrongCorrelationClass):
        correlated_bounds(GameInstance(antichain("abc"), f1_model, Variant.CSR))
    with pytest.raises(WrongCorrelationClass):
        correlated_bounds(GameInstance(antichain("abc"), neg3_model, Variant.OSR))


def test_correlated_bounds_csr_negative(neg3_model):
    found = correlated_bounds(GameInstance(antichain("abc"), neg3_model, Variant.CSR))
    assert (found.lower, found.upper) == (F(1, 8), F(1, 6))
    value = solve_oracle(GameInstance(antichain("abc"), neg3_model, Variant.CSR)).value
    assert found.lower <= value <= found.upper


def test_corollary_requires_small_weights():
    tree = PseudoBayesTree(TreeNode(F(2), children=(TreeNode(F(1, 4), leaf="a"), TreeNode(F(1, 4), leaf="b"))))
    assert validate_model(tree).valid
    with pytest.raises(WeightTooLarge):
        corollary_upper_bound(tree)


def test_tree_for(f1_model, f1_tree, make_joint):
    assert tree_for(f1_tree) is f1_tree
    assert tree_for(f1_model).pr("abc") == F(1, 30)
    parity = make_joint({
        "a": HALF, "b": HALF, "c": HALF,
        "a,b": F(1, 4), "a,c": F(1, 4), "b,c": F(1, 4),
        "a,b,c": F(1, 4),
    })
    assert tree_for(parity) is None


# =========================
# Orden total de tres ubicaciones
# =========================
def test_osr3_f1(f1_model):
    solution = solve_osr3_total(f1_model, ("a", "b", "c"))
    assert solution.factor == F(3, 7)
    assert solution.certificate.value == F(3, 43)
    assert solution.lp_support == frozenset({1, 3, 4})
    assert solution.support_matches
    searcher = solution.certificate.searcher
    assert [searcher.weight(row) for row in [("a", "b", "c"), ("a", "c"), ("b", "c"), ("c",)]] == [
        F(30, 43), F(0), F(10, 43), F(3, 43),
    ]
    assert solution.certificate.hider.as_dict() == {"a": F(20, 43), "b": F(14, 43), "c": F(9, 43)}


def test_osr3_negative_correlation(neg3_model):
    solution = solve_osr3_total(neg3_model, ("a", "b", "c"))
    assert solution.factor == 3
    assert solution.certificate.value == F(1, 6)
    assert solution.announced_support == frozenset({2, 3, 4})
    assert solution.lp_support == frozenset({2, 3, 4})
    assert bayes_factor_3(neg3_model, ("a", "b", "c")) == 3


def test_osr3_with_exclusive_first_pair(make_joint):
    # a y b excluyentes: Pr(a | b) = 0 y el factor es infinito
    model = make_joint({
        "a": HALF, "b": HALF, "c": F(1, 4),
        "a,b": 0, "a,c": F(1, 8), "b,c": F(1, 8),
        "a,b,c": 0,
    })
    solution = solve_osr3_total(model, ("a", "b", "c"))
    assert solution.factor is None
    assert solution.announced_support == solution.lp_support == frozenset({2, 3, 4})
    assert solution.certificate.value == F(1, 6)
    assert solution.certificate.hider.as_dict() == {"a": F(1, 6), "b": F(1, 6), "c": F(2, 3)}


def test_osr3_factor_undefined(make_joint):
    model = make_joint({
        "a": F(1, 4), "b": F(1, 4), "c": F(1, 4),
        "a,b": 0, "a,c": 0, "b,c": 0,
        "a,b,c": 0,
    })
    with pytest.raises(ZeroCondition):
        bayes_factor_3(model, ("a", "b", "c"))


def test_osr3_matches_oracle(f1_model):
    game = GameInstance(total_order("abc"), f1_model, Variant.OSR)
    assert solve_osr3_total(f1_model, ("a", "b", "c")).certificate.value == solve_oracle(game).value


# =========================
# Estrella y última ubicación independiente
# =========================
@pytest.mark.parametrize("center,value,method", STAR_CASES)
def test_csr_star(star_model, center, value, method):
    certificate = solve_csr_star(star_model(center), "*")
    assert certificate.value == value
    assert certificate.method == method
    assert certificate.certified


def test_csr_star_requires_independent_center(make_joint):
    model = make_joint({
        "*": HALF, "u1": HALF, "u2": HALF,
        "*,u1": HALF, "*,u2": F(1, 4), "u1,u2": F(1, 4),
        "*,u1,u2": F(1, 4),
    })
    with pytest.raises(NotIndependentCenter):
        solve_csr_star(model, "*")


def test_independent_last(neg3_model):
    certificate = solve_osr_independent_last(neg3_model, ("a", "b", "c"))
    assert certificate.value == F(1, 6)
    assert certificate.method == "independent-last"
    assert certificate.certified


def test_independent_last_preconditions(f1_model):
    with pytest.raises(PreconditionViolated) as info:
        solve_osr_independent_last(f1_model, ("a", "b", "c"))
    assert any("Positive" in failure for failure in info.value.failures)


# =========================
# Retroceso
# =========================
def test_is_backjumping(symmetric_tree):
    assert is_backjumping(symmetric_tree, ("a", "c", "b"))
    assert not is_backjumping(symmetric_tree, ("a", "b", "c"))


def test_backjump_value(symmetric_tree):
    certificate = backjump_value(symmetric_tree)
    assert certificate.value == F(7, 24)
    game = GameInstance(antichain("abc"), symmetric_tree, Variant.OSR)
    assert certificate.value == solve_oracle(game).value


def test_backjump_requires_large_factors(f1_tree):
    with pytest.raises(WeightTooSmall):
        backjump_value(f1_tree)


@pytest.mark.parametrize("leaves", [3, 4, 5, 6])
def test_random_backjump_tree(leaves):
    for seed in range(20):
        rng = np.random.Generator(np.random.PCG64(seed))
        tree, attempts = random_backjump_tree(rng, leaves)
        assert len(tree.elements) == leaves
        assert 1 <= attempts <= conjecture.MAX_ATTEMPTS + 1
        assert all(w >= 1 for w in tree.internal_weights())
        assert validate_model(tree).valid


def test_random_backjump_tree_falls_back_to_unit_factors(monkeypatch):
    # raíz forzada a 4 sobre hojas de 1/4: todo intento es inválido
    monkeypatch.setattr(conjecture, "MAX_ATTEMPTS", 3)
    monkeypatch.setattr(conjecture, "LEAF_GRID", (F(1, 4),))
    monkeypatch.setattr(conjecture, "ROOT_SCALE", (F(1),))
    tree, attempts = random_backjump_tree(np.random.Generator(np.random.PCG64(0)), 2)
    assert attempts == 4
    assert tree.root.weight == 1
    assert validate_model(tree).valid


def test_conjecture_scan_with_five_leaves():
    report = conjecture_scan(seed=1, trials=10, min_leaves=5, max_leaves=5)
    assert len(report.trials) == 10
    assert all(t.leaves == 5 for t in report.trials)
    assert report.matches + len(report.mismatches) == 10


def test_conjecture_scan_is_deterministic():
    first = conjecture_scan(seed=5, trials=3)
    second = conjecture_scan(seed=5, trials=3)
    assert [(t.tree, t.backjump_value, t.oracle_value) for t in first.trials] == [
        (t.tree, t.backjump_value, t.oracle_value) for t in second.trials
    ]
    assert len(first.trials) == 3
    assert first.matches + len(first.mismatches) == 3
