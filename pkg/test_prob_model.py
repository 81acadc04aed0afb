"""
Pruebas de modelos de probabilidad, co-independencia y construcción de árboles
"""
from fractions import Fraction as F
from itertools import combinations

import numpy as np
import pytest

from poset_core.errors import DuplicateElement, NotReducible, ValidationError, ZeroCondition
from prob_model.models import (
    Correlation,
    IndependentModel,
    PseudoBayesTree,
    TreeNode,
    as_joint,
    conditional_pr,
    correlation_class,
    is_cond_independent,
    odds,
    odds_sum,
    pattern_masses,
    random_independent,
    random_joint,
    validate_model,
)
from prob_model.reduction import bayes_factor, completely_reduce, is_coindependent, to_pseudo_bayes_tree

F1_WEIGHTS = sorted([F(1, 2), F(3, 5), F(2, 3), F(1, 3), F(1, 2)])


def _all_subsets(items):
    return [frozenset(c) for k in range(len(items) + 1) for c in combinations(items, k)]


def test_f1_probabilities(f1_model):
    assert f1_model.pr({"a"}) == F(1, 10)
    assert f1_model.pr({"a", "b"}) == F(1, 20)
    assert f1_model.pr(set()) == 1
    assert conditional_pr(f1_model, {"a"}, {"b"}) == F(1, 3)
    assert odds(f1_model, "a") == 9
    assert odds_sum(f1_model, "abc") == F(50, 3)


def test_conditional_on_impossible_event():
    model = IndependentModel({"a": F(0), "b": F(1, 2)})
    with pytest.raises(ZeroCondition):
        conditional_pr(model, {"b"}, {"a"})


def test_validate_model(f1_model, make_joint):
    assert validate_model(f1_model).valid
    broken = make_joint({"a": F(1, 2), "b": F(1, 2), "a,b": F(3, 4)})
    report = validate_model(broken)
    assert not report.valid
    assert report.violations
    assert not validate_model(IndependentModel({"a": F(3, 2)})).valid


def test_pattern_masses_sum_to_one(f1_model, neg3_model):
    for model in (f1_model, neg3_model):
        masses = pattern_masses(model)
        assert sum(masses.values()) == 1
        assert all(m >= 0 for m in masses.values())


def test_correlation_classes(f1_model, neg3_model, halves, make_joint):
    assert correlation_class(f1_model) == Correlation.POSITIVE
    assert correlation_class(neg3_model) == Correlation.NEGATIVE
    assert correlation_class(halves) == Correlation.INDEPENDENT
    mixed = make_joint({
        "a": F(1, 2), "b": F(1, 2), "c": F(1, 2),
        "a,b": F(5, 16), "a,c": F(3, 16), "b,c": F(1, 4),
        "a,b,c": F(1, 8),
    })
    assert validate_model(mixed).valid
    assert correlation_class(mixed) == Correlation.NEITHER


def test_conditional_independence(f1_model, halves):
    assert not is_cond_independent(f1_model, "a", "b", "c")
    assert is_cond_independent(halves, "a", "b", "c")


def test_coindependence_and_bayes_factors(f1_model):
    assert is_coindependent(f1_model, {"a", "b"}, {"c"})
    assert not is_coindependent(f1_model, {"a"}, {"b", "c"})
    assert bayes_factor(f1_model, {"a", "b"}, {"c"}) == 2
    assert bayes_factor(f1_model, {"a"}, {"b"}) == F(10, 3)
    with pytest.raises(ValidationError):
        is_coindependent(f1_model, {"a"}, {"a", "b"})


def test_completely_reduce_f1(f1_model):
    root = completely_reduce(f1_model)
    assert root.describe() == "((a ‖ b) ‖ c)"


def test_not_reducible(make_joint):
    # pares independientes pero Pr(abc) = 1/4: ningún corte es co-independiente
    parity = make_joint({
        "a": F(1, 2), "b": F(1, 2), "c": F(1, 2),
        "a,b": F(1, 4), "a,c": F(1, 4), "b,c": F(1, 4),
        "a,b,c": F(1, 4),
    })
    assert validate_model(parity).valid
    with pytest.raises(NotReducible) as info:
        completely_reduce(parity)
    assert info.value.block == ("a", "b", "c")


def test_pseudo_bayes_tree_of_f1(f1_model):
    """Test 2: pesos {1/2, 3/5, 2/3, 1/3, 1/2} y las 8 probabilidades reproducidas."""
    tree = to_pseudo_bayes_tree(f1_model)
    weights = sorted(node.weight for node, _ in tree.iter_nodes())
    assert weights == F1_WEIGHTS
    for subset in _all_subsets("abc"):
        assert tree.pr(subset) == f1_model.pr(subset)


def test_tree_model_matches_f1(f1_model, f1_tree):
    assert as_joint(f1_tree).table == as_joint(f1_model).table
    assert f1_tree.leaf_weights() == {"a": F(1, 3), "b": F(1, 2), "c": F(2, 3)}
    assert f1_tree.internal_weights() == [F(3, 5)]
    assert validate_model(f1_tree).valid


def test_tree_node_shape_errors():
    with pytest.raises(ValidationError):
        TreeNode(F(1), children=(TreeNode(F(1, 2), leaf="a"),))
    with pytest.raises(DuplicateElement):
        PseudoBayesTree(TreeNode(F(1), children=(TreeNode(F(1, 2), leaf="a"), TreeNode(F(1, 2), leaf="a"))))


def test_random_joint_is_valid():
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(10):
        assert validate_model(random_joint(rng, "abcd")).valid


# =========================
# Propiedades de Pr en los tres tipos de modelo
# =========================
def _models(f1_tree):
    rng = np.random.Generator(np.random.PCG64(17))
    return [random_independent(rng, "abcd"), random_joint(rng, "abcd"), f1_tree]


def test_pr_is_monotone_and_follows_chain_rule(f1_tree):
    for model in _models(f1_tree):
        subsets = _all_subsets(model.elements)
        for s in subsets:
            for t in subsets:
                union = frozenset(s) | frozenset(t)
                assert model.pr(union) <= model.pr(s)
                if model.pr(t):
                    assert conditional_pr(model, s, t) * model.pr(t) == model.pr(union)


def test_bayes_factor_is_symmetric(f1_model):
    assert bayes_factor(f1_model, {"a"}, {"b"}) == bayes_factor(f1_model, {"b"}, {"a"})
    assert bayes_factor(f1_model, {"a", "b"}, {"c"}) == bayes_factor(f1_model, {"c"}, {"a", "b"})
