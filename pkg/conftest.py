"""
Fixtures compartidas: instancias de referencia con valores conocidos
"""
from fractions import Fraction as F
from pathlib import Path

import pytest

from poset_core.poset import Variant, antichain, from_relation, total_order
from game_engine.engine import GameInstance
from prob_model.models import IndependentModel, JointModel, PseudoBayesTree, TreeNode

FIXTURES = Path(__file__).parent / "fixtures"

HALF = F(1, 2)


def joint(table):
    """Tabla conjunta a partir de claves "a,b" (la vacía vale 1)."""
    parsed = {frozenset(k.split(",")) if k else frozenset(): F(v) for k, v in table.items()}
    parsed.setdefault(frozenset(), F(1))
    return JointModel(parsed)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def f1_model():
    return joint({
        "a": F(1, 10), "b": F(3, 20), "c": F(1, 3),
        "a,b": F(1, 20), "a,c": F(1, 15), "b,c": F(1, 10),
        "a,b,c": F(1, 30),
    })


@pytest.fixture
def f1_tree():
    return PseudoBayesTree(TreeNode(HALF, children=(
        TreeNode(F(3, 5), children=(TreeNode(F(1, 3), leaf="a"), TreeNode(HALF, leaf="b"))),
        TreeNode(F(2, 3), leaf="c"),
    )))


@pytest.fixture
def f1_game(f1_model):
    return GameInstance(antichain("abc"), f1_model, Variant.OSR)


@pytest.fixture
def neg3_model():
    """Pr(a)=Pr(b)=1/2 con Pr(ab)=1/8 y c independiente con Pr(c)=1/4."""
    return joint({
        "a": HALF, "b": HALF, "c": F(1, 4),
        "a,b": F(1, 8), "a,c": F(1, 8), "b,c": F(1, 8),
        "a,b,c": F(1, 32),
    })


@pytest.fixture
def halves():
    return IndependentModel({"a": HALF, "b": HALF, "c": HALF})


@pytest.fixture
def d_poset():
    return from_relation("abc", [("a", "c"), ("b", "c")])


@pytest.fixture
def d_game(d_poset, halves):
    return GameInstance(d_poset, halves, Variant.OSR)


@pytest.fixture
def w_game():
    model = IndependentModel({"a": HALF, "m1": HALF, "m2": HALF})
    return GameInstance(from_relation(["a", "m1", "m2"], [("a", "m1")]), model, Variant.OSR)


@pytest.fixture
def star_poset():
    return from_relation(["*", "u1", "u2"], [("u1", "*"), ("u2", "*")])


@pytest.fixture
def star_model():
    def build(center: F) -> IndependentModel:
        return IndependentModel({"u1": HALF, "u2": HALF, "*": center})
    return build


@pytest.fixture
def make_joint():
    return joint


@pytest.fixture
def chain2():
    return total_order("ab"), IndependentModel({"a": HALF, "b": HALF})
