"""
Juego OSR sobre un árbol pseudo-bayesiano

Recursión de valores por subárbol, monedas del buscador y del escondedor en cada nodo
y su expansión a estrategias mixtas explícitas.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from poset_core.errors import InternalInconsistency, WeightTooLarge
from poset_core.poset import MAX_ELEMENTS, SearchSequence, Variant, antichain
from game_engine.engine import (
    GameInstance,
    MixedStrategy,
    SolutionCertificate,
    certify_within_guard,
)
from prob_model.models import PseudoBayesTree, TreeNode

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreeGameNode:
    """Nodo anotado: valor V del subárbol, Pr del subárbol y odds de ambas monedas."""
    node: TreeNode
    value: Fraction
    pr: Fraction
    searcher_odds: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    hider_odds: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    children: Tuple["TreeGameNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class TreeGameSolution:
    certificate: SolutionCertificate
    root: TreeGameNode


def _coin(odds: Tuple[Fraction, Fraction]) -> Fraction:
    """Probabilidad del primer hijo; moneda justa si ambas odds son nulas."""
    left, right = odds
    if left + right == 0:
        return Fraction(1, 2)
    return left / (left + right)


def tree_game_recursion(tree: PseudoBayesTree, strict: bool = True) -> TreeGameNode:
    """
    Anota el árbol de abajo hacia arriba.

    Hoja: V = Pr = w.
    Nodo con hijos A, B: Pr = w·Pr(A)·Pr(B) y
    V = w(1 - Pr(A)Pr(B)) / ((1 - Pr(A))/V(A) + (1 - Pr(B))/V(B)), o V = w si el denominador es 0.
    Monedas: buscador 1/V(A) - Pr(B)/V(B) : 1/V(B) - Pr(A)/V(A);
    escondedor (1 - Pr(A))/V(A) : (1 - Pr(B))/V(B).
    """

    def walk(node: TreeNode) -> TreeGameNode:
        if node.is_leaf:
            return TreeGameNode(node, node.weight, node.weight)
        a, b = (walk(child) for child in node.children)
        w = node.weight
        pr = w * a.pr * b.pr
        hider_odds = ((1 - a.pr) / a.value, (1 - b.pr) / b.value)
        denominator = hider_odds[0] + hider_odds[1]
        value = w if denominator == 0 else w * (1 - a.pr * b.pr) / denominator
        searcher_odds = (1 / a.value - b.pr / b.value, 1 / b.value - a.pr / a.value)

        if min(searcher_odds + hider_odds) < 0 or value < pr:
            if strict:
                raise InternalInconsistency(
                    f"Odds negativas en el nodo {{{','.join(sorted(node.leaves))}}}: {searcher_odds}, {hider_odds}"
                )
            _log.warning(f"[ARBOL] ⚠️  Odds negativas en {{{','.join(sorted(node.leaves))}}}: se truncan a 0")
            searcher_odds = tuple(max(o, Fraction(0)) for o in searcher_odds)
            hider_odds = tuple(max(o, Fraction(0)) for o in hider_odds)
        return TreeGameNode(node, value, pr, searcher_odds, hider_odds, (a, b))

    return walk(tree.root)


def depth_first_mixture(node: TreeGameNode) -> Dict[SearchSequence, Fraction]:
    """Búsquedas en profundidad: en cada nodo la moneda elige qué subárbol agotar primero."""
    if node.is_leaf:
        return {(node.node.leaf,): Fraction(1)}
    first = _coin(node.searcher_odds)
    left, right = (depth_first_mixture(child) for child in node.children)
    mixture: Dict[SearchSequence, Fraction] = {}
    for sa, wa in left.items():
        for sb, wb in right.items():
            mixture[sa + sb] = mixture.get(sa + sb, Fraction(0)) + first * wa * wb
            mixture[sb + sa] = mixture.get(sb + sa, Fraction(0)) + (1 - first) * wa * wb
    return {seq: w for seq, w in mixture.items() if w}


def hider_mixture(node: TreeGameNode) -> Dict[str, Fraction]:
    if node.is_leaf:
        return {node.node.leaf: Fraction(1)}
    first = _coin(node.hider_odds)
    left, right = (hider_mixture(child) for child in node.children)
    mixture = {x: first * w for x, w in left.items()}
    mixture.update({x: (1 - first) * w for x, w in right.items()})
    return {x: w for x, w in mixture.items() if w}


def solve_tree_game(
    tree: PseudoBayesTree,
    max_elements: int = MAX_ELEMENTS,
    allow_large_weights: bool = False,
) -> TreeGameSolution:
    """
    Resuelve el juego OSR sobre ubicaciones no ordenadas con distribución en árbol.

    PASO 1: Verificar que los pesos fuera de la raíz sean ≤ 1 (la raíz no tiene restricción)
    PASO 2: Recursión de valores y monedas
    PASO 3: Expandir ambas monedas a estrategias mixtas
    PASO 4: Certificar contra todas las búsquedas del juego completo
    """
    large = [w for w in tree.non_root_weights() if w > 1]
    if large and not allow_large_weights:
        raise WeightTooLarge(
            f"Pesos > 1 fuera de la raíz ({', '.join(str(w) for w in large)}): la recursión no está garantizada"
        )

    root = tree_game_recursion(tree, strict=not large)
    searcher = MixedStrategy.from_weights(depth_first_mixture(root))
    hider = MixedStrategy.from_weights(hider_mixture(root))
    game = GameInstance(antichain(tree.elements), tree, Variant.OSR)
    method = "tree-recursion" if not large else "tree-recursion-uncertified"
    certificate = certify_within_guard(game, root.value, searcher, hider, method, max_elements=max_elements)
    _log.info(f"[ARBOL] Valor {root.value} (brecha {certificate.gap})")
    return TreeGameSolution(certificate, root)


def independent_caterpillar(probabilities: Dict[str, Fraction]) -> PseudoBayesTree:
    """Árbol x1 ‖ (x2 ‖ (... ‖ xn)) con pesos internos 1 y hojas Pr(x)."""
    items = sorted(probabilities)
    node = TreeNode(probabilities[items[-1]], leaf=items[-1])
    for x in reversed(items[:-1]):
        node = TreeNode(Fraction(1), children=(TreeNode(probabilities[x], leaf=x), node))
    return PseudoBayesTree(node)
