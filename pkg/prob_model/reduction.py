"""
Co-independencia, reducibilidad completa y construcción del árbol pseudo-bayesiano
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from poset_core.errors import (
    InternalInconsistency,
    NotCoindependent,
    NotReducible,
    SizeLimit,
    ValidationError,
    ZeroCondition,
)
from prob_model.models import (
    MAX_MODEL_ELEMENTS,
    AnyModel,
    PseudoBayesTree,
    TreeNode,
    conditional_pr,
    pr_by_mask,
    subset_of_mask,
)

_log = logging.getLogger(__name__)


def _nonempty_subsets(items: Tuple[str, ...]) -> List[FrozenSet[str]]:
    return [frozenset(c) for k in range(1, len(items) + 1) for c in combinations(items, k)]


def is_coindependent(
    model: AnyModel,
    a_block: Iterable[str],
    b_block: Iterable[str],
    max_elements: int = MAX_MODEL_ELEMENTS,
) -> bool:
    """
    Verifica A‖B: cada elemento de B informa lo mismo sobre A y viceversa.

    Identidades (en forma de productos cruzados, definidas aunque algún Pr(B') sea 0):
    Pr(A'|B') = Pr(A'|b), Pr(B'|A') = Pr(B'|a),
    Pr(A'|a,b) = Pr(A'|a), Pr(B'|a,b) = Pr(B'|b)
    para todo A' ⊆ A, B' ⊆ B no vacíos, a ∈ A, b ∈ B.
    """
    a_items = tuple(sorted(set(a_block)))
    b_items = tuple(sorted(set(b_block)))
    if not a_items or not b_items:
        raise ValidationError("La co-independencia requiere bloques no vacíos")
    if set(a_items) & set(b_items):
        raise ValidationError("La co-independencia requiere bloques disjuntos")
    if len(a_items) + len(b_items) > max_elements:
        raise SizeLimit("Verificación de co-independencia", len(a_items) + len(b_items), max_elements)

    p = model.pr
    a_subsets = _nonempty_subsets(a_items)
    b_subsets = _nonempty_subsets(b_items)

    for a_sub in a_subsets:
        pa_sub = p(a_sub)
        for b_sub in b_subsets:
            joint = p(a_sub | b_sub)
            pb_sub = p(b_sub)
            for b in b_items:
                if joint * p({b}) != p(a_sub | {b}) * pb_sub:
                    return False
            for a in a_items:
                if joint * p({a}) != p(b_sub | {a}) * pa_sub:
                    return False

    for a in a_items:
        for b in b_items:
            pab = p({a, b})
            for a_sub in a_subsets:
                if p(a_sub | {a, b}) * p({a}) != p(a_sub | {a}) * pab:
                    return False
            for b_sub in b_subsets:
                if p(b_sub | {a, b}) * p({b}) != p(b_sub | {b}) * pab:
                    return False
    return True


def bayes_factor(model: AnyModel, a_block: Iterable[str], b_block: Iterable[str]) -> Fraction:
    """Factor común Pr(A'|B')/Pr(A') de dos bloques co-independientes."""
    a_items = tuple(sorted(set(a_block)))
    b_items = tuple(sorted(set(b_block)))
    if not is_coindependent(model, a_items, b_items):
        raise NotCoindependent(
            f"{{{','.join(a_items)}}} y {{{','.join(b_items)}}} no son co-independientes"
        )
    p = model.pr
    a, b = a_items[0], b_items[0]
    factor = p({a, b}) / (p({a}) * p({b}))

    # comprobación puntual con los bloques completos y los últimos elementos
    for a_sub, b_sub in ((frozenset(a_items), frozenset(b_items)), ({a_items[-1]}, {b_items[-1]})):
        denominator = p(a_sub) * p(b_sub)
        if denominator and p(set(a_sub) | set(b_sub)) / denominator != factor:
            raise InternalInconsistency("El factor de Bayes no es constante entre subconjuntos")
    return factor


@dataclass(frozen=True)
class ReductionNode:
    """Árbol de particiones binarias A_w = A_w0 ‖ A_w1."""
    block: FrozenSet[str]
    children: Tuple["ReductionNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def describe(self) -> str:
        if self.is_leaf:
            return next(iter(self.block))
        left, right = self.children
        return f"({left.describe()} ‖ {right.describe()})"


def completely_reduce(model: AnyModel, max_elements: int = MAX_MODEL_ELEMENTS) -> ReductionNode:
    """
    Descompone el conjunto de ubicaciones en bloques co-independientes anidados.

    PASO 1: Para cada bloque, probar biparticiones cuyo primer bloque contiene al menor elemento
    PASO 2: Orden de prueba lexicográfico del primer bloque (desempate determinista)
    PASO 3: Aceptar la primera bipartición co-independiente cuyos dos lados sean reducibles
    PASO 4: Memorizar el resultado por bloque
    """
    items = model.elements
    if len(items) > max_elements:
        raise SizeLimit("Reducción completa", len(items), max_elements)

    memo: Dict[FrozenSet[str], Optional[ReductionNode]] = {}
    irreducible: List[FrozenSet[str]] = []

    def split(block: FrozenSet[str]) -> Optional[ReductionNode]:
        if block in memo:
            return memo[block]
        if len(block) == 1:
            memo[block] = ReductionNode(block)
            return memo[block]
        ordered = sorted(block)
        first, rest = ordered[0], ordered[1:]
        candidates = sorted(
            (tuple([first, *c]) for k in range(len(rest)) for c in combinations(rest, k)),
        )
        found_split = False
        result = None
        for left_items in candidates:
            left = frozenset(left_items)
            right = block - left
            if not is_coindependent(model, left, right, max_elements=max_elements):
                continue
            found_split = True
            left_node, right_node = split(left), split(right)
            if left_node is not None and right_node is not None:
                result = ReductionNode(block, (left_node, right_node))
                break
        if not found_split:
            irreducible.append(block)
        memo[block] = result
        return result

    root = split(frozenset(items))
    if root is None:
        culprit = irreducible[0] if irreducible else frozenset(items)
        raise NotReducible(culprit)
    _log.info(f"[MODEL] Reducción completa: {root.describe()}")
    return root


def to_pseudo_bayes_tree(model: AnyModel, max_elements: int = MAX_MODEL_ELEMENTS) -> PseudoBayesTree:
    """
    Construye el árbol pseudo-bayesiano de un modelo completamente reducible.

    Raíz: Pr(a0)/Pr(a0|a1). Nodo interno A_w con hermano A_w̄:
    Pr(a_w0|a_w̄)/Pr(a_w0|a_w1). Hoja x con hermano A_w̄: Pr(x|a_w̄).
    Cada a_* es el menor elemento del bloque correspondiente.
    """
    reduction = completely_reduce(model, max_elements=max_elements)

    def rep(node: ReductionNode) -> str:
        return min(node.block)

    def build(node: ReductionNode, sibling: Optional[ReductionNode]) -> TreeNode:
        try:
            if node.is_leaf:
                x = rep(node)
                weight = conditional_pr(model, {x}, {rep(sibling)}) if sibling else model.pr({x})
                return TreeNode(weight, leaf=x)
            left, right = node.children
            c0, c1 = rep(left), rep(right)
            numerator = conditional_pr(model, {c0}, {rep(sibling)}) if sibling else model.pr({c0})
            weight = numerator / conditional_pr(model, {c0}, {c1})
        except (ZeroCondition, ZeroDivisionError):
            raise NotReducible(node.block)
        return TreeNode(weight, children=(build(left, right), build(right, left)))

    tree = PseudoBayesTree(build(reduction, None))

    items = model.elements
    source = pr_by_mask(model)
    for mask, expected in enumerate(source):
        subset = subset_of_mask(items, mask)
        if tree.pr(subset) != expected:
            raise InternalInconsistency(
                f"El árbol no reproduce Pr({{{','.join(sorted(subset))}}}): "
                f"{tree.pr(subset)} ≠ {expected}"
            )
    return tree
