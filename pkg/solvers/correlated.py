"""
Soluciones con variables correlacionadas

Cotas por clase de correlación, cota del corolario para árboles, el 3-orden total con
factor de Bayes, la estrella CSR, la última ubicación independiente y el juego con búsquedas
de retroceso (backjumping).
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Dict, FrozenSet, List, Optional, Sequence

from poset_core.errors import (
    AssumptionViolated,
    GuardExceeded,
    NotIndependentCenter,
    PreconditionViolated,
    SizeLimit,
    ValidationError,
    WeightTooLarge,
    WeightTooSmall,
    WrongCorrelationClass,
    ZeroCondition,
)
from poset_core.poset import MAX_ELEMENTS, SearchSequence, Variant, from_relation, total_order
from game_engine.engine import (
    GameInstance,
    MixedStrategy,
    PayoffMatrix,
    SolutionCertificate,
    certify_within_guard,
    payoff,
    solve_matrix_game,
)
from prob_model.models import (
    AnyModel,
    Correlation,
    PseudoBayesTree,
    TreeNode,
    correlation_class,
    odds,
    odds_sum,
    subset_of_mask,
)
from prob_model.reduction import to_pseudo_bayes_tree
from solvers.uncorrelated import BoundsReport

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Osr3Solution:
    certificate: SolutionCertificate
    factor: Optional[Fraction]
    announced_support: FrozenSet[int]
    lp_support: FrozenSet[int]
    support_matches: bool


# =========================
# Cotas del corolario
# =========================
def corollary_upper_bound(tree: PseudoBayesTree) -> Fraction:
    """(1 - Pr(X))/O' con O' la suma de odds de los pesos de las hojas; todos los pesos ≤ 1."""
    large = [node.weight for node, _ in tree.iter_nodes() if node.weight > 1]
    if large:
        raise WeightTooLarge(f"La cota del corolario requiere pesos ≤ 1 (hay {', '.join(map(str, large))})")
    leaf_odds = sum(((1 - w) / w for w in tree.leaf_weights().values()), Fraction(0))
    if leaf_odds == 0:
        return Fraction(1)
    return (1 - tree.pr(tree.elements)) / leaf_odds


def corollary_marginal_bound(tree: PseudoBayesTree) -> Fraction:
    """Lectura con odds marginales: (1 - Pr(X))/O_X. No es una cota válida en general."""
    total = odds_sum(tree, tree.elements)
    if total == 0:
        return Fraction(1)
    return (1 - tree.pr(tree.elements)) / total


def tree_for(model: AnyModel) -> Optional[PseudoBayesTree]:
    if isinstance(model, PseudoBayesTree):
        return model
    try:
        return to_pseudo_bayes_tree(model)
    except (AssumptionViolated, GuardExceeded):
        return None


def correlated_bounds(game: GameInstance) -> BoundsReport:
    """
    OSR (correlación positiva o independencia): cota inferior 1/(1+O_X); la superior es la del
    corolario cuando el poset es una anticadena y el modelo admite un árbol con pesos ≤ 1.
    CSR (correlación negativa o independencia): [1/(|X|+O_X), 1/(1+O_X)].
    """
    kind = correlation_class(game.model)
    total = odds_sum(game.model, game.elements)
    if game.variant == Variant.OSR:
        if kind not in (Correlation.POSITIVE, Correlation.INDEPENDENT):
            raise WrongCorrelationClass(f"La cota OSR requiere correlación positiva (el modelo es {kind.value})")
        upper, upper_source = Fraction(1), "trivial"
        if game.poset.is_antichain:
            tree = tree_for(game.model)
            if tree is not None and all(node.weight <= 1 for node, _ in tree.iter_nodes()):
                upper, upper_source = corollary_upper_bound(tree), "tree-corollary"
        return BoundsReport(1 / (1 + total), upper, "positive-correlation", upper_source)

    if kind not in (Correlation.NEGATIVE, Correlation.INDEPENDENT):
        raise WrongCorrelationClass(f"La cota CSR requiere correlación negativa (el modelo es {kind.value})")
    return BoundsReport(
        1 / (len(game.elements) + total),
        1 / (1 + total),
        "negative-correlation",
        "negative-correlation",
    )


def marginal_bounds(game: GameInstance) -> BoundsReport:
    """
    Cotas válidas para cualquier modelo: [0, |X|/(|X|+O_X)].

    Con el escondedor ∝ 1/Pr(x), cada ubicación revisada aporta a lo sumo 1/Σ 1/Pr(y),
    porque el pago nunca supera la marginal de la ubicación del escondedor.
    """
    n = len(game.elements)
    return BoundsReport(Fraction(0), n / (n + odds_sum(game.model, game.elements)), "trivial", "marginal-hider")


# =========================
# Orden total de tres ubicaciones
# =========================
def bayes_factor_3(model: AnyModel, order: Sequence[str]) -> Optional[Fraction]:
    """Pr(a | no b, c) / Pr(a | b) para a < b < c; None si Pr(a, b) = 0 (factor infinito)."""
    a, b, c = order
    p = model.pr
    not_b_and_c = p({c}) - p({b, c})
    if not_b_and_c == 0:
        raise ZeroCondition(f"Pr(no {b}, {c}) = 0: condición imposible")
    if p({b}) == 0:
        raise ZeroCondition(f"Pr({b}) = 0: condición imposible")
    numerator = (p({a, c}) - p({a, b, c})) / not_b_and_c
    if p({a, b}) == 0:
        if numerator == 0:
            raise ZeroCondition(f"Pr({a} | no {b}, {c}) = Pr({a} | {b}) = 0: el factor no está definido")
        return None
    return numerator / (p({a, b}) / p({b}))


def solve_osr3_total(model: AnyModel, order: Optional[Sequence[str]] = None) -> Osr3Solution:
    """
    Juego OSR en a < b < c con filas (a,b,c), (a,c), (b,c), (c) numeradas 1..4.

    PASO 1: Calcular el factor de Bayes
    PASO 2: Anunciar soporte {2,3,4} si el factor > 1 (o infinito) y {1,3,4} en otro caso
    PASO 3: Resolver el LP exacto de la matriz 4x3 y comparar soportes
    """
    chain = tuple(order) if order is not None else model.elements
    if len(chain) != 3 or set(chain) != set(model.elements):
        raise ValidationError("El juego de tres ubicaciones requiere exactamente 3 elementos en orden")
    factor = bayes_factor_3(model, chain)
    announced = frozenset({2, 3, 4}) if factor is None or factor > 1 else frozenset({1, 3, 4})

    a, b, c = chain
    rows: List[SearchSequence] = [(a, b, c), (a, c), (b, c), (c,)]
    game = GameInstance(total_order(chain), model, Variant.OSR)
    entries = tuple(tuple(payoff(game, row, h) for h in chain) for row in rows)
    solved = solve_matrix_game(PayoffMatrix(tuple(rows), chain, entries), method="osr3-lp")
    lp_support = frozenset(i + 1 for i, row in enumerate(rows) if solved.searcher.weight(row) > 0)
    matches = lp_support == announced
    if not matches:
        shown = "∞" if factor is None else factor
        _log.warning(
            f"[PLAN] ⚠️  Soporte anunciado {sorted(announced)} distinto del LP {sorted(lp_support)} (factor {shown})"
        )
    return Osr3Solution(solved, factor, announced, lp_support, matches)


# =========================
# Estrella CSR
# =========================
def _star_poset(leaves: Sequence[str], center: str):
    return from_relation(list(leaves) + [center], [(u, center) for u in leaves])


def solve_csr_star(
    model: AnyModel,
    center: str,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    """
    Estrella U < * con * independiente de cada u.

    Pr(*) ≥ 1/|U|: valor 1/(O_U + |U|); búsquedas [u, *] y escondedor en U, ambos ∝ 1/Pr(u).
    Pr(*) < 1/|U|: valor 1/(O_X + 1); se añade la búsqueda [*] con peso 1/Pr(*) - |U| y el
    escondedor usa o_u en U y 1/Pr(*) en el centro.
    """
    if center not in model.elements:
        raise ValidationError(f"El centro '{center}' no es una ubicación del modelo")
    leaves = [x for x in model.elements if x != center]
    if not leaves:
        raise ValidationError("La estrella necesita al menos una hoja")
    s = model.pr({center})
    dependent = [u for u in leaves if model.pr({u, center}) != model.pr({u}) * s]
    if dependent:
        raise NotIndependentCenter(
            f"El centro '{center}' no es independiente de {', '.join(dependent)}"
        )

    n = len(leaves)
    inverse = {u: 1 / model.pr({u}) for u in leaves}
    searches = {(u, center): w for u, w in inverse.items()}
    if s >= Fraction(1, n):
        value = 1 / (odds_sum(model, leaves) + n)
        hiding = dict(inverse)
        method = "csr-star-leaves"
    else:
        value = 1 / (odds_sum(model, model.elements) + 1)
        searches[(center,)] = 1 / s - n
        hiding = {u: odds(model, u) for u in leaves}
        hiding[center] = 1 / s
        method = "csr-star-center"

    game = GameInstance(_star_poset(leaves, center), model, Variant.CSR)
    return certify_within_guard(
        game,
        value,
        MixedStrategy.from_weights(searches),
        MixedStrategy.from_weights(hiding),
        method,
        max_elements=max_elements,
    )


# =========================
# Última ubicación independiente
# =========================
def solve_osr_independent_last(
    model: AnyModel,
    order: Optional[Sequence[str]] = None,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    """
    Orden total 1 < ... < n con la última ubicación independiente del resto, correlación
    negativa y Pr(n) ≤ 1/(n-1): valor 1/(O_X + 1).

    El buscador usa las búsquedas [j, n] (∝ 1/Pr(j)) y [n] (∝ 1/Pr(n) - (n-1)); el escondedor
    pone o_j en j < n y 1/Pr(n) en n.
    """
    chain = tuple(order) if order is not None else model.elements
    if set(chain) != set(model.elements) or len(chain) != len(model.elements):
        raise ValidationError("El orden total debe contener exactamente las ubicaciones del modelo")
    last, rest = chain[-1], chain[:-1]
    p_last = model.pr({last})

    failures = []
    for mask in range(1, 1 << len(rest)):
        subset = subset_of_mask(rest, mask)
        if model.pr(subset | {last}) != model.pr(subset) * p_last:
            failures.append(f"'{last}' no es independiente del resto ({{{','.join(sorted(subset))}}})")
            break
    kind = correlation_class(model)
    if kind not in (Correlation.NEGATIVE, Correlation.INDEPENDENT):
        failures.append(f"la correlación es {kind.value}, se requiere Negative")
    if rest and p_last > Fraction(1, len(rest)):
        failures.append(f"Pr({last}) = {p_last} > 1/{len(rest)}")
    if failures:
        raise PreconditionViolated(failures)

    value = 1 / (odds_sum(model, chain) + 1)
    searches = {(j, last): 1 / model.pr({j}) for j in rest}
    searches[(last,)] = 1 / p_last - len(rest)
    hiding = {j: odds(model, j) for j in rest}
    hiding[last] = 1 / p_last
    game = GameInstance(total_order(chain), model, Variant.OSR)
    return certify_within_guard(
        game,
        value,
        MixedStrategy.from_weights(searches),
        MixedStrategy.from_weights(hiding),
        "independent-last",
        max_elements=max_elements,
    )


# =========================
# Búsquedas de retroceso
# =========================
def _child_of(node: TreeNode) -> Dict[str, int]:
    """Para cada hoja del nodo, el índice del hijo que la contiene."""
    return {leaf: i for i, child in enumerate(node.children) for leaf in child.leaves}


def is_backjumping(tree: PseudoBayesTree, seq: Sequence[str]) -> bool:
    """En cada nodo interno, las dos primeras hojas visitadas de su subárbol vienen de hijos distintos."""
    for node, _ in tree.iter_nodes():
        if node.is_leaf:
            continue
        side = _child_of(node)
        visited = [side[x] for x in seq if x in side]
        if len(visited) >= 2 and visited[0] == visited[1]:
            return False
    return True


def backjump_value(tree: PseudoBayesTree, max_elements: int = MAX_ELEMENTS) -> SolutionCertificate:
    """Valor exacto del juego OSR no ordenado con el buscador restringido a búsquedas de retroceso."""
    small = [w for w in tree.internal_weights() if w < 1]
    if small:
        raise WeightTooSmall(
            f"Los factores internos deben ser ≥ 1 (hay {', '.join(str(w) for w in small)})"
        )
    items = tree.elements
    if len(items) > max_elements:
        raise SizeLimit("Juego de retroceso", len(items), max_elements)
    game = GameInstance(from_relation(items, ()), tree, Variant.OSR)
    rows: List[SearchSequence] = [perm for perm in permutations(items) if is_backjumping(tree, perm)]
    entries = tuple(tuple(payoff(game, row, h) for h in items) for row in rows)
    return solve_matrix_game(PayoffMatrix(tuple(rows), items, entries), method="backjump-lp")
