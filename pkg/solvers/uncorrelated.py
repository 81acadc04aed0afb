"""
Soluciones cerradas con variables de rescate independientes

Ubicaciones no ordenadas, órdenes totales, sumas ordinales de etapas, el conjunto de
máximos y las cotas generales de ambas variantes.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Optional, Sequence

from poset_core.errors import EmptyStage, ValidationError
from poset_core.poset import (
    MAX_ELEMENTS,
    Poset,
    SearchSequence,
    Variant,
    antichain,
    from_relation,
    linear_extension,
    maxima,
    ordinal_sum,
    total_order,
    width_with_decomposition,
)
from game_engine.engine import (
    GameInstance,
    MixedStrategy,
    SolutionCertificate,
    certify_within_guard,
)
from prob_model.models import IndependentModel
from solvers.flow import antichain_hider, csr_flow_strategy
from solvers.tree_game import depth_first_mixture, independent_caterpillar, tree_game_recursion

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundsReport:
    lower: Fraction
    upper: Fraction
    lower_source: str
    upper_source: str


@dataclass(frozen=True)
class MaximaSolution:
    value: Fraction
    certified: bool
    certificate: Optional[SolutionCertificate]


def _require_independent(model) -> IndependentModel:
    if not isinstance(model, IndependentModel):
        raise ValidationError("Esta solución cerrada requiere un modelo independiente")
    return model


def _odds_total(model: IndependentModel, elements) -> Fraction:
    return sum(((1 - model.probabilities[x]) / model.probabilities[x] for x in elements), Fraction(0))


def _product(model: IndependentModel, elements) -> Fraction:
    return model.pr(elements)


def _simple_search_value(model: IndependentModel, elements) -> Fraction:
    """(1 - Pr(S))/O_S, o 1 si O_S = 0."""
    odds = _odds_total(model, elements)
    if odds == 0:
        return Fraction(1)
    return (1 - _product(model, elements)) / odds


def _osr_unordered_mixtures(model: IndependentModel, elements) -> tuple:
    """Mezclas óptimas del juego OSR no ordenado restringido a elements."""
    items = sorted(elements)
    sub = model.restrict(items)
    odds = {x: (1 - sub.probabilities[x]) / sub.probabilities[x] for x in items}
    if not any(odds.values()):
        return {tuple(items): Fraction(1)}, {x: Fraction(1) for x in items}
    root = tree_game_recursion(independent_caterpillar(sub.probabilities))
    return depth_first_mixture(root), odds


# =========================
# Ubicaciones no ordenadas
# =========================
def solve_unordered(
    model: IndependentModel,
    variant: Variant,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    """
    CSR: valor 1/(|X|+O_X) y ambos jugadores proporcionales a 1/Pr(x).
    OSR: valor (1 - Pr(X))/O_X (1 si O_X = 0); escondedor proporcional a o_x y buscador
    con la mezcla en profundidad del árbol independiente x1 ‖ (x2 ‖ ...).
    """
    model = _require_independent(model)
    variant = Variant(variant)
    items = model.elements
    game = GameInstance(antichain(items), model, variant)

    if variant == Variant.CSR:
        inverse = {x: 1 / model.probabilities[x] for x in items}
        value = 1 / sum(inverse.values(), Fraction(0))
        searcher = MixedStrategy.from_weights({(x,): w for x, w in inverse.items()})
        hider = MixedStrategy.from_weights(inverse)
        return certify_within_guard(game, value, searcher, hider, "unordered-csr", max_elements=max_elements)

    value = _simple_search_value(model, items)
    searches, hiding = _osr_unordered_mixtures(model, items)
    searcher = MixedStrategy.from_weights(searches)
    hider = MixedStrategy.from_weights(hiding)
    return certify_within_guard(game, value, searcher, hider, "unordered-osr", max_elements=max_elements)


# =========================
# Orden total
# =========================
def solve_total_order(
    model: IndependentModel,
    order: Optional[Sequence[str]] = None,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    """
    Orden total x1 < ... < xn: valor 1/(1+O_X).

    Buscador: empieza en x1 con peso 1/p_1 o en xi (i > 1) con peso o_i y sigue en orden creciente.
    Escondedor: xi (i < n) con peso o_i y xn con peso 1/p_n.
    """
    model = _require_independent(model)
    chain = tuple(order) if order is not None else model.elements
    if set(chain) != set(model.elements) or len(chain) != len(model.elements):
        raise ValidationError("El orden total debe contener exactamente las ubicaciones del modelo")
    p = model.probabilities
    value = 1 / (1 + _odds_total(model, chain))

    starts = {chain: 1 / p[chain[0]]}
    starts.update({chain[i:]: (1 - p[x]) / p[x] for i, x in enumerate(chain) if i > 0})
    hiding = {x: (1 - p[x]) / p[x] for x in chain[:-1]}
    hiding[chain[-1]] = 1 / p[chain[-1]]

    game = GameInstance(total_order(chain), model, Variant.OSR)
    return certify_within_guard(
        game,
        value,
        MixedStrategy.from_weights(starts),
        MixedStrategy.from_weights(hiding),
        "total-order",
        max_elements=max_elements,
    )


# =========================
# Suma ordinal de etapas
# =========================
def _merge_stages(stages: Sequence[IndependentModel]) -> IndependentModel:
    merged: Dict[str, Fraction] = {}
    for i, stage in enumerate(stages):
        stage = _require_independent(stage)
        if not stage.probabilities:
            raise EmptyStage(f"La etapa {i + 1} está vacía")
        merged.update(stage.probabilities)
    return IndependentModel(merged)


def _best_stage(stages: Sequence[IndependentModel]) -> int:
    """k que maximiza |X_k| + O_{≤k} (empate: el menor k)."""
    best_k, best_score = 0, Fraction(-1)
    odds_so_far = Fraction(0)
    for k, stage in enumerate(stages):
        odds_so_far += _odds_total(stage, stage.elements)
        score = len(stage.elements) + odds_so_far
        if score > best_score:
            best_k, best_score = k, score
    return best_k


def solve_multistage(
    stages: Sequence[IndependentModel],
    variant: Variant,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    """
    Juego sobre la suma ordinal X_1 ⊕ ... ⊕ X_n de etapas no ordenadas.

    OSR: valor 1/(P_n·O_n/(1-P_n) + O_X) (el término vale 1 si P_n = 1). El buscador entra en la
    etapa j con peso 1/V_j - P_{j-1}/V_{j-1} (V_j: valor OSR no ordenado de la etapa) y
    recorre cada etapa con su mezcla óptima; el escondedor elige la etapa j < n con peso O_j,
    la última con O_n/(1-P_n) y dentro de la etapa proporcional a o_x.
    CSR: valor 1/(|X_k| + O_{≤k}) en el k que maximiza; buscador por flujo mínimo.
    """
    if not stages:
        raise EmptyStage("La suma ordinal necesita al menos una etapa")
    variant = Variant(variant)
    model = _merge_stages(stages)
    poset = ordinal_sum([stage.elements for stage in stages])
    game = GameInstance(poset, model, variant)

    if variant == Variant.CSR:
        k = _best_stage(stages)
        lower_part = {x for stage in stages[: k + 1] for x in stage.elements}
        score = len(stages[k].elements) + _odds_total(model, lower_part)
        value = 1 / score
        hider = antichain_hider(poset, model, frozenset(stages[k].elements))
        flow = csr_flow_strategy(poset, model, value, max_elements=max_elements)
        return certify_within_guard(game, value, flow.searcher, hider, "multistage-csr", max_elements=max_elements)

    entry: Dict[int, Fraction] = {}
    previous: Optional[tuple] = None
    for j, stage in enumerate(stages):
        v_j = _simple_search_value(stage, stage.elements)
        p_j = _product(stage, stage.elements)
        entry[j] = 1 / v_j if previous is None else 1 / v_j - previous[0] / previous[1]
        previous = (p_j, v_j)
    total = sum(entry.values(), Fraction(0))
    value = 1 / total

    stage_mixtures = [_osr_unordered_mixtures(stage, stage.elements) for stage in stages]
    searches: Dict[SearchSequence, Fraction] = {}
    for j, weight in entry.items():
        if not weight:
            continue
        for combo in product(*(stage_mixtures[i][0].items() for i in range(j, len(stages)))):
            seq = tuple(x for part, _ in combo for x in part)
            w = weight
            for _, part_weight in combo:
                w *= part_weight
            searches[seq] = searches.get(seq, Fraction(0)) + w

    hiding: Dict[str, Fraction] = {}
    for j, stage in enumerate(stages):
        odds_j = _odds_total(stage, stage.elements)
        if j < len(stages) - 1:
            stage_weight = odds_j
        else:
            p_n = _product(stage, stage.elements)
            stage_weight = Fraction(1) if p_n == 1 else odds_j / (1 - p_n)
        inner = stage_mixtures[j][1]
        inner_total = sum(inner.values(), Fraction(0))
        for x, w in inner.items():
            hiding[x] = hiding.get(x, Fraction(0)) + stage_weight * w / inner_total

    return certify_within_guard(
        game,
        value,
        MixedStrategy.from_weights(searches),
        MixedStrategy.from_weights(hiding),
        "multistage-osr",
        max_elements=max_elements,
    )


# =========================
# Conjunto de máximos
# =========================
def maxima_dominate(poset: Poset) -> bool:
    """Todo elemento no maximal está por debajo de todos los máximos."""
    tops = maxima(poset)
    return all(poset.lt(x, m) for x in poset.elements if x not in tops for m in tops)


def maxima_formula(poset: Poset, model: IndependentModel) -> Fraction:
    """
    1/(P_M·O_M/(1-P_M) + O_X).

    El término de M es P_M/V_M con V_M el valor OSR no ordenado de M; si P_M = 1 vale 1
    (no 0), igual que la última etapa de solve_multistage.
    """
    model = _require_independent(model)
    tops = maxima(poset)
    term = _product(model, tops) / _simple_search_value(model, tops)
    return 1 / (term + _odds_total(model, poset.elements))


def solve_osr_maxima(
    poset: Poset,
    model: IndependentModel,
    max_elements: int = MAX_ELEMENTS,
) -> MaximaSolution:
    """
    Valor por el conjunto de máximos M.

    Solo se certifica cuando todo no-máximo está por debajo de todo máximo: entonces el juego
    coincide con la suma ordinal (extensión lineal de X\\M) ⊕ M y sus estrategias se verifican
    contra el poset original. En otro caso se devuelve la fórmula sin certificar.
    """
    model = _require_independent(model)
    value = maxima_formula(poset, model)
    if not maxima_dominate(poset):
        _log.info(f"[PLAN] Fórmula de máximos {value} sin certificar: hay no-máximos fuera del ideal de algún máximo")
        return MaximaSolution(value, False, None)

    tops = maxima(poset)
    lower = from_relation(
        [x for x in poset.elements if x not in tops],
        [(x, y) for x, y in sorted(poset.less) if y not in tops],
    )
    stages = [model.restrict([x]) for x in linear_extension(lower)] + [model.restrict(sorted(tops))]
    staged = solve_multistage(stages, Variant.OSR, max_elements=max_elements)
    game = GameInstance(poset, model, Variant.OSR)
    certificate = certify_within_guard(
        game, value, staged.searcher, staged.hider, "osr-maxima", max_elements=max_elements
    )
    return MaximaSolution(value, certificate.gap == 0, certificate)


# =========================
# Cotas
# =========================
def bounds(poset: Poset, model: IndependentModel, variant: Variant) -> BoundsReport:
    """
    OSR: [1/(1+O_X), (1-Pr(X))/O_X].
    CSR: [1/(w+O_X), 1/(|M|+O_X)] con w el ancho de Dilworth.
    """
    model = _require_independent(model)
    variant = Variant(variant)
    odds = _odds_total(model, poset.elements)
    if variant == Variant.OSR:
        return BoundsReport(
            1 / (1 + odds),
            _simple_search_value(model, poset.elements),
            "extension-total-order",
            "unordered-osr",
        )
    width, _ = width_with_decomposition(poset)
    return BoundsReport(
        1 / (width + odds),
        1 / (len(maxima(poset)) + odds),
        "dilworth-width",
        "maxima-hider",
    )
