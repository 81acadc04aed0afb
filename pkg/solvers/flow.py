"""
Juego CSR con variables independientes - anticadena óptima, flujo del buscador y redondeo del dual
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple

from poset_core.errors import DegenerateHider, GuardExceeded, InfeasibleDual, InfeasibleFlow, ValidationError
from poset_core.poset import MAX_ELEMENTS, Poset, SearchSequence, maximal_antichains, minima
from game_engine.engine import MixedStrategy
from game_engine.simplex import solve_standard_lp
from prob_model.models import IndependentModel

_log = logging.getLogger(__name__)

SOURCE = "<s>"
SINK = "<t>"

Edge = Tuple[str, str]


class CsrHider(NamedTuple):
    value: Fraction
    hider: MixedStrategy
    antichain: FrozenSet[str]


@dataclass(frozen=True)
class FlowStrategy:
    """Flujos por arista (incluidas s y t), total que sale de s y la mezcla de cadenas derivada."""
    flows: Dict[Edge, Fraction]
    total: Fraction
    searcher: MixedStrategy


@dataclass(frozen=True)
class DualSolution:
    g: Dict[str, Fraction]
    h: Dict[str, Fraction]
    objective: Fraction


@dataclass(frozen=True)
class RoundingResult:
    antichain: FrozenSet[str]
    objective: Fraction
    maximal: bool
    threshold: Optional[Fraction]


def _require_independent(model) -> IndependentModel:
    if not isinstance(model, IndependentModel):
        raise ValidationError("El juego CSR por anticadenas requiere un modelo independiente")
    return model


def _odds(model: IndependentModel, x: str) -> Fraction:
    p = model.probabilities[x]
    return (1 - p) / p


def _downset(poset: Poset, antichain: FrozenSet[str]) -> FrozenSet[str]:
    return frozenset(x for x in poset.elements if any(poset.le(x, a) for a in antichain))


def antichain_objective(poset: Poset, model: IndependentModel, antichain: FrozenSet[str]) -> Fraction:
    """O_{A⁻} + |A|."""
    if not antichain:
        return Fraction(0)
    down = _downset(poset, antichain)
    return sum((_odds(model, x) for x in down), Fraction(0)) + len(antichain)


def antichain_hider(poset: Poset, model: IndependentModel, antichain: FrozenSet[str]) -> MixedStrategy:
    """Escondedor: x en A⁻\\A con peso o_x, a en A con peso 1/Pr(a)."""
    if not antichain:
        raise DegenerateHider("El escondedor necesita una anticadena no vacía")
    down = _downset(poset, antichain)
    weights = {x: _odds(model, x) for x in down - antichain}
    weights.update({a: 1 / model.probabilities[a] for a in antichain})
    return MixedStrategy.from_weights(weights)


# =========================
# Anticadena óptima
# =========================
def csr_value_and_hider(
    poset: Poset,
    model: IndependentModel,
    max_elements: int = MAX_ELEMENTS,
) -> CsrHider:
    """
    Valor 1/(O_{A⁻}+|A|) en la anticadena maximal que maximiza el objetivo.

    PASO 1: Enumerar anticadenas maximales (empate: la menor lexicográficamente)
    PASO 2: Si se supera el límite, resolver el dual y redondear
    PASO 3: Escondedor proporcional a o_x en A⁻\\A y a 1/Pr(a) en A
    """
    model = _require_independent(model)
    try:
        candidates = maximal_antichains(poset, max_elements=max_elements)
    except GuardExceeded:
        _log.info(f"[FLUJO] {len(poset)} ubicaciones: se usa el dual del flujo con redondeo")
        dual = csr_dual_solution(poset, model)
        rounded = dual_rounding(poset, model, dual.g, dual.h)
        best = rounded.antichain
        objective = rounded.objective
    else:
        best, objective = frozenset(), Fraction(-1)
        for candidate in candidates:
            score = antichain_objective(poset, model, candidate.antichain)
            if score > objective:
                best, objective = candidate.antichain, score

    _log.debug(f"[FLUJO] Anticadena óptima {{{','.join(sorted(best))}}} con objetivo {objective}")
    hider = antichain_hider(poset, model, best)
    return CsrHider(1 / objective, hider, best)


# =========================
# Flujo del buscador
# =========================
def _flow_edges(poset: Poset) -> List[Edge]:
    edges = [(SOURCE, x) for x in poset.elements]
    edges += sorted(poset.less)
    return edges


def _chain_mixture(
    poset: Poset,
    model: IndependentModel,
    flows: Dict[Edge, Fraction],
    inflow: Dict[str, Fraction],
    total: Fraction,
) -> Dict[SearchSequence, Fraction]:
    # Cadena de Markov: empieza en x con F_sx/W y desde x sigue a w con F_xw/(p_x·In_x)
    successors: Dict[str, List[Tuple[str, Fraction]]] = {x: [] for x in poset.elements}
    for (u, v), f in flows.items():
        if u != SOURCE and v != SINK and f:
            successors[u].append((v, f / (model.probabilities[u] * inflow[u])))
    mixture: Dict[SearchSequence, Fraction] = {}

    def walk(chain: SearchSequence, weight: Fraction) -> None:
        x = chain[-1]
        stay = weight
        for w, step in sorted(successors[x]):
            walk(chain + (w,), weight * step)
            stay -= weight * step
        if stay:
            mixture[chain] = mixture.get(chain, Fraction(0)) + stay

    for x in poset.elements:
        f = flows.get((SOURCE, x), Fraction(0))
        if f:
            walk((x,), f / total)
    return mixture


def csr_flow_strategy(
    poset: Poset,
    model: IndependentModel,
    value: Optional[Fraction] = None,
    max_elements: int = MAX_ELEMENTS,
) -> FlowStrategy:
    """
    Flujo mínimo desde s sobre el DAG de comparabilidad y su descomposición en cadenas.

    Restricciones por ubicación x: In_x ≥ 1/Pr(x) y Out_x ≤ Pr(x)·In_x.
    El total que sale de s debe ser 1/valor; la diferencia Pr(x)·In_x - Out_x va a t.
    """
    model = _require_independent(model)
    if value is None:
        value = csr_value_and_hider(poset, model, max_elements=max_elements).value
    items = poset.elements
    edges = _flow_edges(poset)
    position = {x: i for i, x in enumerate(items)}
    n = len(items)

    # Dual en forma estándar: variables a_x (entrada) y d_x (disipación)
    rows = []
    costs = []
    for u, v in edges:
        row = [Fraction(0)] * (2 * n)
        row[position[v]] += 1
        row[n + position[v]] += model.probabilities[v]
        if u != SOURCE:
            row[n + position[u]] -= 1
        rows.append(row)
        costs.append(Fraction(1) if u == SOURCE else Fraction(0))
    objective = [1 / model.probabilities[x] for x in items] + [Fraction(0)] * n
    result = solve_standard_lp(objective, rows, costs)

    flows = {edge: f for edge, f in zip(edges, result.dual) if f}
    total = result.objective
    if total != 1 / value:
        raise InfeasibleFlow(f"El flujo mínimo vale {total} y no coincide con 1/valor = {1 / value}")

    inflow = {x: Fraction(0) for x in items}
    outflow = {x: Fraction(0) for x in items}
    for (u, v), f in flows.items():
        inflow[v] += f
        if u != SOURCE:
            outflow[u] += f
    for x in items:
        p = model.probabilities[x]
        if inflow[x] < 1 / p or outflow[x] > p * inflow[x]:
            raise InfeasibleFlow(f"Restricciones de flujo violadas en '{x}'")
        sink = p * inflow[x] - outflow[x]
        if sink:
            flows[(x, SINK)] = sink

    mixture = _chain_mixture(poset, model, flows, inflow, total)
    _log.debug(f"[FLUJO] Flujo total {total} descompuesto en {len(mixture)} cadenas")
    return FlowStrategy(flows, total, MixedStrategy.from_weights(mixture))


# =========================
# Dual del flujo sobre el diagrama de Hasse y redondeo
# =========================
def csr_dual_solution(poset: Poset, model: IndependentModel) -> DualSolution:
    """
    Dual óptimo (g, h): max Σ g_x/Pr(x) + h_x·o_x con
    g_x + h_x ≤ 1 para x minimal y g_x + h_x - h_v ≤ 0 para cada cobertura v⋖x.
    """
    model = _require_independent(model)
    items = poset.elements
    n = len(items)
    position = {x: i for i, x in enumerate(items)}
    rows, bounds = [], []
    for x in sorted(minima(poset)):
        row = [Fraction(0)] * (2 * n)
        row[position[x]] = row[n + position[x]] = Fraction(1)
        rows.append(row)
        bounds.append(Fraction(1))
    for v, x in poset.hasse_edges():
        row = [Fraction(0)] * (2 * n)
        row[position[x]] = row[n + position[x]] = Fraction(1)
        row[n + position[v]] -= 1
        rows.append(row)
        bounds.append(Fraction(0))
    objective = [1 / model.probabilities[x] for x in items] + [_odds(model, x) for x in items]
    result = solve_standard_lp(objective, rows, bounds)
    g = {x: result.primal[position[x]] for x in items}
    h = {x: result.primal[n + position[x]] for x in items}
    return DualSolution(g, h, result.objective)


def _check_dual(poset: Poset, g: Dict[str, Fraction], h: Dict[str, Fraction]) -> None:
    for x in poset.elements:
        gx, hx = g.get(x, Fraction(0)), h.get(x, Fraction(0))
        if gx < 0 or hx < 0:
            raise InfeasibleDual(f"Dual negativo en '{x}'")
        if not poset.below(x) and gx + hx > 1:
            raise InfeasibleDual(f"g + h = {gx + hx} > 1 en el minimal '{x}'")
    for v, x in poset.hasse_edges():
        if g.get(x, 0) + h.get(x, 0) > h.get(v, 0):
            raise InfeasibleDual(f"g + h en '{x}' supera h en su cubierto '{v}'")


def _extend_to_maximal(poset: Poset, chosen: FrozenSet[str]) -> FrozenSet[str]:
    result = set(chosen)
    for x in poset.elements:
        if all(not poset.comparable(x, a) for a in result):
            result.add(x)
    return frozenset(result)


def dual_rounding(
    poset: Poset,
    model: IndependentModel,
    g: Dict[str, Fraction],
    h: Dict[str, Fraction],
) -> RoundingResult:
    """
    Redondeo desaleatorizado: prueba cada umbral T entre los valores h_x y g_x + h_x.

    A_T = {x : g_x + h_x ≥ T > h_x}. Se conserva la anticadena de mayor objetivo
    O_{A⁻} + |A|, extendida a maximal. Un dual nulo produce A vacía (objetivo 0, no maximal).
    """
    model = _require_independent(model)
    _check_dual(poset, g, h)
    thresholds = sorted(
        {t for x in poset.elements for t in (h.get(x, Fraction(0)), g.get(x, Fraction(0)) + h.get(x, Fraction(0))) if t > 0}
    )
    best: Optional[RoundingResult] = None
    for t in thresholds:
        chosen = frozenset(
            x for x in poset.elements if g.get(x, 0) + h.get(x, 0) >= t > h.get(x, 0)
        )
        if not chosen:
            continue
        antichain = _extend_to_maximal(poset, chosen)
        score = antichain_objective(poset, model, antichain)
        if best is None or score > best.objective:
            best = RoundingResult(antichain, score, True, t)
    if best is None:
        _log.warning("[FLUJO] ⚠️  El redondeo produjo una anticadena vacía")
        return RoundingResult(frozenset(), Fraction(0), False, None)
    return best
