"""
Poset - orden parcial finito sobre ubicaciones y generador de búsquedas
"""
import logging
import os
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Sequence, Tuple

import networkx as nx
from dotenv import load_dotenv

from poset_core.errors import (
    CycleError,
    DuplicateElement,
    ElementMismatch,
    EmptyStage,
    SizeLimit,
    UnknownElement,
    ValidationError,
)

load_dotenv()

_log = logging.getLogger(__name__)

MAX_ELEMENTS = int(os.getenv("POSET_RESCUE_MAX_ELEMENTS", "10"))

# Secuencia de búsqueda: ubicaciones distintas en el orden en que se revisan
SearchSequence = Tuple[str, ...]


class Variant(str, Enum):
    """Variante del juego: búsquedas que reflejan el orden (OSR) o cadenas (CSR)."""
    OSR = "osr"
    CSR = "csr"


class SearchClass(str, Enum):
    CHAIN = "Chain"
    ORDER_REFLECTING = "OrderReflecting"
    INVALID = "Invalid"


class MaximalAntichain(NamedTuple):
    antichain: FrozenSet[str]
    downset: FrozenSet[str]


@dataclass(frozen=True)
class Poset:
    """
    Orden parcial inmutable.

    elements: identificadores ordenados lexicográficamente
    covers: relación de cobertura (diagrama de Hasse)
    less: relación estricta x<y, clausura transitiva de covers
    """
    elements: Tuple[str, ...]
    covers: FrozenSet[Tuple[str, str]]
    less: FrozenSet[Tuple[str, str]]

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self._index

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {x: i for i, x in enumerate(self.elements)}

    @cached_property
    def _down(self) -> Dict[str, FrozenSet[str]]:
        down: Dict[str, set] = {x: set() for x in self.elements}
        for x, y in self.less:
            down[y].add(x)
        return {x: frozenset(s) for x, s in down.items()}

    @cached_property
    def _up(self) -> Dict[str, FrozenSet[str]]:
        up: Dict[str, set] = {x: set() for x in self.elements}
        for x, y in self.less:
            up[x].add(y)
        return {x: frozenset(s) for x, s in up.items()}

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.elements)
        g.add_edges_from(sorted(self.covers))
        return g

    def lt(self, x: str, y: str) -> bool:
        return (x, y) in self.less

    def le(self, x: str, y: str) -> bool:
        return x == y or (x, y) in self.less

    def comparable(self, x: str, y: str) -> bool:
        return self.le(x, y) or self.le(y, x)

    def below(self, x: str) -> FrozenSet[str]:
        """Elementos estrictamente por debajo de x."""
        return self._down[x]

    def above(self, x: str) -> FrozenSet[str]:
        return self._up[x]

    @property
    def is_antichain(self) -> bool:
        return not self.less

    @property
    def is_total_order(self) -> bool:
        n = len(self.elements)
        return len(self.less) == n * (n - 1) // 2

    def hasse_edges(self) -> List[Tuple[str, str]]:
        return sorted(self.covers)


def _check_guard(what: str, size: int, limit: int) -> None:
    if size > limit:
        raise SizeLimit(what, size, limit)


def _from_relation(elements: Iterable[str], pairs: Iterable[Tuple[str, str]], warn: bool) -> Poset:
    names = list(elements)
    known = set()
    for x in names:
        if x in known:
            raise DuplicateElement(f"Elemento repetido: '{x}'")
        known.add(x)

    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(names))
    for pair in pairs:
        try:
            x, y = pair
        except (TypeError, ValueError):
            raise ValidationError(f"Cobertura inválida {pair!r}: se esperaba un par (x, y)")
        for z in (x, y):
            if z not in known:
                raise UnknownElement(f"Elemento desconocido en coberturas: '{z}'")
        if x == y:
            raise CycleError(f"Relación reflexiva {x}<{x}: no es un orden parcial")
        graph.add_edge(x, y)

    if not nx.is_directed_acyclic_graph(graph):
        cycle = " -> ".join(u for u, _ in nx.find_cycle(graph))
        raise CycleError(f"La relación tiene un ciclo ({cycle}): no es un orden parcial")

    reduced = nx.transitive_reduction(graph)
    if warn:
        for x, y in sorted(set(graph.edges) - set(reduced.edges)):
            _log.warning(f"[POSET] ⚠️  Cobertura redundante descartada: ({x}, {y})")
    closure = nx.transitive_closure_dag(graph)
    return Poset(
        elements=tuple(sorted(names)),
        covers=frozenset(reduced.edges),
        less=frozenset(closure.edges),
    )


def validate_poset(elements: Iterable[str], covers: Iterable[Sequence[str]]) -> Poset:
    """
    Construye un Poset validado.

    PASO 1: Rechazar elementos repetidos y coberturas con extremos desconocidos
    PASO 2: Rechazar ciclos (incluida x<x)
    PASO 3: Descartar coberturas implicadas por transitividad, con aviso
    PASO 4: Calcular la alcanzabilidad x<y
    """
    return _from_relation(elements, covers, warn=True)


def antichain(elements: Iterable[str]) -> Poset:
    return _from_relation(elements, (), warn=False)


def total_order(elements: Sequence[str]) -> Poset:
    """Orden total en el orden dado: elements[0] < elements[1] < ..."""
    items = list(elements)
    return _from_relation(items, zip(items, items[1:]), warn=False)


def ordinal_sum(stages: Sequence[Iterable[str]]) -> Poset:
    """Suma ordinal de etapas no ordenadas: toda etapa anterior queda por debajo de las siguientes."""
    blocks = [list(stage) for stage in stages]
    if not blocks:
        raise EmptyStage("La suma ordinal necesita al menos una etapa")
    for i, block in enumerate(blocks):
        if not block:
            raise EmptyStage(f"La etapa {i + 1} está vacía")
    pairs = [(x, y) for lower, upper in zip(blocks, blocks[1:]) for x in lower for y in upper]
    return _from_relation([x for block in blocks for x in block], pairs, warn=False)


def from_relation(elements: Iterable[str], pairs: Iterable[Tuple[str, str]]) -> Poset:
    """Poset a partir de una relación cualquiera (se clausura y reduce sin avisos)."""
    return _from_relation(elements, pairs, warn=False)


def _check_sequence(poset: Poset, seq: Sequence[str]) -> None:
    seen = set()
    for x in seq:
        if x not in poset:
            raise UnknownElement(f"Ubicación desconocida en la búsqueda: '{x}'")
        if x in seen:
            raise DuplicateElement(f"Ubicación repetida en la búsqueda: '{x}'")
        seen.add(x)


def classify_sequence(poset: Poset, seq: Sequence[str]) -> SearchClass:
    """Clase más fuerte aplicable: Chain, OrderReflecting o Invalid."""
    _check_sequence(poset, seq)
    if all(poset.lt(x, y) for x, y in zip(seq, seq[1:])):
        return SearchClass.CHAIN
    for i, x in enumerate(seq):
        for y in seq[i + 1:]:
            if poset.lt(y, x):
                return SearchClass.INVALID
    return SearchClass.ORDER_REFLECTING


def is_admissible(poset: Poset, seq: Sequence[str], variant: Variant) -> bool:
    kind = classify_sequence(poset, seq)
    if variant == Variant.CSR:
        return kind == SearchClass.CHAIN
    return kind != SearchClass.INVALID


def _may_append(poset: Poset, variant: Variant, prefix: SearchSequence, y: str) -> bool:
    if variant == Variant.CSR:
        return not prefix or poset.lt(prefix[-1], y)
    # OSR: y no puede estar por debajo de nada ya revisado
    return poset.above(y).isdisjoint(prefix)


def enumerate_searches(
    poset: Poset,
    variant: Variant,
    maximal_only: bool = False,
    max_elements: int = MAX_ELEMENTS,
) -> List[SearchSequence]:
    """
    Enumera las búsquedas admisibles de la variante, en orden lexicográfico.

    PASO 1: Verificar el límite de tamaño
    PASO 2: Extender prefijos en profundidad con los elementos que se pueden añadir al final
    PASO 3: Con maximal_only, conservar solo los prefijos sin extensión posible
    """
    _check_guard("Enumeración de búsquedas", len(poset), max_elements)
    variant = Variant(variant)
    found: List[SearchSequence] = []

    def extend(prefix: SearchSequence, used: FrozenSet[str]) -> None:
        options = [y for y in poset.elements if y not in used and _may_append(poset, variant, prefix, y)]
        if prefix and (not maximal_only or not options):
            found.append(prefix)
        for y in options:
            extend(prefix + (y,), used | {y})

    extend((), frozenset())
    _log.debug(f"[POSET] {len(found)} búsquedas {variant.value} (maximales={maximal_only})")
    return found


def maxima(poset: Poset) -> FrozenSet[str]:
    return frozenset(x for x in poset.elements if not poset.above(x))


def minima(poset: Poset) -> FrozenSet[str]:
    return frozenset(x for x in poset.elements if not poset.below(x))


def width_with_decomposition(poset: Poset) -> Tuple[int, List[Tuple[str, ...]]]:
    """
    Ancho de Dilworth y partición en el mínimo número de cadenas.

    Emparejamiento máximo en el grafo bipartito de comparabilidad: cada arista
    emparejada encadena x con un sucesor, y las cadenas restantes son n - |M|.
    """
    if not poset.elements:
        return 0, []
    bipartite = nx.Graph()
    left = [("L", x) for x in poset.elements]
    bipartite.add_nodes_from(left, bipartite=0)
    bipartite.add_nodes_from((("R", x) for x in poset.elements), bipartite=1)
    bipartite.add_edges_from((("L", x), ("R", y)) for x, y in sorted(poset.less))
    matching = nx.bipartite.hopcroft_karp_matching(bipartite, top_nodes=left)

    successor = {node[1]: partner[1] for node, partner in matching.items() if node[0] == "L"}
    has_predecessor = set(successor.values())
    chains = []
    for head in poset.elements:
        if head in has_predecessor:
            continue
        chain = [head]
        while chain[-1] in successor:
            chain.append(successor[chain[-1]])
        chains.append(tuple(chain))
    return len(chains), chains


def maximal_antichains(poset: Poset, max_elements: int = MAX_ELEMENTS) -> List[MaximalAntichain]:
    """Todas las anticadenas maximales con su ideal inferior A⁻, en orden lexicográfico."""
    _check_guard("Enumeración de anticadenas", len(poset), max_elements)
    items = poset.elements
    found: List[Tuple[str, ...]] = []

    def grow(i: int, chosen: Tuple[str, ...]) -> None:
        if i == len(items):
            if chosen and all(x in chosen or any(poset.comparable(x, a) for a in chosen) for x in items):
                found.append(chosen)
            return
        x = items[i]
        if not any(poset.comparable(x, a) for a in chosen):
            grow(i + 1, chosen + (x,))
        grow(i + 1, chosen)

    grow(0, ())
    result = []
    for members in sorted(found):
        down = frozenset(x for x in items if any(poset.le(x, a) for a in members))
        result.append(MaximalAntichain(frozenset(members), down))
    return result


def is_extension(coarse: Poset, fine: Poset) -> bool:
    if set(coarse.elements) != set(fine.elements):
        raise ElementMismatch("Los posets no comparten el mismo conjunto de elementos")
    return coarse.less <= fine.less


def linear_extension(poset: Poset) -> Tuple[str, ...]:
    """Extensión lineal lexicográficamente mínima."""
    return tuple(nx.lexicographical_topological_sort(poset.graph))
