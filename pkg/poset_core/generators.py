"""
Generadores de posets para barridos exhaustivos y pruebas aleatorias
"""
from itertools import permutations
from typing import FrozenSet, Iterator, List, Tuple

import numpy as np

from poset_core.poset import Poset, from_relation

Relation = FrozenSet[Tuple[int, int]]


def _labels(n: int) -> List[str]:
    return [f"x{i}" for i in range(n)]


def _downsets(k: int, relation: Relation) -> Iterator[FrozenSet[int]]:
    below = {j: {i for i, t in relation if t == j} for j in range(k)}
    for mask in range(1 << k):
        chosen = frozenset(i for i in range(k) if mask >> i & 1)
        if all(below[j] <= chosen for j in chosen):
            yield chosen


def _natural_relations(n: int) -> Iterator[Relation]:
    # Cada nuevo elemento k se coloca sobre un ideal inferior de los anteriores
    def build(k: int, relation: Relation) -> Iterator[Relation]:
        if k == n:
            yield relation
            return
        for down in _downsets(k, relation):
            yield from build(k + 1, relation | frozenset((d, k) for d in down))

    yield from build(0, frozenset())


def _canonical_key(n: int, relation: Relation) -> Tuple[Tuple[int, int], ...]:
    return min(
        tuple(sorted((perm[i], perm[j]) for i, j in relation))
        for perm in permutations(range(n))
    )


def iter_posets(n: int) -> Iterator[Poset]:
    """
    Todos los posets de n elementos salvo isomorfismo (etiquetas x0, x1, ...).

    PASO 1: Generar relaciones con etiquetado natural (cada elemento sobre un ideal)
    PASO 2: Descartar las isomorfas a una ya vista mediante una forma canónica
    """
    labels = _labels(n)
    seen = set()
    for relation in _natural_relations(n):
        key = _canonical_key(n, relation)
        if key in seen:
            continue
        seen.add(key)
        yield from_relation(labels, [(labels[i], labels[j]) for i, j in sorted(relation)])


def random_poset(rng: np.random.Generator, n: int, density: float = 0.4) -> Poset:
    """Poset aleatorio: orden natural con aristas al azar y nombres permutados."""
    labels = _labels(n)
    order = [labels[i] for i in rng.permutation(n)]
    pairs = [
        (order[i], order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    ]
    return from_relation(labels, pairs)


def random_extension(rng: np.random.Generator, poset: Poset, steps: int = 1) -> Poset:
    """Extensión aleatoria: añade pares comparables nuevos y vuelve a clausurar."""
    current = poset
    for _ in range(steps):
        free = [
            (x, y)
            for i, x in enumerate(current.elements)
            for y in current.elements[i + 1:]
            if not current.comparable(x, y)
        ]
        if not free:
            break
        x, y = free[int(rng.integers(len(free)))]
        if rng.random() < 0.5:
            x, y = y, x
        current = from_relation(current.elements, sorted(current.less | {(x, y)}))
    return current
