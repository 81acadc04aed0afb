"""
Modelos de probabilidad - Pr(S) exacto para modelos independientes, tablas conjuntas y árboles
"""
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
from dotenv import load_dotenv

from poset_core.errors import (
    DuplicateElement,
    SizeLimit,
    UnknownElement,
    ValidationError,
    ZeroCondition,
)

load_dotenv()

_log = logging.getLogger(__name__)

MAX_MODEL_ELEMENTS = int(os.getenv("POSET_RESCUE_MAX_MODEL_ELEMENTS", "8"))

Rational = Fraction
Subset = FrozenSet[str]


class ProbabilityModel(Protocol):
    kind: str

    @property
    def elements(self) -> Tuple[str, ...]: ...

    def pr(self, subset: Iterable[str]) -> Fraction: ...


def _as_subset(model: "ProbabilityModel", subset: Iterable[str]) -> Subset:
    chosen = frozenset(subset)
    known = set(model.elements)
    for x in chosen:
        if x not in known:
            raise UnknownElement(f"Ubicación desconocida para el modelo: '{x}'")
    return chosen


# =========================
# Modelo independiente
# =========================
@dataclass(frozen=True)
class IndependentModel:
    """Variables de rescate independientes con Pr(x) en (0, 1]."""
    probabilities: Dict[str, Fraction]
    kind: str = field(default="independent", init=False)

    @cached_property
    def elements(self) -> Tuple[str, ...]:
        return tuple(sorted(self.probabilities))

    def pr(self, subset: Iterable[str]) -> Fraction:
        result = Fraction(1)
        for x in _as_subset(self, subset):
            result *= self.probabilities[x]
        return result

    def restrict(self, elements: Iterable[str]) -> "IndependentModel":
        return IndependentModel({x: self.probabilities[x] for x in elements})


# =========================
# Tabla conjunta Pr(S) para los 2^n subconjuntos
# =========================
@dataclass(frozen=True)
class JointModel:
    """Probabilidad de éxito simultáneo Pr(S) para cada subconjunto S (clave frozenset)."""
    table: Dict[Subset, Fraction]
    kind: str = field(default="joint", init=False)

    @cached_property
    def elements(self) -> Tuple[str, ...]:
        names = set()
        for key in self.table:
            names |= key
        return tuple(sorted(names))

    def pr(self, subset: Iterable[str]) -> Fraction:
        chosen = _as_subset(self, subset)
        if not chosen:
            return self.table.get(frozenset(), Fraction(1))
        try:
            return self.table[chosen]
        except KeyError:
            raise ValidationError(f"Falta la entrada del subconjunto {{{','.join(sorted(chosen))}}}")


# =========================
# Árbol pseudo-bayesiano
# =========================
@dataclass(frozen=True)
class TreeNode:
    """Nodo con el peso de su arista entrante; hoja etiquetada o exactamente dos hijos."""
    weight: Fraction
    leaf: Optional[str] = None
    children: Tuple["TreeNode", ...] = ()

    def __post_init__(self):
        if self.leaf is None and len(self.children) != 2:
            raise ValidationError(
                f"Nodo interno con {len(self.children)} hijos: el árbol debe ser binario "
                f"(divide los nodos n-arios en pares anidados)"
            )
        if self.leaf is not None and self.children:
            raise ValidationError(f"La hoja '{self.leaf}' no puede tener hijos")

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    @property
    def leaves(self) -> Tuple[str, ...]:
        if self.is_leaf:
            return (self.leaf,)
        return self.children[0].leaves + self.children[1].leaves

    def as_dict(self) -> dict:
        """Forma de documento: {"weight": "p/q", "leaf": x} o {"weight": ..., "children": [...]}."""
        if self.is_leaf:
            return {"weight": str(self.weight), "leaf": self.leaf}
        return {"weight": str(self.weight), "children": [child.as_dict() for child in self.children]}


@dataclass(frozen=True)
class PseudoBayesTree:
    root: TreeNode
    kind: str = field(default="tree", init=False)

    def __post_init__(self):
        leaves = self.root.leaves
        if len(set(leaves)) != len(leaves):
            repeated = sorted({x for x in leaves if leaves.count(x) > 1})
            raise DuplicateElement(f"Hojas repetidas en el árbol: {', '.join(repeated)}")

    @cached_property
    def elements(self) -> Tuple[str, ...]:
        return tuple(sorted(self.root.leaves))

    def pr(self, subset: Iterable[str]) -> Fraction:
        """Producto de pesos del subárbol que cubre S, incluida la arista de la raíz."""
        chosen = _as_subset(self, subset)
        if not chosen:
            return Fraction(1)

        def span(node: TreeNode) -> Optional[Fraction]:
            if node.is_leaf:
                return node.weight if node.leaf in chosen else None
            parts = [p for p in (span(child) for child in node.children) if p is not None]
            if not parts:
                return None
            product = node.weight
            for p in parts:
                product *= p
            return product

        return span(self.root)

    def iter_nodes(self) -> Iterator[Tuple[TreeNode, bool]]:
        """(nodo, es_raíz) en preorden."""
        stack = [(self.root, True)]
        while stack:
            node, is_root = stack.pop()
            yield node, is_root
            stack.extend((child, False) for child in reversed(node.children))

    def internal_weights(self) -> List[Fraction]:
        """Pesos de los nodos internos que no son la raíz (factores bayesianos)."""
        return [n.weight for n, is_root in self.iter_nodes() if not is_root and not n.is_leaf]

    def leaf_weights(self) -> Dict[str, Fraction]:
        return {n.leaf: n.weight for n, _ in self.iter_nodes() if n.is_leaf}

    def non_root_weights(self) -> List[Fraction]:
        return [n.weight for n, is_root in self.iter_nodes() if not is_root]

    def path_products(self) -> Dict[str, Fraction]:
        products: Dict[str, Fraction] = {}

        def walk(node: TreeNode, acc: Fraction) -> None:
            acc = acc * node.weight
            if node.is_leaf:
                products[node.leaf] = acc
            for child in node.children:
                walk(child, acc)

        walk(self.root, Fraction(1))
        return products


AnyModel = Union[IndependentModel, JointModel, PseudoBayesTree]


# =========================
# Valores esperados generales (variables no negativas)
# =========================
@dataclass(frozen=True)
class ValueModel:
    """Valores esperados e_i de un orden total, en el orden de búsqueda."""
    locations: Tuple[str, ...]
    expected: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.locations) != len(self.expected):
            raise ValidationError("ValueModel: ubicaciones y valores de distinta longitud")
        if any(e < 0 for e in self.expected):
            raise ValidationError("ValueModel: los valores esperados deben ser no negativos")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[str, Fraction]]) -> "ValueModel":
        return cls(tuple(x for x, _ in pairs), tuple(Fraction(e) for _, e in pairs))

    def __len__(self) -> int:
        return len(self.locations)


# =========================
# Operaciones sobre cualquier modelo
# =========================
def pr(model: AnyModel, subset: Iterable[str]) -> Fraction:
    return model.pr(subset)


def marginal(model: AnyModel, x: str) -> Fraction:
    return model.pr({x})


def conditional_pr(model: AnyModel, subset: Iterable[str], given: Iterable[str]) -> Fraction:
    condition = frozenset(given)
    denominator = model.pr(condition)
    if denominator == 0:
        raise ZeroCondition(f"Pr({{{','.join(sorted(condition))}}}) = 0: condición imposible")
    return model.pr(frozenset(subset) | condition) / denominator


def odds(model: AnyModel, x: str) -> Fraction:
    """Odds de fallo o_x = (1 - Pr(x)) / Pr(x)."""
    p = marginal(model, x)
    return (1 - p) / p


def odds_sum(model: AnyModel, subset: Iterable[str]) -> Fraction:
    return sum((odds(model, x) for x in subset), Fraction(0))


def subset_of_mask(items: Sequence[str], mask: int) -> Subset:
    return frozenset(x for i, x in enumerate(items) if mask >> i & 1)


def pr_by_mask(model: AnyModel) -> List[Fraction]:
    items = model.elements
    return [model.pr(subset_of_mask(items, mask)) for mask in range(1 << len(items))]


def pattern_masses(model: AnyModel) -> Dict[Subset, Fraction]:
    """
    Masas de Möbius: probabilidad de que tengan éxito exactamente los de S.

    m(S) = suma sobre T ⊇ S de (-1)^|T\\S| Pr(T), por transformada de superconjuntos.
    """
    items = model.elements
    masses = pr_by_mask(model)
    for i in range(len(items)):
        bit = 1 << i
        for mask in range(1 << len(items)):
            if not mask & bit:
                masses[mask] -= masses[mask | bit]
    return {subset_of_mask(items, mask): m for mask, m in enumerate(masses)}


def as_joint(model: AnyModel) -> JointModel:
    items = model.elements
    return JointModel({subset_of_mask(items, mask): p for mask, p in enumerate(pr_by_mask(model))})


@dataclass
class ModelReport:
    valid: bool
    violations: List[str]


def _fmt_set(subset: Iterable[str]) -> str:
    return "{" + ",".join(sorted(subset)) + "}"


def validate_model(model: AnyModel) -> ModelReport:
    """
    Verifica que el modelo defina una distribución.

    PASO 1: Probabilidades marginales en (0, 1]
    PASO 2: Tabla conjunta: Pr(∅)=1, todas las entradas presentes y monotonía
    PASO 3: Árbol: pesos positivos y productos de camino ≤ 1
    PASO 4: Masas de Möbius no negativas (con testigo)
    """
    violations: List[str] = []

    if isinstance(model, IndependentModel):
        for x in model.elements:
            p = model.probabilities[x]
            if not 0 < p <= 1:
                violations.append(f"Pr({x}) = {p} fuera de (0, 1]")
        return ModelReport(not violations, violations)

    if isinstance(model, JointModel):
        items = model.elements
        expected = {subset_of_mask(items, mask) for mask in range(1 << len(items))}
        missing = sorted((_fmt_set(s) for s in expected - set(model.table) if s), key=lambda s: (len(s), s))
        for key in missing:
            violations.append(f"Falta la entrada {key}")
        if violations:
            return ModelReport(False, violations)
        if model.table.get(frozenset(), Fraction(1)) != 1:
            violations.append(f"Pr(∅) = {model.table[frozenset()]} ≠ 1")
        for x in items:
            p = model.pr({x})
            if p <= 0:
                violations.append(f"Pr({x}) = {p} debe ser positiva")
        for subset, p in sorted(model.table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            if not 0 <= p <= 1:
                violations.append(f"Pr({_fmt_set(subset)}) = {p} fuera de [0, 1]")
            for x in items:
                if x not in subset and model.pr(subset | {x}) > p:
                    violations.append(
                        f"No monótono: Pr({_fmt_set(subset | {x})}) > Pr({_fmt_set(subset)})"
                    )

    if isinstance(model, PseudoBayesTree):
        for node, _ in model.iter_nodes():
            if node.weight <= 0:
                label = node.leaf or _fmt_set(node.leaves)
                violations.append(f"Peso no positivo {node.weight} en {label}")
        for leaf, product in sorted(model.path_products().items()):
            if product > 1:
                violations.append(f"Producto de camino hasta {leaf} = {product} > 1")
        if violations:
            return ModelReport(False, violations)

    for subset, mass in sorted(pattern_masses(model).items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
        if mass < 0:
            violations.append(f"Masa negativa {mass} para el patrón de éxitos {_fmt_set(subset)}")
    return ModelReport(not violations, violations)


# =========================
# Correlación
# =========================
class Correlation(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEITHER = "Neither"
    INDEPENDENT = "Independent"


def correlation_class(model: AnyModel, max_elements: int = MAX_MODEL_ELEMENTS) -> Correlation:
    """Compara Pr(A|B) con Pr(A) sobre todos los pares disjuntos A, B no vacíos con Pr(B) > 0."""
    items = model.elements
    if len(items) > max_elements:
        raise SizeLimit("Clasificación de correlación", len(items), max_elements)
    values = pr_by_mask(model)
    full = (1 << len(items)) - 1
    positive = negative = True
    for a in range(1, full + 1):
        rest = full & ~a
        b = rest
        while b:
            if values[b] > 0:
                joint = values[a | b]
                product = values[a] * values[b]
                if joint < product:
                    positive = False
                elif joint > product:
                    negative = False
            b = (b - 1) & rest
        if not positive and not negative:
            break
    if positive and negative:
        return Correlation.INDEPENDENT
    if positive:
        return Correlation.POSITIVE
    if negative:
        return Correlation.NEGATIVE
    return Correlation.NEITHER


def is_cond_independent(model: AnyModel, x: str, y: str, given: str) -> bool:
    pz = model.pr({given})
    if pz == 0:
        raise ZeroCondition(f"Pr({given}) = 0: condición imposible")
    return model.pr({x, y, given}) * pz == model.pr({x, given}) * model.pr({y, given})


# =========================
# Instancias aleatorias para barridos
# =========================
def random_fraction(rng: np.random.Generator, denominators: Sequence[int] = (2, 3, 4, 5, 6)) -> Fraction:
    d = int(rng.choice(denominators))
    return Fraction(int(rng.integers(1, d + 1)), d)


def random_independent(rng: np.random.Generator, elements: Iterable[str]) -> IndependentModel:
    return IndependentModel({x: random_fraction(rng) for x in elements})


def random_joint(rng: np.random.Generator, elements: Iterable[str], zero_rate: float = 0.3) -> JointModel:
    """Tabla conjunta válida a partir de masas de patrón enteras aleatorias."""
    items = tuple(sorted(elements))
    full = (1 << len(items)) - 1
    weights = [0 if rng.random() < zero_rate else int(rng.integers(1, 6)) for _ in range(full + 1)]
    weights[full] = max(weights[full], 1)
    total = sum(weights)
    table = {}
    for mask in range(full + 1):
        table[subset_of_mask(items, mask)] = Fraction(
            sum(w for t, w in enumerate(weights) if t & mask == mask), total
        )
    return JointModel(table)
