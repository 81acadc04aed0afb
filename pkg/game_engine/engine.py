"""
Motor del juego - pagos, matriz de pagos, oráculo exacto y certificación
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from poset_core.errors import ElementMismatch, EmptyMatrix, IllegalSearch, ValidationError
from poset_core.poset import (
    MAX_ELEMENTS,
    Poset,
    SearchSequence,
    Variant,
    enumerate_searches,
    is_admissible,
)
from game_engine.simplex import solve_standard_lp
from prob_model.models import AnyModel

_log = logging.getLogger(__name__)


# =========================
# Tipos del juego
# =========================
@dataclass(frozen=True)
class GameInstance:
    poset: Poset
    model: AnyModel
    variant: Variant

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if set(self.poset.elements) != set(self.model.elements):
            raise ElementMismatch(
                f"El modelo ({', '.join(self.model.elements)}) y el poset "
                f"({', '.join(self.poset.elements)}) no tienen las mismas ubicaciones"
            )

    @property
    def elements(self) -> Tuple[str, ...]:
        return self.poset.elements


@dataclass(frozen=True)
class MixedStrategy:
    """Mezcla sobre estrategias puras; los pesos suman exactamente 1."""
    support: Tuple[Hashable, ...]
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.weights):
            raise ValidationError("Estrategia mixta: soporte y pesos de distinta longitud")
        if len(set(self.support)) != len(self.support):
            raise ValidationError("Estrategia mixta con entradas repetidas en el soporte")
        if any(w < 0 for w in self.weights):
            raise ValidationError("Estrategia mixta con pesos negativos")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValidationError(f"Los pesos suman {sum(self.weights, Fraction(0))} en lugar de 1")

    @classmethod
    def from_weights(cls, weights: Mapping[Hashable, Fraction]) -> "MixedStrategy":
        """Normaliza pesos no negativos, descarta los nulos y ordena el soporte."""
        total = sum(weights.values(), Fraction(0))
        if total <= 0:
            raise ValidationError("Estrategia mixta sin masa positiva")
        items = sorted(((k, Fraction(w) / total) for k, w in weights.items() if w), key=lambda kv: _sort_key(kv[0]))
        return cls(tuple(k for k, _ in items), tuple(w for _, w in items))

    @classmethod
    def pure(cls, choice: Hashable) -> "MixedStrategy":
        return cls((choice,), (Fraction(1),))

    def items(self) -> List[Tuple[Hashable, Fraction]]:
        return list(zip(self.support, self.weights))

    def as_dict(self) -> Dict[Hashable, Fraction]:
        return dict(self.items())

    def weight(self, choice: Hashable) -> Fraction:
        return self.as_dict().get(choice, Fraction(0))


def _sort_key(choice: Hashable):
    if isinstance(choice, tuple):
        return (len(choice) == 0, choice)
    return (False, (choice,))


@dataclass(frozen=True)
class SolutionCertificate:
    value: Fraction
    searcher: MixedStrategy
    hider: MixedStrategy
    gap: Optional[Fraction]
    method: str

    @property
    def certified(self) -> bool:
        return self.gap == 0


@dataclass(frozen=True)
class PayoffMatrix:
    """Filas: búsquedas puras. Columnas: escondites."""
    rows: Tuple[Hashable, ...]
    columns: Tuple[Hashable, ...]
    entries: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[Fraction]]) -> "PayoffMatrix":
        width = len(entries[0]) if entries else 0
        return cls(
            tuple(range(len(entries))),
            tuple(range(width)),
            tuple(tuple(Fraction(v) for v in row) for row in entries),
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.columns)


class BestResponse(NamedTuple):
    value_lower: Fraction
    value_upper: Fraction
    gap: Fraction


# =========================
# Pagos
# =========================
def payoff(game: GameInstance, search: Sequence[str], h: str) -> Fraction:
    """Π(σ, h): probabilidad de que todas las búsquedas hasta h (incluida) tengan éxito."""
    seq = tuple(search)
    if not is_admissible(game.poset, seq, game.variant):
        raise IllegalSearch(
            f"La búsqueda [{', '.join(seq)}] no es admisible en el juego {game.variant.value.upper()}"
        )
    if h not in seq:
        return Fraction(0)
    k = seq.index(h)
    return game.model.pr(seq[: k + 1])


def _row_payoffs(game: GameInstance, search: SearchSequence, columns: Sequence[str]) -> Tuple[Fraction, ...]:
    # prefijos: Pr se evalúa una vez por posición
    by_element = {x: game.model.pr(search[: k + 1]) for k, x in enumerate(search)}
    return tuple(by_element.get(h, Fraction(0)) for h in columns)


def payoff_matrix(game: GameInstance, max_elements: int = MAX_ELEMENTS) -> PayoffMatrix:
    rows = enumerate_searches(game.poset, game.variant, maximal_only=True, max_elements=max_elements)
    columns = game.elements
    entries = tuple(_row_payoffs(game, row, columns) for row in rows)
    _log.debug(f"[ORACLE] Matriz de pagos {len(rows)}x{len(columns)} ({game.variant.value})")
    return PayoffMatrix(tuple(rows), columns, entries)


# =========================
# Juegos matriciales
# =========================
def solve_matrix_game(
    matrix: Union[PayoffMatrix, Sequence[Sequence[Fraction]]],
    method: str = "matrix-lp",
) -> SolutionCertificate:
    """
    Resuelve el juego de suma cero (filas maximizan, columnas minimizan) de forma exacta.

    PASO 1: Desplazar la matriz para que todas las entradas sean ≥ 1
    PASO 2: LP del escondedor: max Σy con M'y ≤ 1, y ≥ 0
    PASO 3: Valor = 1/z - desplazamiento; estrategias por normalización de primal y dual
    """
    if not isinstance(matrix, PayoffMatrix):
        if not matrix or not matrix[0]:
            raise EmptyMatrix("La matriz de pagos está vacía")
        matrix = PayoffMatrix.from_lists(matrix)
    m, n = matrix.shape
    if m == 0 or n == 0:
        raise EmptyMatrix("La matriz de pagos está vacía")
    if any(len(row) != n for row in matrix.entries):
        raise ValidationError("La matriz de pagos no es rectangular")

    shift = 1 - min(min(row) for row in matrix.entries)
    shifted = [[v + shift for v in row] for row in matrix.entries]
    result = solve_standard_lp([Fraction(1)] * n, shifted, [Fraction(1)] * m)
    z = result.objective

    hider = MixedStrategy.from_weights({col: y / z for col, y in zip(matrix.columns, result.primal)})
    searcher = MixedStrategy.from_weights({row: x / z for row, x in zip(matrix.rows, result.dual)})
    value = 1 / z - shift
    _log.debug(f"[ORACLE] Valor {value} ({m}x{n}, {result.pivots} pivotes)")
    return SolutionCertificate(value, searcher, hider, Fraction(0), method)


def solve_oracle(game: GameInstance, max_elements: int = MAX_ELEMENTS) -> SolutionCertificate:
    return solve_matrix_game(payoff_matrix(game, max_elements=max_elements), method="oracle")


# =========================
# Certificación
# =========================
def rescue_probabilities(game: GameInstance, searcher_mix: MixedStrategy) -> Dict[str, Fraction]:
    """Probabilidad de rescate de la mezcla del buscador contra cada escondite."""
    totals = {h: Fraction(0) for h in game.elements}
    for search, weight in searcher_mix.items():
        seq = tuple(search)
        if not is_admissible(game.poset, seq, game.variant):
            raise IllegalSearch(f"La búsqueda [{', '.join(seq)}] no es admisible")
        for h, value in zip(game.elements, _row_payoffs(game, seq, game.elements)):
            totals[h] += weight * value
    return totals


def best_response_gap(
    game: GameInstance,
    searcher_mix: MixedStrategy,
    hider_mix: MixedStrategy,
    max_elements: int = MAX_ELEMENTS,
) -> BestResponse:
    """
    Cotas que garantizan ambas mezclas.

    value_lower: mínimo sobre escondites del pago de la mezcla del buscador.
    value_upper: máximo sobre búsquedas maximales del pago contra la mezcla del escondedor.
    """
    lower = min(rescue_probabilities(game, searcher_mix).values())
    hider = hider_mix.as_dict()
    for h in hider:
        if h not in game.poset:
            raise ValidationError(f"El escondedor usa una ubicación desconocida: '{h}'")
    upper = Fraction(0)
    for search in enumerate_searches(game.poset, game.variant, maximal_only=True, max_elements=max_elements):
        row = _row_payoffs(game, search, game.elements)
        total = sum((hider.get(h, 0) * v for h, v in zip(game.elements, row)), Fraction(0))
        if total > upper:
            upper = total
    return BestResponse(lower, upper, upper - lower)


def certify(
    game: GameInstance,
    value: Fraction,
    searcher: MixedStrategy,
    hider: MixedStrategy,
    method: str,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    bounds = best_response_gap(game, searcher, hider, max_elements=max_elements)
    if bounds.gap != 0 or not bounds.value_lower <= value <= bounds.value_upper:
        _log.warning(
            f"[ORACLE] ⚠️  Certificado de '{method}' con brecha {bounds.gap}: "
            f"[{bounds.value_lower}, {bounds.value_upper}] frente a {value}"
        )
    return SolutionCertificate(Fraction(value), searcher, hider, bounds.gap, method)


def certify_within_guard(
    game: GameInstance,
    value: Fraction,
    searcher: MixedStrategy,
    hider: MixedStrategy,
    method: str,
    max_elements: int = MAX_ELEMENTS,
) -> SolutionCertificate:
    """Como certify, pero sin brecha (gap=None) cuando la enumeración supera el límite."""
    if len(game.elements) > max_elements:
        _log.info(f"[ORACLE] {len(game.elements)} ubicaciones: '{method}' se entrega sin certificar")
        return SolutionCertificate(Fraction(value), searcher, hider, None, method)
    return certify(game, value, searcher, hider, method, max_elements=max_elements)
