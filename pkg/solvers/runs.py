"""
Juego OSR sobre un orden total con valores esperados generales - eliminación de rachas
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from poset_core.errors import ValidationError
from prob_model.models import ValueModel

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedValues:
    """Juego reducido, segmentos originales de cada ubicación reducida y ubicaciones descartadas."""
    model: ValueModel
    segments: Tuple[Tuple[str, ...], ...]
    dropped: Tuple[str, ...]


def value_matrix(values: ValueModel) -> List[List[Fraction]]:
    """A[i][j] = e_i···e_j para j ≥ i (fila: inicio de la búsqueda consecutiva), 0 si j < i."""
    e = values.expected
    n = len(e)
    matrix = []
    for i in range(n):
        row = [Fraction(0)] * n
        product = Fraction(1)
        for j in range(i, n):
            product *= e[j]
            row[j] = product
        matrix.append(row)
    return matrix


def _product(values: List[Fraction]) -> Fraction:
    result = Fraction(1)
    for v in values:
        result *= v
    return result


def run_reduction(values: ValueModel) -> ReducedValues:
    """
    Elimina rachas hasta que toda ubicación no final tenga valor esperado < 1.

    PASO 1: Tomar la primera ubicación no final i con e_i ≥ 1 y extender la racha hasta j
            mientras los productos acumulados e_i···e_t sigan siendo ≥ 1
    PASO 2: La fila i domina las filas i+1..j+1 (o hasta j si la racha llega al final)
    PASO 3: Las columnas i..j+1 son múltiplos de la columna i por f_c = e_{i+1}···e_c;
            sobrevive la de menor múltiplo k (empate: el menor índice)
    PASO 4: Fusionar i..k en una ubicación con valor e_i···e_k; si la racha llegó al final,
            las ubicaciones posteriores a k se descartan
    """
    if not values.locations:
        raise ValidationError("Juego de valores sin ubicaciones")
    segments: List[Tuple[str, ...]] = [(x,) for x in values.locations]
    expected: List[Fraction] = list(values.expected)
    dropped: List[str] = []

    while True:
        n = len(expected)
        start = next((i for i in range(n - 1) if expected[i] >= 1), None)
        if start is None:
            break
        end = start
        product = expected[start]
        while end + 1 < n and product * expected[end + 1] >= 1:
            end += 1
            product *= expected[end]
        last = min(end + 1, n - 1)

        best, best_factor, factor = start, Fraction(1), Fraction(1)
        for c in range(start + 1, last + 1):
            factor *= expected[c]
            if factor < best_factor:
                best, best_factor = c, factor

        merged = tuple(x for segment in segments[start:best + 1] for x in segment)
        merged_value = _product(expected[start:best + 1])
        if end == n - 1:
            for segment in segments[best + 1:]:
                dropped.extend(segment)
            tail_segments, tail_values = [], []
        else:
            tail_segments, tail_values = segments[best + 1:], expected[best + 1:]
        _log.debug(f"[PLAN] Racha {segments[start][0]}..{segments[end][-1]} fusionada en {merged}")
        segments = segments[:start] + [merged] + tail_segments
        expected = expected[:start] + [merged_value] + tail_values

    reduced = ValueModel(tuple("+".join(segment) for segment in segments), tuple(expected))
    return ReducedValues(reduced, tuple(segments), tuple(dropped))


def solve_value_order(values: ValueModel) -> Fraction:
    """
    Valor de un juego de valores ya reducido (solo la última ubicación puede tener e ≥ 1).

    Con una sola ubicación el valor es e_1. Si la última ubicación tiene e ≥ 1 su columna
    está dominada y se descarta; el resto es el orden total de Bernoulli con valor 1/(1+O).
    """
    e = list(values.expected)
    if not e:
        raise ValidationError("Juego de valores sin ubicaciones")
    if any(v >= 1 for v in e[:-1]):
        raise ValidationError("El juego de valores no está reducido: aplica run_reduction primero")
    if len(e) == 1:
        return e[0]
    if e[-1] >= 1:
        e = e[:-1]
    if any(v == 0 for v in e):
        return Fraction(0)
    return 1 / (1 + sum(((1 - v) / v for v in e), Fraction(0)))
