"""
Simplex exacto sobre racionales (tableau con regla de Bland)

Resuelve max c·y sujeto a A y ≤ b, y ≥ 0, con b ≥ 0 (la base de holguras es factible).
Devuelve también la solución dual leída en la fila objetivo final.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from poset_core.errors import UnboundedProgram, ValidationError

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearProgramResult:
    objective: Fraction
    primal: List[Fraction]
    dual: List[Fraction]
    pivots: int


class _Tableau:
    """Filas [a_1..a_n, s_1..s_m | rhs] y fila objetivo de costes reducidos."""

    def __init__(self, c: Sequence[Fraction], A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
        self.m = len(A)
        self.n = len(c)
        width = self.n + self.m
        self.rows: List[List[Fraction]] = []
        for i, (row, rhs) in enumerate(zip(A, b)):
            slack = [Fraction(0)] * self.m
            slack[i] = Fraction(1)
            self.rows.append([Fraction(v) for v in row] + slack + [Fraction(rhs)])
        self.objective = [-Fraction(v) for v in c] + [Fraction(0)] * self.m + [Fraction(0)]
        self.basis = [self.n + i for i in range(self.m)]
        self.width = width

    def entering(self) -> int:
        # Bland: primer índice con coste reducido negativo
        for j in range(self.width):
            if self.objective[j] < 0:
                return j
        return -1

    def leaving(self, col: int) -> int:
        best = -1
        best_ratio = None
        for i, row in enumerate(self.rows):
            a = row[col]
            if a <= 0:
                continue
            ratio = row[-1] / a
            if (
                best_ratio is None
                or ratio < best_ratio
                or (ratio == best_ratio and self.basis[i] < self.basis[best])
            ):
                best, best_ratio = i, ratio
        return best

    def pivot(self, r: int, col: int) -> None:
        pivot_row = self.rows[r]
        factor = pivot_row[col]
        if factor != 1:
            pivot_row[:] = [v / factor for v in pivot_row]
        support = [j for j, v in enumerate(pivot_row) if v]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            k = row[col]
            if k:
                for j in support:
                    row[j] -= k * pivot_row[j]
        k = self.objective[col]
        if k:
            for j in support:
                self.objective[j] -= k * pivot_row[j]
        self.basis[r] = col


def solve_standard_lp(
    c: Sequence[Fraction],
    A: Sequence[Sequence[Fraction]],
    b: Sequence[Fraction],
) -> LinearProgramResult:
    """
    Maximiza c·y con A y ≤ b, y ≥ 0.

    PASO 1: Validar dimensiones y b ≥ 0
    PASO 2: Pivotear con la regla de Bland hasta que no haya costes reducidos negativos
    PASO 3: Leer la primal en las filas básicas y la dual en las columnas de holgura
    """
    if any(len(row) != len(c) for row in A) or len(A) != len(b):
        raise ValidationError("Programa lineal con dimensiones inconsistentes")
    if any(Fraction(v) < 0 for v in b):
        raise ValidationError("El programa lineal requiere términos independientes no negativos")

    tableau = _Tableau(c, A, b)
    pivots = 0
    while True:
        col = tableau.entering()
        if col < 0:
            break
        row = tableau.leaving(col)
        if row < 0:
            raise UnboundedProgram(f"Programa lineal no acotado (columna {col})")
        tableau.pivot(row, col)
        pivots += 1

    primal = [Fraction(0)] * tableau.n
    for i, var in enumerate(tableau.basis):
        if var < tableau.n:
            primal[var] = tableau.rows[i][-1]
    dual = [tableau.objective[tableau.n + i] for i in range(tableau.m)]
    _log.debug(f"[SIMPLEX] Óptimo {tableau.objective[-1]} tras {pivots} pivotes ({tableau.m}x{tableau.n})")
    return LinearProgramResult(tableau.objective[-1], primal, dual, pivots)
