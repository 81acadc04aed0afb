"""
Barrido experimental de la conjetura de retroceso

Genera árboles pseudo-bayesianos con factores internos ≥ 1 y compara el valor del juego
restringido a búsquedas de retroceso con el del oráculo. Nunca afirma la conjetura: solo
informa coincidencias y contraejemplos.
"""
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv
from tqdm import tqdm

from poset_core.errors import InternalInconsistency, ValidationError
from poset_core.poset import MAX_ELEMENTS, Variant, antichain
from game_engine.engine import GameInstance, solve_oracle
from prob_model.models import PseudoBayesTree, TreeNode, validate_model
from solvers.correlated import backjump_value

load_dotenv()

_log = logging.getLogger(__name__)

SHOW_PROGRESS = os.getenv("POSET_RESCUE_PROGRESS", "0") == "1"

LEAF_NAMES = "abcdefghij"
INTERNAL_GRID = (Fraction(1), Fraction(5, 4), Fraction(4, 3), Fraction(3, 2), Fraction(2))
LEAF_GRID = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))
ROOT_SCALE = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
MAX_ATTEMPTS = 50


@dataclass(frozen=True)
class TrialRecord:
    index: int
    leaves: int
    tree: Dict
    backjump_value: Fraction
    oracle_value: Fraction
    equal: bool
    attempts: int


@dataclass
class ScanReport:
    seed: int
    min_leaves: int
    max_leaves: int
    trials: List[TrialRecord] = field(default_factory=list)

    @property
    def matches(self) -> int:
        return sum(1 for t in self.trials if t.equal)

    @property
    def mismatches(self) -> List[TrialRecord]:
        return [t for t in self.trials if not t.equal]


def _pick(rng: np.random.Generator, grid: Sequence[Fraction]) -> Fraction:
    return grid[int(rng.integers(len(grid)))]


def _random_shape(rng: np.random.Generator, leaves: List[str], is_root: bool) -> TreeNode:
    if len(leaves) == 1:
        return TreeNode(_pick(rng, LEAF_GRID), leaf=leaves[0])
    cut = int(rng.integers(1, len(leaves)))
    left = _random_shape(rng, leaves[:cut], False)
    right = _random_shape(rng, leaves[cut:], False)
    weight = Fraction(1) if is_root else _pick(rng, INTERNAL_GRID)
    return TreeNode(weight, children=(left, right))


def _independence_boundary(shape: TreeNode, is_root: bool = True) -> TreeNode:
    """Misma forma y hojas con factores internos 1: todos los pesos quedan ≤ 1."""
    if shape.is_leaf:
        return shape
    children = tuple(_independence_boundary(child, False) for child in shape.children)
    return TreeNode(shape.weight if is_root else Fraction(1), children=children)


def _with_root(shape: TreeNode, weight: Fraction) -> PseudoBayesTree:
    return PseudoBayesTree(TreeNode(weight, shape.leaf, shape.children))


def random_backjump_tree(rng: np.random.Generator, leaves: int) -> Tuple[PseudoBayesTree, int]:
    """
    Árbol aleatorio válido con factores internos ≥ 1.

    PASO 1: Forma binaria aleatoria sobre hojas permutadas
    PASO 2: Pesos internos ≥ 1 y pesos de hoja ≤ 1 tomados de rejillas fijas
    PASO 3: Peso de la raíz para que todo producto de camino sea ≤ 1
    PASO 4: Rechazar si alguna masa de patrón es negativa
    PASO 5: Agotados los intentos, llevar el último árbol a factores internos 1 y raíz ≤ 1

    Devuelve el árbol y el número de intentos (MAX_ATTEMPTS + 1 si se usó el PASO 5).
    """
    if not 1 <= leaves <= len(LEAF_NAMES):
        raise ValidationError(f"Número de hojas fuera de rango: {leaves}")
    for attempt in range(1, MAX_ATTEMPTS + 1):
        names = [LEAF_NAMES[i] for i in rng.permutation(leaves)]
        shape = _random_shape(rng, names, True)
        scale = _pick(rng, ROOT_SCALE)
        paths = PseudoBayesTree(shape).path_products()
        tree = _with_root(shape, scale / max(paths.values()))
        if validate_model(tree).valid:
            return tree, attempt

    # con todos los pesos ≤ 1 cada arista es un Bernoulli independiente
    boundary = _independence_boundary(shape)
    paths = PseudoBayesTree(boundary).path_products()
    tree = _with_root(boundary, min(Fraction(1), scale / max(paths.values())))
    report = validate_model(tree)
    if not report.valid:
        raise InternalInconsistency(f"Árbol en la frontera de independencia inválido: {report.violations}")
    _log.info(f"[ARBOL] {MAX_ATTEMPTS} intentos rechazados: se usan factores internos 1 con {leaves} hojas")
    return tree, MAX_ATTEMPTS + 1


def conjecture_scan(
    seed: int,
    trials: int,
    min_leaves: int = 3,
    max_leaves: int = 4,
    max_elements: int = MAX_ELEMENTS,
    progress: bool = SHOW_PROGRESS,
) -> ScanReport:
    """Compara backjump_value con el oráculo en árboles aleatorios (semilla por ensayo)."""
    if trials < 0:
        raise ValidationError("El número de ensayos no puede ser negativo")
    if not 1 <= min_leaves <= max_leaves:
        raise ValidationError(f"Rango de hojas inválido: {min_leaves}..{max_leaves}")

    report = ScanReport(seed, min_leaves, max_leaves)
    seeds = np.random.SeedSequence(seed).spawn(trials) if trials else []
    for index, child in enumerate(tqdm(seeds, desc="Conjetura", disable=not progress)):
        rng = np.random.Generator(np.random.PCG64(child))
        leaves = int(rng.integers(min_leaves, max_leaves + 1))
        tree, attempts = random_backjump_tree(rng, leaves)
        restricted = backjump_value(tree, max_elements=max_elements).value
        game = GameInstance(antichain(tree.elements), tree, Variant.OSR)
        oracle = solve_oracle(game, max_elements=max_elements).value
        record = TrialRecord(index, leaves, tree.root.as_dict(), restricted, oracle, restricted == oracle, attempts)
        if not record.equal:
            _log.warning(f"[ARBOL] ⚠️  Ensayo {index}: retroceso {restricted} ≠ oráculo {oracle}")
        report.trials.append(record)

    _log.info(f"[ARBOL] Conjetura: {report.matches}/{trials} coincidencias")
    return report
