"""
Simulación Monte Carlo de un par de estrategias mixtas

Cada ronda sortea un patrón de éxitos (masas de Möbius del modelo), una búsqueda y un
escondite; el buscador gana si todas las ubicaciones revisadas hasta el escondite tienen éxito.
Las rondas se reparten en bloques de tamaño fijo con semillas derivadas de la semilla maestra,
por lo que el resultado no depende del número de hilos.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from dotenv import load_dotenv

from poset_core.errors import IllegalSearch, InvalidModel, ValidationError
from poset_core.poset import is_admissible
from game_engine.engine import GameInstance, MixedStrategy
from prob_model.models import pattern_masses

load_dotenv()

_log = logging.getLogger(__name__)

SIM_BLOCK = int(os.getenv("POSET_RESCUE_SIM_BLOCK", "10000"))
SIM_WORKERS = int(os.getenv("POSET_RESCUE_SIM_WORKERS", "1"))


@dataclass(frozen=True)
class SimulationResult:
    estimate: float
    wins: int
    rounds: int
    std_error: float

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.estimate - target) <= sigmas * max(self.std_error, 1e-12)


def _pattern_distribution(game: GameInstance) -> np.ndarray:
    index = {x: i for i, x in enumerate(game.elements)}
    masses = np.zeros(1 << len(index), dtype=float)
    for subset, mass in pattern_masses(game.model).items():
        if mass < 0:
            raise InvalidModel(
                f"Masa de patrón negativa {mass} en {{{','.join(sorted(subset))}}}: el modelo no es una distribución"
            )
        masses[sum(1 << index[x] for x in subset)] = float(mass)
    return masses / masses.sum()


def _win_masks(game: GameInstance, searcher: MixedStrategy, hider: MixedStrategy) -> np.ndarray:
    """need[s, h]: máscara de éxitos necesaria para rescatar en h con la búsqueda s (-1 si no se revisa)."""
    index = {x: i for i, x in enumerate(game.elements)}
    need = np.full((len(searcher.support), len(hider.support)), -1, dtype=np.int64)
    for i, search in enumerate(searcher.support):
        seq = tuple(search)
        if not is_admissible(game.poset, seq, game.variant):
            raise IllegalSearch(f"La búsqueda [{', '.join(seq)}] no es admisible")
        prefix = 0
        reached = {}
        for x in seq:
            prefix |= 1 << index[x]
            reached[x] = prefix
        for j, h in enumerate(hider.support):
            if h in reached:
                need[i, j] = reached[h]
    return need


def _play_block(
    seed: np.random.SeedSequence,
    size: int,
    patterns: np.ndarray,
    searcher_p: np.ndarray,
    hider_p: np.ndarray,
    need: np.ndarray,
) -> int:
    rng = np.random.Generator(np.random.PCG64(seed))
    drawn = rng.choice(len(patterns), size=size, p=patterns)
    searches = rng.choice(len(searcher_p), size=size, p=searcher_p)
    hides = rng.choice(len(hider_p), size=size, p=hider_p)
    required = need[searches, hides]
    wins = (required >= 0) & ((drawn & required) == required)
    return int(wins.sum())


def simulate(
    game: GameInstance,
    searcher_mix: MixedStrategy,
    hider_mix: MixedStrategy,
    rounds: int,
    seed: int,
    block: int = SIM_BLOCK,
    workers: int = SIM_WORKERS,
) -> SimulationResult:
    """
    Estima la probabilidad de rescate del par de estrategias.

    PASO 1: Masas de patrón (error si alguna es negativa)
    PASO 2: Máscaras de prefijo por (búsqueda, escondite)
    PASO 3: Bloques de rondas con semillas SeedSequence(seed).spawn
    PASO 4: Frecuencia de victorias y error estándar
    """
    if rounds < 1:
        raise ValidationError("La simulación necesita al menos una ronda")
    if block < 1:
        raise ValidationError("El tamaño de bloque debe ser positivo")

    patterns = _pattern_distribution(game)
    need = _win_masks(game, searcher_mix, hider_mix)
    searcher_p = np.array([float(w) for w in searcher_mix.weights])
    hider_p = np.array([float(w) for w in hider_mix.weights])

    sizes: List[int] = [block] * (rounds // block)
    if rounds % block:
        sizes.append(rounds % block)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs: List[Tuple[np.random.SeedSequence, int]] = list(zip(seeds, sizes))

    def run(job: Tuple[np.random.SeedSequence, int]) -> int:
        return _play_block(job[0], job[1], patterns, searcher_p, hider_p, need)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            wins = sum(pool.map(run, jobs))
    else:
        wins = sum(run(job) for job in jobs)

    estimate = wins / rounds
    std_error = math.sqrt(estimate * (1 - estimate) / rounds)
    _log.info(f"[SIM] {wins}/{rounds} victorias: {estimate:.6f} ± {std_error:.6f} ({len(jobs)} bloques)")
    return SimulationResult(estimate, wins, rounds, std_error)
