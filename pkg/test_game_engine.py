"""
Pruebas del motor del juego: pagos, simplex exacto, oráculo, certificados y simulación
"""
from fractions import Fraction as F

import numpy as np
import pytest

from poset_core.errors import (
    ElementMismatch,
    EmptyMatrix,
    IllegalSearch,
    InvalidModel,
    UnboundedProgram,
    ValidationError,
)
from poset_core.generators import random_poset
from poset_core.poset import Variant, antichain, enumerate_searches
from game_engine.engine import (
    GameInstance,
    MixedStrategy,
    best_response_gap,
    certify,
    certify_within_guard,
    payoff,
    payoff_matrix,
    solve_matrix_game,
    solve_oracle,
)
from game_engine.simplex import solve_standard_lp
from game_engine.simulation import simulate
from prob_model.models import IndependentModel, random_joint

# (matriz, valor)
MATRIX_GAMES = [
    ([[1, 0], [0, 1]], F(1, 2)),
    ([[3, -1], [-2, 1]], F(1, 7)),
    ([[2, 2], [2, 2]], F(2)),
    ([[1, 2, 3]], F(1)),
]


@pytest.fixture
def chain2_game(chain2):
    poset, model = chain2
    return GameInstance(poset, model, Variant.OSR)


@pytest.fixture
def chain2_optimal():
    searcher = MixedStrategy.from_weights({("a", "b"): F(2), ("b",): F(1)})
    hider = MixedStrategy.from_weights({"a": F(1), "b": F(2)})
    return searcher, hider


# =========================
# Pagos
# =========================
def test_payoff_f1(f1_game):
    assert payoff(f1_game, ["a", "b", "c"], "a") == F(1, 10)
    assert payoff(f1_game, ["b", "a", "c"], "a") == F(1, 20)
    assert payoff(f1_game, ["b"], "a") == 0


def test_payoff_rejects_inadmissible_search(chain2_game):
    with pytest.raises(IllegalSearch):
        payoff(chain2_game, ["b", "a"], "a")


def test_game_instance_requires_same_elements(halves):
    with pytest.raises(ElementMismatch):
        GameInstance(antichain("ab"), halves, Variant.OSR)


def test_payoff_matrix_rows_are_maximal_searches(chain2_game):
    matrix = payoff_matrix(chain2_game)
    assert matrix.rows == (("a", "b"), ("b",))
    assert matrix.entries == ((F(1, 2), F(1, 4)), (F(0), F(1, 2)))


def test_payoff_is_monotone_along_searches():
    rng = np.random.Generator(np.random.PCG64(19))
    for _ in range(15):
        poset = random_poset(rng, int(rng.integers(1, 5)))
        model = random_joint(rng, poset.elements)
        for variant in (Variant.OSR, Variant.CSR):
            game = GameInstance(poset, model, variant)
            for search in enumerate_searches(poset, variant):
                found = [payoff(game, search, h) for h in search]
                assert all(later <= earlier for earlier, later in zip(found, found[1:]))
                prefix = search[:-1]
                for h in poset.elements:
                    assert payoff(game, search, h) >= payoff(game, prefix, h)
                    if h in prefix:
                        assert payoff(game, search, h) == payoff(game, prefix, h)


# =========================
# Simplex y juegos matriciales
# =========================
def test_standard_lp_optimum():
    result = solve_standard_lp([F(1), F(1)], [[F(1), F(0)], [F(0), F(1)], [F(1), F(1)]], [F(1), F(2), F(5, 2)])
    assert result.objective == F(5, 2)
    assert sum(result.primal) == F(5, 2)


def test_standard_lp_errors():
    with pytest.raises(UnboundedProgram):
        solve_standard_lp([F(1)], [[F(-1)]], [F(1)])
    with pytest.raises(ValidationError):
        solve_standard_lp([F(1)], [[F(1)]], [F(-1)])


@pytest.mark.parametrize("entries,value", MATRIX_GAMES)
def test_solve_matrix_game(entries, value):
    certificate = solve_matrix_game(entries)
    assert certificate.value == value
    assert sum(certificate.searcher.weights) == 1
    assert sum(certificate.hider.weights) == 1


def test_solve_matrix_game_empty():
    with pytest.raises(EmptyMatrix):
        solve_matrix_game([])


# =========================
# Oráculo y certificados
# =========================
def test_oracle_two_chain(chain2_game):
    certificate = solve_oracle(chain2_game)
    assert certificate.value == F(1, 3)
    assert certificate.searcher.as_dict() == {("a", "b"): F(2, 3), ("b",): F(1, 3)}
    assert certificate.hider.as_dict() == {"a": F(1, 3), "b": F(2, 3)}
    assert certificate.certified


def test_oracle_reference_values(f1_game, d_game):
    assert solve_oracle(f1_game).value == F(14, 177)
    assert solve_oracle(d_game).value == F(1, 4)


def test_certify_optimal_pair(chain2_game, chain2_optimal):
    searcher, hider = chain2_optimal
    certificate = certify(chain2_game, F(1, 3), searcher, hider, "prueba")
    assert certificate.gap == 0
    assert certificate.certified


def test_best_response_gap_of_suboptimal_pair(chain2_game):
    searcher = MixedStrategy.pure(("a", "b"))
    hider = MixedStrategy.pure("a")
    bounds = best_response_gap(chain2_game, searcher, hider)
    assert bounds.value_lower == F(1, 4)
    assert bounds.value_upper == F(1, 2)
    assert bounds.gap == F(1, 4)


def test_certify_within_guard_skips_large_games(chain2_game, chain2_optimal):
    searcher, hider = chain2_optimal
    certificate = certify_within_guard(chain2_game, F(1, 3), searcher, hider, "prueba", max_elements=1)
    assert certificate.gap is None
    assert not certificate.certified


def test_mixed_strategy_validation():
    with pytest.raises(ValidationError):
        MixedStrategy(("a", "b"), (F(1, 2), F(1, 3)))
    with pytest.raises(ValidationError):
        MixedStrategy(("a", "a"), (F(1, 2), F(1, 2)))
    with pytest.raises(ValidationError):
        MixedStrategy.from_weights({"a": F(0)})
    mix = MixedStrategy.from_weights({"b": F(3), "a": F(1), "c": F(0)})
    assert mix.support == ("a", "b")
    assert mix.weight("b") == F(3, 4)
    assert mix.weight("c") == 0


# =========================
# Simulación
# =========================
def test_simulation_matches_value(chain2_game, chain2_optimal):
    searcher, hider = chain2_optimal
    result = simulate(chain2_game, searcher, hider, rounds=20000, seed=7)
    assert result.rounds == 20000
    assert result.within(1 / 3)


def test_simulation_independent_of_workers(chain2_game, chain2_optimal):
    searcher, hider = chain2_optimal
    single = simulate(chain2_game, searcher, hider, rounds=5000, seed=3, block=1000, workers=1)
    pooled = simulate(chain2_game, searcher, hider, rounds=5000, seed=3, block=1000, workers=4)
    assert single.wins == pooled.wins


def test_simulation_rejects_invalid_input(chain2_game, chain2_optimal, make_joint):
    searcher, hider = chain2_optimal
    with pytest.raises(ValidationError):
        simulate(chain2_game, searcher, hider, rounds=0, seed=1)
    broken = GameInstance(antichain("ab"), make_joint({"a": F(1, 2), "b": F(1, 2), "a,b": F(3, 4)}), Variant.OSR)
    with pytest.raises(InvalidModel):
        simulate(broken, MixedStrategy.pure(("a", "b")), MixedStrategy.pure("a"), rounds=10, seed=1)


def test_simulation_certain_rescue():
    game = GameInstance(antichain("a"), IndependentModel({"a": F(1)}), Variant.OSR)
    result = simulate(game, MixedStrategy.pure(("a",)), MixedStrategy.pure("a"), rounds=100, seed=0)
    assert result.wins == 100
    assert result.std_error == 0
