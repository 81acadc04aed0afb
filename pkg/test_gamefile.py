"""
Pruebas del formato de documentos de juego y del renderizado de reportes
"""
import json
from fractions import Fraction as F

import pytest

from poset_core.errors import DuplicateElement, ElementMismatch, ParseError, UnknownElement, ValidationError
from poset_core.poset import Variant
from prob_model.models import JointModel, PseudoBayesTree
from rescue_planner.gamefile import dump_game_file, parse_fraction, parse_game_document, parse_game_file
from rescue_planner.report import Report, StrategyEntry, render_report

HALF_MODEL = {"type": "independent", "pr": {"a": "1/2", "b": "1/2", "c": "1/2"}}


def _document(**overrides):
    data = {"elements": ["a", "b", "c"], "covers": [], "variant": "osr", "model": HALF_MODEL}
    data.update(overrides)
    return json.dumps(data)


def _read(fixtures_dir, name):
    return (fixtures_dir / name).read_text(encoding="utf-8")


# =========================
# Lectura
# =========================
def test_parse_fixtures(fixtures_dir, f1_model, d_poset):
    f1 = parse_game_file(_read(fixtures_dir, "F1.json"))
    assert isinstance(f1.model, JointModel)
    assert f1.model.table == f1_model.table
    assert f1.poset.is_antichain

    d = parse_game_file(_read(fixtures_dir, "D.json"))
    assert d.poset.less == d_poset.less
    assert d.variant == Variant.OSR

    tree = parse_game_file(_read(fixtures_dir, "F1_tree.json"))
    assert isinstance(tree.model, PseudoBayesTree)
    assert tree.model.pr("ab") == F(1, 20)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_game_document('{\n  "elements": [\n')
    assert info.value.line is not None
    assert "línea" in str(info.value)


def test_schema_errors():
    with pytest.raises(ValidationError):
        parse_game_document(_document(variant="both"))
    with pytest.raises(ValidationError):
        parse_game_document(_document(extra=True))
    with pytest.raises(ValidationError):
        parse_game_document(_document(model={"type": "markov", "pr": {}}))


@pytest.mark.parametrize("raw", ["0.5", "1/0", "-1/2", "mitad"])
def test_rejects_inexact_fractions(raw):
    with pytest.raises(ValidationError):
        parse_fraction(raw, "Pr(a)")


def test_parse_fraction_accepts_integers_and_spaces():
    assert parse_fraction(1, "Pr(a)") == 1
    assert parse_fraction(" 3 / 4 ", "Pr(a)") == F(3, 4)


def test_invalid_model_is_rejected():
    model = {"type": "independent", "pr": {"a": "3/2", "b": "1/2", "c": "1/2"}}
    with pytest.raises(ValidationError) as info:
        parse_game_document(_document(model=model))
    assert "Modelo inválido" in str(info.value)


def test_model_elements_must_match():
    model = {"type": "independent", "pr": {"a": "1/2", "b": "1/2"}}
    with pytest.raises(ElementMismatch):
        parse_game_document(_document(model=model))


def test_joint_model_lists_missing_subsets():
    model = {"type": "joint", "pr": {"a": "1/2", "b": "1/2", "c": "1/2", "a,b": "1/4"}}
    with pytest.raises(ValidationError) as info:
        parse_game_document(_document(model=model))
    message = str(info.value)
    for key in ('"a,c"', '"b,c"', '"a,b,c"'):
        assert key in message


def test_joint_model_keys():
    with pytest.raises(UnknownElement):
        parse_game_document(_document(model={"type": "joint", "pr": {"a,z": "1/4"}}))
    with pytest.raises(DuplicateElement):
        parse_game_document(_document(model={"type": "joint", "pr": {"a,b": "1/4", "b,a": "1/4"}}))


def test_stages_define_the_order(d_poset):
    document = parse_game_document(_document(stages=[["a", "b"], ["c"]]))
    assert document.stages == (("a", "b"), ("c",))
    assert document.instance.poset.less == d_poset.less
    with pytest.raises(ValidationError):
        parse_game_document(_document(stages=[["a"], ["c"]]))
    with pytest.raises(ValidationError):
        parse_game_document(_document(covers=[["a", "b"]], stages=[["a", "b"], ["c"]]))


# =========================
# Escritura
# =========================
def test_dump_then_parse(fixtures_dir):
    for name in ("F1.json", "F1_tree.json", "STAR.json"):
        game = parse_game_file(_read(fixtures_dir, name))
        again = parse_game_file(dump_game_file(game))
        assert again.poset.less == game.poset.less
        assert again.variant == game.variant
        for x in game.elements:
            assert again.model.pr({x}) == game.model.pr({x})
        assert again.model.pr(game.elements) == game.model.pr(game.elements)

    staged = parse_game_document(_document(stages=[["a", "b"], ["c"]]))
    assert parse_game_document(dump_game_file(staged)).stages == staged.stages


# =========================
# Reportes
# =========================
def test_render_minimal_report():
    assert render_report(Report(command="bounds")) == '{"command":"bounds"}\n'


def test_render_is_deterministic():
    report = Report(
        command="solve",
        value="1/3",
        searcher=[StrategyEntry(choice=["a", "b"], weight="2/3"), StrategyEntry(choice=["b"], weight="1/3")],
        hider=[StrategyEntry(choice="a", weight="1/3"), StrategyEntry(choice="b", weight="2/3")],
        diagnostics={"z": 1, "a": [2, 1]},
    )
    rendered = render_report(report)
    assert rendered == render_report(report)
    data = json.loads(rendered)
    assert data["searcher"][0] == {"choice": ["a", "b"], "weight": "2/3"}
    assert list(data) == sorted(data)


def test_render_text():
    report = Report(command="check", closed_form="3/11", oracle="7/25", equal=False, difference="-2/275")
    text = render_report(report, "text")
    assert "Coinciden: MISMATCH" in text
    assert "Oráculo: 7/25" in text
    assert text.endswith("\n")
