"""
Documentos de juego - lectura y escritura del formato JSON de instancias

{
  "elements": ["a", "b", "c"],
  "covers": [["a", "c"], ["b", "c"]],
  "variant": "osr",
  "model": {"type": "independent", "pr": {"a": "1/2", ...}},
  "stages": [["a", "b"], ["c"]]          (opcional)
}

Las probabilidades se escriben como texto "p/q" o como enteros, nunca como decimales.
En los modelos conjuntos la clave de cada subconjunto es la lista ordenada de sus
elementos separada por comas; "" es el conjunto vacío.
"""
import json
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr
from pydantic import ValidationError as SchemaError

from poset_core.errors import DuplicateElement, ParseError, UnknownElement, ValidationError
from poset_core.poset import Poset, Variant, ordinal_sum, validate_poset
from game_engine.engine import GameInstance
from prob_model.models import (
    AnyModel,
    IndependentModel,
    JointModel,
    PseudoBayesTree,
    TreeNode,
    validate_model,
)

_log = logging.getLogger(__name__)

_FRACTION_TEXT = re.compile(r"^\s*\d+\s*(/\s*\d+\s*)?$")

FractionText = Union[StrictInt, StrictStr]


# =========================
# Esquema del documento
# =========================
class TreeNodeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weight: FractionText
    leaf: Optional[str] = None
    children: Optional[List["TreeNodeSpec"]] = None


class IndependentSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["independent"]
    pr: Dict[str, FractionText]


class JointSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["joint"]
    pr: Dict[str, FractionText]


class TreeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["tree"]
    root: TreeNodeSpec


class GameFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    elements: List[str]
    covers: List[Tuple[str, str]] = Field(default_factory=list)
    variant: Literal["osr", "csr"]
    model: Annotated[Union[IndependentSpec, JointSpec, TreeSpec], Field(discriminator="type")]
    stages: Optional[List[List[str]]] = None


@dataclass(frozen=True)
class GameDocument:
    """Instancia validada más la anotación opcional de etapas."""
    instance: GameInstance
    stages: Optional[Tuple[Tuple[str, ...], ...]] = None


# =========================
# Conversión de valores
# =========================
def parse_fraction(raw: FractionText, where: str) -> Fraction:
    if isinstance(raw, int):
        return Fraction(raw)
    if not _FRACTION_TEXT.match(raw):
        raise ValidationError(f"{where}: '{raw}' no es una fracción exacta (usa \"p/q\" o un entero)")
    try:
        return Fraction(raw.replace(" ", ""))
    except ZeroDivisionError:
        raise ValidationError(f"{where}: denominador nulo en '{raw}'")


def subset_key(subset) -> str:
    return ",".join(sorted(subset))


def _parse_key(key: str, known: set) -> frozenset:
    if key.strip() == "":
        return frozenset()
    names = [name.strip() for name in key.split(",")]
    for name in names:
        if name not in known:
            raise UnknownElement(f"Clave '{key}': ubicación desconocida '{name}'")
    if len(set(names)) != len(names):
        raise DuplicateElement(f"Clave '{key}': ubicación repetida")
    return frozenset(names)


# =========================
# Modelos
# =========================
def _independent(spec: IndependentSpec) -> IndependentModel:
    return IndependentModel({x: parse_fraction(p, f"Pr({x})") for x, p in spec.pr.items()})


def _joint(spec: JointSpec, elements: List[str]) -> JointModel:
    """
    PASO 1: Normalizar claves (orden y espacios) y rechazar duplicados
    PASO 2: Exigir las 2^n entradas; la del vacío es opcional y vale 1
    """
    known = set(elements)
    table: Dict[frozenset, Fraction] = {}
    for key, raw in spec.pr.items():
        subset = _parse_key(key, known)
        if subset in table:
            raise DuplicateElement(f"El subconjunto {{{subset_key(subset)}}} aparece más de una vez")
        table[subset] = parse_fraction(raw, f"Pr({{{subset_key(subset)}}})")
    table.setdefault(frozenset(), Fraction(1))

    items = sorted(known)
    missing = [
        subset_key(subset)
        for size in range(1, len(items) + 1)
        for subset in combinations(items, size)
        if frozenset(subset) not in table
    ]
    if missing:
        raise ValidationError(
            "Modelo conjunto incompleto, faltan los subconjuntos: " + "; ".join(f'"{key}"' for key in missing)
        )
    return JointModel(table)


def _tree_node(spec: TreeNodeSpec, path: str) -> TreeNode:
    weight = parse_fraction(spec.weight, f"Peso en {path}")
    if spec.children is None:
        if spec.leaf is None:
            raise ValidationError(f"Nodo {path} sin 'leaf' ni 'children'")
        return TreeNode(weight, leaf=spec.leaf)
    if spec.leaf is not None:
        raise ValidationError(f"Nodo {path}: 'leaf' y 'children' son excluyentes")
    children = tuple(_tree_node(child, f"{path}.{i}") for i, child in enumerate(spec.children))
    return TreeNode(weight, children=children)


def _build_model(spec, elements: List[str]) -> AnyModel:
    if isinstance(spec, IndependentSpec):
        return _independent(spec)
    if isinstance(spec, JointSpec):
        return _joint(spec, elements)
    return PseudoBayesTree(_tree_node(spec.root, "raíz"))


# =========================
# Etapas
# =========================
def _apply_stages(poset: Poset, stages: List[List[str]], elements: List[str]) -> Tuple[Poset, Tuple[Tuple[str, ...], ...]]:
    staged = ordinal_sum(stages)
    flat = [x for stage in stages for x in stage]
    if sorted(flat) != sorted(elements):
        raise ValidationError("Las etapas deben repartir exactamente los elementos del documento")
    if poset.covers and poset.less != staged.less:
        raise ValidationError("Las coberturas no coinciden con la suma ordinal de las etapas")
    return staged, tuple(tuple(stage) for stage in stages)


# =========================
# Lectura y escritura
# =========================
def _schema_message(exc: SchemaError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or "documento"
    return f"Documento inválido en '{where}': {first['msg']}"


def parse_game_document(text: str) -> GameDocument:
    """
    Lee un documento de juego.

    PASO 1: JSON (ParseError con línea y columna)
    PASO 2: Esquema pydantic
    PASO 3: Poset validado y etapas opcionales
    PASO 4: Modelo con fracciones exactas y validación de la distribución
    PASO 5: Instancia del juego
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"JSON mal formado: {exc.msg}", exc.lineno, exc.colno)
    try:
        document = GameFileModel.model_validate(data)
    except SchemaError as exc:
        raise ValidationError(_schema_message(exc))

    poset = validate_poset(document.elements, document.covers)
    stages = None
    if document.stages is not None:
        poset, stages = _apply_stages(poset, document.stages, document.elements)

    model = _build_model(document.model, document.elements)
    report = validate_model(model)
    if not report.valid:
        raise ValidationError("Modelo inválido: " + "; ".join(report.violations))

    instance = GameInstance(poset, model, Variant(document.variant))
    _log.debug(f"[CLI] Documento leído: {len(poset)} ubicaciones, modelo {model.kind}, {instance.variant.value}")
    return GameDocument(instance, stages)


def parse_game_file(text: str) -> GameInstance:
    return parse_game_document(text).instance


def _model_section(model: AnyModel) -> dict:
    if isinstance(model, IndependentModel):
        return {"type": "independent", "pr": {x: str(model.probabilities[x]) for x in model.elements}}
    if isinstance(model, JointModel):
        ordered = sorted(model.table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        return {"type": "joint", "pr": {subset_key(s): str(p) for s, p in ordered}}
    return {"type": "tree", "root": model.root.as_dict()}


def dump_game_file(document: Union[GameDocument, GameInstance]) -> str:
    """Serializa de forma que parse_game_document devuelva el mismo documento."""
    if isinstance(document, GameInstance):
        document = GameDocument(document)
    game = document.instance
    data = {
        "elements": list(game.elements),
        "covers": [list(edge) for edge in sorted(game.poset.covers)],
        "variant": game.variant.value,
        "model": _model_section(game.model),
    }
    if document.stages is not None:
        data["stages"] = [list(stage) for stage in document.stages]
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
