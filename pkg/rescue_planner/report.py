"""
Reportes - esquema pydantic y renderizado JSON/texto determinista
"""
import json
from fractions import Fraction
from typing import Any, Dict, Hashable, List, Literal, Optional, Union

from pydantic import BaseModel

from game_engine.engine import MixedStrategy, SolutionCertificate
from solvers.uncorrelated import BoundsReport

Format = Literal["json", "text"]


class StrategyEntry(BaseModel):
    choice: Union[str, List[str]]
    weight: str


class BoundsSection(BaseModel):
    lower: str
    upper: str
    lower_source: str
    upper_source: str


class SimulationSection(BaseModel):
    estimate: float
    std_error: float
    wins: int
    rounds: int
    seed: int
    target: str
    within_3_sigma: bool


class Report(BaseModel):
    """Todas las fracciones se guardan como texto exacto "p/q"."""
    command: str
    instance_type: Optional[str] = None
    variant: Optional[str] = None
    method: Optional[str] = None
    value: Optional[str] = None
    gap: Optional[str] = None
    certified: Optional[bool] = None
    searcher: Optional[List[StrategyEntry]] = None
    hider: Optional[List[StrategyEntry]] = None
    closed_form: Optional[str] = None
    closed_form_method: Optional[str] = None
    oracle: Optional[str] = None
    equal: Optional[bool] = None
    difference: Optional[str] = None
    bounds: Optional[BoundsSection] = None
    simulation: Optional[SimulationSection] = None
    diagnostics: Optional[Dict[str, Any]] = None
    timing: Optional[float] = None


# =========================
# Conversión desde los tipos del dominio
# =========================
def fraction_text(value: Optional[Fraction]) -> Optional[str]:
    return None if value is None else str(Fraction(value))


def _choice(choice: Hashable) -> Union[str, List[str]]:
    if isinstance(choice, tuple):
        return list(choice)
    return str(choice)


def strategy_entries(mix: MixedStrategy) -> List[StrategyEntry]:
    return [StrategyEntry(choice=_choice(choice), weight=str(weight)) for choice, weight in mix.items()]


def certificate_fields(certificate: SolutionCertificate) -> Dict[str, Any]:
    return {
        "method": certificate.method,
        "value": fraction_text(certificate.value),
        "gap": fraction_text(certificate.gap),
        "certified": certificate.certified,
        "searcher": strategy_entries(certificate.searcher),
        "hider": strategy_entries(certificate.hider),
    }


def bounds_section(report: BoundsReport) -> BoundsSection:
    return BoundsSection(
        lower=str(report.lower),
        upper=str(report.upper),
        lower_source=report.lower_source,
        upper_source=report.upper_source,
    )


# =========================
# Renderizado
# =========================
_LABELS = {
    "command": "Comando",
    "instance_type": "Tipo de instancia",
    "variant": "Variante",
    "method": "Método",
    "value": "Valor",
    "gap": "Brecha",
    "certified": "Certificado",
    "closed_form": "Forma cerrada",
    "closed_form_method": "Método de forma cerrada",
    "oracle": "Oráculo",
    "difference": "Diferencia",
    "timing": "Tiempo (s)",
}


def _text_value(value: Any) -> str:
    if isinstance(value, bool):
        return "sí" if value else "no"
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"), sort_keys=True, ensure_ascii=False)
    return str(value)


def _strategy_table(title: str, entries: List[StrategyEntry]) -> List[str]:
    rows = [(e.weight, "[" + ", ".join(e.choice) + "]" if isinstance(e.choice, list) else e.choice) for e in entries]
    width = max([len("peso")] + [len(w) for w, _ in rows])
    lines = [f"{title}:", f"  {'peso'.ljust(width)}  estrategia"]
    lines.extend(f"  {w.ljust(width)}  {c}" for w, c in rows)
    return lines


def _render_text(report: Report) -> str:
    data = report.model_dump(exclude_none=True)
    lines: List[str] = []
    for key, label in _LABELS.items():
        if key in data:
            lines.append(f"{label}: {_text_value(data[key])}")
    if report.equal is not None:
        lines.append("Coinciden: OK" if report.equal else "Coinciden: MISMATCH")
    if report.bounds is not None:
        b = report.bounds
        lines.append(f"Cota inferior: {b.lower} ({b.lower_source})")
        lines.append(f"Cota superior: {b.upper} ({b.upper_source})")
    if report.simulation is not None:
        s = report.simulation
        lines.append(f"Estimación: {s.estimate:.6f} ± {s.std_error:.6f} ({s.wins}/{s.rounds}, semilla {s.seed})")
        lines.append(f"Objetivo: {s.target} ({'dentro' if s.within_3_sigma else 'fuera'} de 3 errores estándar)")
    if report.searcher:
        lines.extend(_strategy_table("Buscador", report.searcher))
    if report.hider:
        lines.extend(_strategy_table("Escondedor", report.hider))
    if report.diagnostics:
        lines.append("Diagnóstico:")
        lines.extend(f"  {key}: {_text_value(value)}" for key, value in sorted(report.diagnostics.items()))
    return "\n".join(lines) + "\n"


def render_report(report: Report, format: Format = "json") -> str:
    """JSON compacto con claves ordenadas, o texto con tablas de estrategias."""
    if format == "text":
        return _render_text(report)
    data = report.model_dump(exclude_none=True)
    return json.dumps(data, separators=(",", ":"), sort_keys=True, ensure_ascii=False) + "\n"
