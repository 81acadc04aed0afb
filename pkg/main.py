import logging
import os
import sys
import time
from pathlib import Path
from typing import Annotated, Optional

import click
import typer
from dotenv import load_dotenv
from typer.core import TyperGroup

from poset_core.errors import InputError, RescueError
from poset_core.poset import MAX_ELEMENTS
from rescue_planner.gamefile import GameDocument, parse_game_document
from rescue_planner.planner import RunFlags, execute
from rescue_planner.report import render_report

load_dotenv()

DEFAULT_SEED = int(os.getenv("POSET_RESCUE_SEED", "42"))
DEFAULT_ROUNDS = int(os.getenv("POSET_RESCUE_ROUNDS", "100000"))
DEFAULT_TRIALS = int(os.getenv("POSET_RESCUE_TRIALS", "50"))
DEFAULT_LOG_LEVEL = os.getenv("POSET_RESCUE_LOG_LEVEL", "WARNING").upper()

_log = logging.getLogger("poset_rescue")


class RescueGroup(TyperGroup):
    """Errores de uso de la línea de comandos (opción o argumento inválido) → código 1."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as exc:
            exc.exit_code = InputError.exit_code
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = InputError.exit_code
            raise


app = typer.Typer(
    name="poset-rescue",
    help="Juegos de búsqueda y rescate sobre órdenes parciales: valores exactos, cotas y verificación.",
    add_completion=False,
    cls=RescueGroup,
)

# =========================
# Opciones comunes
# =========================
FileArg = Annotated[Path, typer.Argument(help="Documento JSON del juego")]
FormatOpt = Annotated[str, typer.Option("--format", help="json | text")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Semilla de simulación y de la conjetura")]
RoundsOpt = Annotated[int, typer.Option("--rounds", help="Rondas de simulación")]
MaxElementsOpt = Annotated[int, typer.Option("--max-elements", help="Límite de enumeración exacta")]
TrialsOpt = Annotated[int, typer.Option("--trials", help="Ensayos de la conjetura")]
TimingOpt = Annotated[bool, typer.Option("--timing", help="Incluir el tiempo de ejecución en el reporte")]
LogLevelOpt = Annotated[str, typer.Option("--log-level", help="DEBUG | INFO | WARNING | ERROR")]


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="[%(levelname)s] %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _read_document(path: Path) -> GameDocument:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"No se pudo leer '{path}': {exc}")
    return parse_game_document(text)


def _run(command: str, file: Optional[Path], fmt: str, flags: RunFlags, timing: bool, log_level: str) -> None:
    """
    Ejecuta un comando completo.

    PASO 1: Configurar logging en stderr
    PASO 2: Leer el documento (si el comando lo usa)
    PASO 3: Ejecutar el plan y medir el tiempo
    PASO 4: Escribir el reporte en stdout; errores → código de salida de su categoría
    """
    _configure_logging(log_level)
    try:
        if fmt not in ("json", "text"):
            raise InputError(f"Formato desconocido: '{fmt}' (usa json o text)")
        document = _read_document(file) if file is not None else None
        started = time.perf_counter()
        report = execute(command, document, flags)
        if timing:
            report.timing = round(time.perf_counter() - started, 6)
    except RescueError as exc:
        _log.error(f"[CLI] ❌ {type(exc).__name__}: {exc}")
        raise typer.Exit(code=exc.exit_code)
    except Exception as exc:
        _log.exception(f"[CLI] ❌ Error inesperado: {exc}")
        raise typer.Exit(code=4)
    typer.echo(render_report(report, fmt), nl=False)


def _flags(seed: int, rounds: int, max_elements: int, trials: int = DEFAULT_TRIALS, **extra) -> RunFlags:
    return RunFlags(seed=seed, rounds=rounds, max_elements=max_elements, trials=trials, **extra)


# =========================
# Comandos
# =========================
@app.command("solve")
def solve_command(
    file: FileArg,
    fmt: FormatOpt = "json",
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Mejor solución cerrada aplicable (o el oráculo) con su certificado."""
    _run("solve", file, fmt, _flags(DEFAULT_SEED, DEFAULT_ROUNDS, max_elements), timing, log_level)


@app.command("bounds")
def bounds_command(
    file: FileArg,
    fmt: FormatOpt = "json",
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Cotas inferior y superior del valor."""
    _run("bounds", file, fmt, _flags(DEFAULT_SEED, DEFAULT_ROUNDS, max_elements), timing, log_level)


@app.command("oracle")
def oracle_command(
    file: FileArg,
    fmt: FormatOpt = "json",
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Solución exacta por programación lineal sobre todas las búsquedas maximales."""
    _run("oracle", file, fmt, _flags(DEFAULT_SEED, DEFAULT_ROUNDS, max_elements), timing, log_level)


@app.command("check")
def check_command(
    file: FileArg,
    fmt: FormatOpt = "json",
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Compara la forma cerrada con el oráculo (igualdad exacta y diferencia)."""
    _run("check", file, fmt, _flags(DEFAULT_SEED, DEFAULT_ROUNDS, max_elements), timing, log_level)


@app.command("analyze")
def analyze_command(
    file: FileArg,
    fmt: FormatOpt = "json",
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Máximos, ancho, anticadenas maximales, correlación y reducibilidad."""
    _run("analyze", file, fmt, _flags(DEFAULT_SEED, DEFAULT_ROUNDS, max_elements), timing, log_level)


@app.command("simulate")
def simulate_command(
    file: FileArg,
    fmt: FormatOpt = "json",
    seed: SeedOpt = DEFAULT_SEED,
    rounds: RoundsOpt = DEFAULT_ROUNDS,
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Estimación Monte Carlo con las estrategias óptimas."""
    _run("simulate", file, fmt, _flags(seed, rounds, max_elements), timing, log_level)


@app.command("conjecture")
def conjecture_command(
    file: Annotated[Optional[Path], typer.Argument(help="Ignorado: la conjetura genera sus propias instancias")] = None,
    fmt: FormatOpt = "json",
    seed: SeedOpt = DEFAULT_SEED,
    trials: TrialsOpt = DEFAULT_TRIALS,
    min_leaves: Annotated[int, typer.Option("--min-leaves")] = 3,
    max_leaves: Annotated[int, typer.Option("--max-leaves")] = 4,
    max_elements: MaxElementsOpt = MAX_ELEMENTS,
    progress: Annotated[bool, typer.Option("--progress", help="Barra de progreso en stderr")] = False,
    timing: TimingOpt = False,
    log_level: LogLevelOpt = DEFAULT_LOG_LEVEL,
) -> None:
    """Barrido de la conjetura de retroceso (no la afirma: reporta)."""
    flags = _flags(
        seed, DEFAULT_ROUNDS, max_elements, trials, min_leaves=min_leaves, max_leaves=max_leaves, progress=progress
    )
    if file is not None:
        _configure_logging(log_level)
        _log.warning(f"[CLI] ⚠️  El documento '{file}' se ignora en 'conjecture'")
    _run("conjecture", None, fmt, flags, timing, log_level)


if __name__ == "__main__":
    app()
