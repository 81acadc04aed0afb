"""
Errores del solucionador - jerarquía única con código de salida por categoría
"""
from typing import Iterable, List, Optional


class RescueError(Exception):
    """Error base. Cada subclase define el código de salida del CLI."""
    exit_code = 4


# =========================
# Entrada inválida (código 1)
# =========================
class InputError(RescueError):
    exit_code = 1


class ParseError(InputError):
    """Documento mal formado, con posición."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (línea {line}, columna {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(InputError):
    pass


class CycleError(InputError):
    pass


class UnknownElement(InputError):
    pass


class DuplicateElement(InputError):
    pass


class ElementMismatch(InputError):
    pass


class EmptyStage(InputError):
    pass


class InvalidModel(InputError):
    pass


class EmptyMatrix(InputError):
    pass


class IllegalSearch(InputError):
    pass


# =========================
# Supuestos violados (código 2)
# =========================
class AssumptionViolated(RescueError):
    exit_code = 2


class ZeroCondition(AssumptionViolated):
    pass


class NotCoindependent(AssumptionViolated):
    pass


class NotReducible(AssumptionViolated):
    def __init__(self, block: Iterable[str]):
        self.block = tuple(sorted(block))
        super().__init__(f"El subconjunto {{{', '.join(self.block)}}} no es reducible")


class WeightTooLarge(AssumptionViolated):
    pass


class WeightTooSmall(AssumptionViolated):
    pass


class WrongCorrelationClass(AssumptionViolated):
    pass


class NotIndependentCenter(AssumptionViolated):
    pass


class PreconditionViolated(AssumptionViolated):
    def __init__(self, failures: List[str]):
        self.failures = list(failures)
        super().__init__("Precondiciones no satisfechas: " + "; ".join(self.failures))


class DegenerateHider(AssumptionViolated):
    pass


class InfeasibleDual(AssumptionViolated):
    pass


# =========================
# Límites de tamaño (código 3)
# =========================
class GuardExceeded(RescueError):
    exit_code = 3


class SizeLimit(GuardExceeded):
    def __init__(self, what: str, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(
            f"{what}: {size} elementos supera el límite de {limit} "
            f"(usa --max-elements para ampliarlo)"
        )


# =========================
# Inconsistencias internas (código 4)
# =========================
class InternalInconsistency(RescueError):
    exit_code = 4


class InfeasibleFlow(InternalInconsistency):
    pass


class UnboundedProgram(InternalInconsistency):
    pass
