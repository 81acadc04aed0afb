"""
SolvePlanner - clasificación de instancias y despacho hacia la mejor solución disponible
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from poset_core.errors import AssumptionViolated, NotReducible, ValidationError, WrongCorrelationClass
from poset_core.poset import (
    MAX_ELEMENTS,
    Poset,
    Variant,
    linear_extension,
    maximal_antichains,
    maxima,
    minima,
    ordinal_sum,
    width_with_decomposition,
)
from game_engine.engine import (
    GameInstance,
    SolutionCertificate,
    certify_within_guard,
    solve_oracle,
)
from game_engine.simulation import simulate
from prob_model.models import (
    Correlation,
    IndependentModel,
    PseudoBayesTree,
    correlation_class,
    validate_model,
)
from prob_model.reduction import completely_reduce, to_pseudo_bayes_tree
from rescue_planner.gamefile import GameDocument
from rescue_planner.report import (
    Report,
    SimulationSection,
    bounds_section,
    certificate_fields,
    fraction_text,
)
from solvers.conjecture import conjecture_scan
from solvers.correlated import (
    corollary_marginal_bound,
    correlated_bounds,
    marginal_bounds,
    solve_csr_star,
    solve_osr3_total,
    solve_osr_independent_last,
    tree_for,
)
from solvers.flow import csr_flow_strategy, csr_value_and_hider
from solvers.tree_game import solve_tree_game
from solvers.uncorrelated import (
    bounds,
    maxima_dominate,
    maxima_formula,
    solve_multistage,
    solve_osr_maxima,
    solve_total_order,
    solve_unordered,
)

_log = logging.getLogger(__name__)

Stages = Tuple[Tuple[str, ...], ...]


@dataclass(frozen=True)
class RunFlags:
    """Opciones de una invocación (el CLI las toma de la línea de comandos y del entorno)."""
    seed: int = 42
    rounds: int = 100000
    max_elements: int = MAX_ELEMENTS
    trials: int = 50
    min_leaves: int = 3
    max_leaves: int = 4
    progress: bool = False


@dataclass
class SolvePlan:
    """Plan de ejecución de un comando sobre una instancia."""
    steps: List[str]
    command: str
    instance_type: str  # 'unordered', 'total-order', 'multistage', 'tree', ..., 'general'
    use_closed_form: bool
    use_oracle: bool
    params: Dict[str, Any] = field(default_factory=dict)


def detect_stages(poset: Poset) -> Optional[Stages]:
    """Niveles de minimales sucesivos si el poset es una suma ordinal de anticadenas."""
    if not poset.elements:
        return None
    remaining = set(poset.elements)
    stages = []
    while remaining:
        level = tuple(sorted(x for x in remaining if not (poset.below(x) & remaining)))
        stages.append(level)
        remaining -= set(level)
    if ordinal_sum(stages).less != poset.less:
        return None
    return tuple(stages)


def star_center(poset: Poset) -> Optional[str]:
    """Centro de una estrella U < * (U anticadena no vacía), o None."""
    tops = maxima(poset)
    if len(tops) != 1 or len(poset) < 2:
        return None
    center = next(iter(tops))
    expected = {(u, center) for u in poset.elements if u != center}
    return center if set(poset.less) == expected else None


def _odds_text(odds: Tuple[Fraction, Fraction]) -> str:
    left, right = odds
    if right == 0:
        return "1:0" if left else "0:0"
    ratio = Fraction(left) / right
    return f"{ratio.numerator}:{ratio.denominator}"


def _support_text(support) -> List[int]:
    return sorted(support)


class SolvePlanner:
    """
    Planificador de comandos.
    Decide si una instancia tiene estructura especial con solución cerrada o si se resuelve
    con el oráculo exacto.
    """

    COMMANDS = ("solve", "bounds", "oracle", "check", "analyze", "simulate", "conjecture")

    CLOSED_FORMS = {
        "unordered": "Ubicaciones no ordenadas con variables independientes",
        "total-order": "Orden total con variables independientes",
        "multistage": "Suma ordinal de etapas no ordenadas",
        "osr-maxima": "Todo no-máximo por debajo de todo máximo",
        "csr-antichains": "CSR independiente por anticadenas maximales y flujo",
        "tree": "Anticadena con distribución en árbol pseudo-bayesiano",
        "osr3": "Orden total de tres ubicaciones correlacionadas",
        "independent-last": "Orden total con la última ubicación independiente",
        "csr-star": "Estrella CSR con centro independiente",
    }

    def __init__(self, flags: Optional[RunFlags] = None):
        self.flags = flags or RunFlags()

    def classify_instance(self, game: GameInstance, stages: Optional[Stages] = None) -> str:
        """
        Clasifica la instancia según la estructura que reconoce alguna solución cerrada.

        PASO 1: Modelos independientes: anticadena, orden total (OSR), suma ordinal,
                máximos (OSR) y anticadenas maximales (CSR, siempre aplica)
        PASO 2: Modelos correlacionados OSR: anticadena (árbol), 3-orden total, orden total
        PASO 3: Modelos correlacionados CSR: estrella
        PASO 4: Retornar 'general' si no hay estructura especial (oráculo)
        """
        poset = game.poset
        if isinstance(game.model, IndependentModel):
            if poset.is_antichain:
                return "unordered"
            if game.variant == Variant.OSR and poset.is_total_order:
                return "total-order"
            if stages is not None or detect_stages(poset) is not None:
                return "multistage"
            if game.variant == Variant.CSR:
                return "csr-antichains"
            if maxima_dominate(poset):
                return "osr-maxima"
            return "general"

        if game.variant == Variant.OSR:
            if poset.is_antichain and len(poset) > 1:
                return "tree"
            if poset.is_total_order and len(poset) == 3:
                return "osr3"
            if poset.is_total_order and len(poset) > 1:
                return "independent-last"
            return "general"

        if star_center(poset) is not None:
            return "csr-star"
        return "general"

    def extract_parameters(self, game: GameInstance, instance_type: str, stages: Optional[Stages]) -> Dict[str, Any]:
        """Orden, etapas o centro que necesita la solución cerrada elegida."""
        params: Dict[str, Any] = {}
        if instance_type in ("total-order", "osr3", "independent-last"):
            params["order"] = linear_extension(game.poset)
        elif instance_type == "multistage":
            params["stages"] = stages if stages is not None else detect_stages(game.poset)
        elif instance_type == "csr-star":
            params["center"] = star_center(game.poset)
        return params

    def create_plan(self, command: str, game: Optional[GameInstance], stages: Optional[Stages] = None) -> SolvePlan:
        """
        Crea un plan de ejecución para el comando.

        PASO 1: Validar el comando
        PASO 2: Clasificar la instancia y extraer parámetros
        PASO 3: Definir los pasos según el comando y el tipo de instancia
        """
        if command not in self.COMMANDS:
            raise ValidationError(f"Comando desconocido: '{command}' (usa {', '.join(self.COMMANDS)})")
        if command == "conjecture":
            return SolvePlan(
                steps=[
                    f"1. Generar {self.flags.trials} árboles con semilla {self.flags.seed}",
                    "2. Comparar el valor con búsquedas de retroceso contra el oráculo",
                    "3. Reportar coincidencias y contraejemplos",
                ],
                command=command,
                instance_type="scan",
                use_closed_form=False,
                use_oracle=True,
            )
        if game is None:
            raise ValidationError(f"El comando '{command}' requiere un documento de juego")

        instance_type = self.classify_instance(game, stages)
        params = self.extract_parameters(game, instance_type, stages)
        has_closed_form = instance_type in self.CLOSED_FORMS
        label = self.CLOSED_FORMS.get(instance_type, "Sin estructura especial")

        if command == "solve":
            steps = [f"1. Clasificar instancia: {label}"]
            if has_closed_form:
                steps += ["2. Aplicar la solución cerrada y certificar la brecha", "3. Si un supuesto falla, usar el oráculo"]
            else:
                steps += ["2. Resolver el juego matricial completo con el oráculo"]
            return SolvePlan(steps, command, instance_type, has_closed_form, not has_closed_form, params)

        if command == "check":
            steps = [
                f"1. Clasificar instancia: {label}",
                "2. Calcular la forma cerrada (o la fórmula de máximos)",
                "3. Resolver con el oráculo y comparar exactamente",
            ]
            return SolvePlan(steps, command, instance_type, True, True, params)

        if command == "simulate":
            steps = [
                "1. Obtener estrategias óptimas",
                f"2. Simular {self.flags.rounds} rondas con semilla {self.flags.seed}",
            ]
            return SolvePlan(steps, command, instance_type, has_closed_form, True, params)

        steps = {
            "bounds": ["1. Calcular las cotas aplicables al modelo"],
            "oracle": ["1. Enumerar búsquedas maximales", "2. Resolver el LP exacto"],
            "analyze": ["1. Estructura del poset", "2. Clase de correlación y reducibilidad del modelo"],
        }[command]
        return SolvePlan(steps, command, instance_type, False, command == "oracle", params)

    # =========================
    # Soluciones cerradas
    # =========================
    def run_closed_form(self, game: GameInstance, plan: SolvePlan) -> Tuple[SolutionCertificate, Dict[str, Any]]:
        m = self.flags.max_elements
        model, poset, params = game.model, game.poset, plan.params
        kind = plan.instance_type

        if kind == "unordered":
            return solve_unordered(model, game.variant, max_elements=m), {}
        if kind == "total-order":
            return solve_total_order(model, params["order"], max_elements=m), {}
        if kind == "multistage":
            stages = [model.restrict(stage) for stage in params["stages"]]
            certificate = solve_multistage(stages, game.variant, max_elements=m)
            return certificate, {"stages": [list(stage) for stage in params["stages"]]}
        if kind == "osr-maxima":
            return solve_osr_maxima(poset, model, max_elements=m).certificate, {"maxima_dominate": True}
        if kind == "csr-antichains":
            found = csr_value_and_hider(poset, model, max_elements=m)
            flow = csr_flow_strategy(poset, model, found.value, max_elements=m)
            certificate = certify_within_guard(game, found.value, flow.searcher, found.hider, "csr-flow", max_elements=m)
            return certificate, {"antichain": sorted(found.antichain), "flow_total": str(flow.total)}
        if kind == "tree":
            tree = model if isinstance(model, PseudoBayesTree) else to_pseudo_bayes_tree(model)
            solution = solve_tree_game(tree, max_elements=m)
            return solution.certificate, {
                "tree": tree.root.as_dict(),
                "searcher_odds": _odds_text(solution.root.searcher_odds),
                "hider_odds": _odds_text(solution.root.hider_odds),
            }
        if kind == "osr3":
            solution = solve_osr3_total(model, params["order"])
            certificate = certify_within_guard(
                game,
                solution.certificate.value,
                solution.certificate.searcher,
                solution.certificate.hider,
                "osr3-lp",
                max_elements=m,
            )
            return certificate, {
                "bayes_factor": "inf" if solution.factor is None else str(solution.factor),
                "announced_support": _support_text(solution.announced_support),
                "lp_support": _support_text(solution.lp_support),
                "support_matches": solution.support_matches,
            }
        if kind == "independent-last":
            return solve_osr_independent_last(model, params["order"], max_elements=m), {}
        if kind == "csr-star":
            return solve_csr_star(model, params["center"], max_elements=m), {"center": params["center"]}
        raise ValidationError(f"Sin solución cerrada para instancias '{kind}'")

    def _solve(self, game: GameInstance, plan: SolvePlan) -> Tuple[SolutionCertificate, Dict[str, Any]]:
        if plan.use_closed_form:
            try:
                certificate, diagnostics = self.run_closed_form(game, plan)
            except AssumptionViolated as exc:
                _log.warning(f"[PLAN] ⚠️  Solución cerrada '{plan.instance_type}' descartada: {exc}")
                certificate = solve_oracle(game, max_elements=self.flags.max_elements)
                return certificate, {"closed_form_rejected": str(exc)}
            if certificate.gap is not None and certificate.gap != 0:
                _log.warning(
                    f"[PLAN] ⚠️  '{certificate.method}' con brecha {certificate.gap}: se usan las estrategias del oráculo"
                )
                diagnostics["closed_form_gap"] = str(certificate.gap)
                diagnostics["closed_form_rejected"] = f"Certificado de '{certificate.method}' con brecha no nula"
                return solve_oracle(game, max_elements=self.flags.max_elements), diagnostics
            return certificate, diagnostics
        diagnostics: Dict[str, Any] = {}
        if isinstance(game.model, IndependentModel) and game.variant == Variant.OSR:
            diagnostics["maxima_formula"] = str(maxima_formula(game.poset, game.model))
            diagnostics["maxima_dominate"] = maxima_dominate(game.poset)
        return solve_oracle(game, max_elements=self.flags.max_elements), diagnostics

    # =========================
    # Comandos
    # =========================
    def _report_solve(self, game: GameInstance, plan: SolvePlan) -> Report:
        certificate, diagnostics = self._solve(game, plan)
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            variant=game.variant.value,
            diagnostics=diagnostics or None,
            **certificate_fields(certificate),
        )

    def _report_oracle(self, game: GameInstance, plan: SolvePlan) -> Report:
        certificate = solve_oracle(game, max_elements=self.flags.max_elements)
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            variant=game.variant.value,
            **certificate_fields(certificate),
        )

    def _report_check(self, game: GameInstance, plan: SolvePlan) -> Report:
        """Nunca falla por discrepancia: la reporta."""
        oracle = solve_oracle(game, max_elements=self.flags.max_elements)
        diagnostics: Dict[str, Any] = {}
        closed: Optional[Fraction] = None
        method: Optional[str] = None

        if plan.instance_type in self.CLOSED_FORMS:
            try:
                certificate, diagnostics = self.run_closed_form(game, plan)
                closed, method = certificate.value, certificate.method
                diagnostics["closed_form_gap"] = fraction_text(certificate.gap)
            except AssumptionViolated as exc:
                diagnostics["closed_form_rejected"] = str(exc)
        elif isinstance(game.model, IndependentModel) and game.variant == Variant.OSR:
            closed, method = maxima_formula(game.poset, game.model), "osr-maxima-formula"
            diagnostics["maxima_dominate"] = maxima_dominate(game.poset)
        else:
            diagnostics["closed_form_rejected"] = "Sin solución cerrada para esta instancia"

        equal = None if closed is None else closed == oracle.value
        if equal is False:
            _log.warning(f"[PLAN] ⚠️  Discrepancia: forma cerrada {closed} ≠ oráculo {oracle.value}")
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            variant=game.variant.value,
            closed_form=fraction_text(closed),
            closed_form_method=method,
            oracle=str(oracle.value),
            equal=equal,
            difference=None if closed is None else str(closed - oracle.value),
            diagnostics=diagnostics or None,
        )

    def _report_bounds(self, game: GameInstance, plan: SolvePlan) -> Report:
        diagnostics: Dict[str, Any] = {}
        if isinstance(game.model, IndependentModel):
            found = bounds(game.poset, game.model, game.variant)
        else:
            diagnostics["correlation"] = correlation_class(game.model).value
            try:
                found = correlated_bounds(game)
            except WrongCorrelationClass as exc:
                _log.warning(f"[PLAN] ⚠️  Cotas correlacionadas no aplicables: {exc}")
                found = marginal_bounds(game)
                diagnostics["bounds_fallback"] = str(exc)
            if found.upper_source == "tree-corollary":
                diagnostics["marginal_corollary"] = str(corollary_marginal_bound(tree_for(game.model)))
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            variant=game.variant.value,
            bounds=bounds_section(found),
            diagnostics=diagnostics or None,
        )

    def _report_analyze(self, game: GameInstance, plan: SolvePlan) -> Report:
        """
        Diagnóstico estructural de la instancia.

        PASO 1: Máximos, mínimos, ancho y cadenas de Dilworth
        PASO 2: Anticadenas maximales con su ideal inferior
        PASO 3: Validez del modelo, clase de correlación y reducibilidad
        """
        poset, model = game.poset, game.model
        width, chains = width_with_decomposition(poset)
        antichains = maximal_antichains(poset, max_elements=self.flags.max_elements)
        stages = detect_stages(poset)
        diagnostics: Dict[str, Any] = {
            "elements": list(poset.elements),
            "covers": [list(edge) for edge in poset.hasse_edges()],
            "maxima": sorted(maxima(poset)),
            "minima": sorted(minima(poset)),
            "width": width,
            "chains": [list(chain) for chain in chains],
            "maximal_antichains": [
                {"antichain": sorted(a.antichain), "downset": sorted(a.downset)} for a in antichains
            ],
            "is_antichain": poset.is_antichain,
            "is_total_order": poset.is_total_order,
            "maxima_dominate": maxima_dominate(poset),
            "stages": None if stages is None else [list(stage) for stage in stages],
            "model": model.kind,
            "model_valid": validate_model(model).valid,
        }
        if isinstance(model, IndependentModel):
            diagnostics["correlation"] = Correlation.INDEPENDENT.value
            diagnostics["reducible"] = True
        else:
            diagnostics["correlation"] = correlation_class(model).value
            try:
                diagnostics["reduction"] = completely_reduce(model).describe()
                diagnostics["reducible"] = True
            except NotReducible as exc:
                diagnostics["reducible"] = False
                diagnostics["not_reducible_block"] = list(exc.block)
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            variant=game.variant.value,
            diagnostics=diagnostics,
        )

    def _report_simulate(self, game: GameInstance, plan: SolvePlan) -> Report:
        certificate, _ = self._solve(game, plan)
        result = simulate(game, certificate.searcher, certificate.hider, self.flags.rounds, self.flags.seed)
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            variant=game.variant.value,
            method=certificate.method,
            value=str(certificate.value),
            simulation=SimulationSection(
                estimate=result.estimate,
                std_error=result.std_error,
                wins=result.wins,
                rounds=result.rounds,
                seed=self.flags.seed,
                target=str(certificate.value),
                within_3_sigma=result.within(float(certificate.value)),
            ),
        )

    def _report_conjecture(self, plan: SolvePlan) -> Report:
        flags = self.flags
        scan = conjecture_scan(
            flags.seed,
            flags.trials,
            min_leaves=flags.min_leaves,
            max_leaves=flags.max_leaves,
            max_elements=flags.max_elements,
            progress=flags.progress,
        )
        records = [
            {
                "index": t.index,
                "leaves": t.leaves,
                "backjump_value": str(t.backjump_value),
                "oracle_value": str(t.oracle_value),
                "equal": t.equal,
                "attempts": t.attempts,
            }
            for t in scan.trials
        ]
        mismatches = [{"index": t.index, "tree": t.tree} for t in scan.mismatches]
        return Report(
            command=plan.command,
            instance_type=plan.instance_type,
            diagnostics={
                "seed": scan.seed,
                "trials": len(scan.trials),
                "min_leaves": scan.min_leaves,
                "max_leaves": scan.max_leaves,
                "matches": scan.matches,
                "records": records,
                "mismatches": mismatches,
            },
        )

    def execute_plan(self, plan: SolvePlan, game: Optional[GameInstance]) -> Report:
        """
        Ejecuta el plan.

        PASO 1: Registrar los pasos del plan
        PASO 2: Despachar al comando
        PASO 3: Retornar el reporte (sin tiempos; el CLI los agrega con --timing)
        """
        _log.info(f"[PLAN] Ejecutando '{plan.command}' sobre instancia de tipo: {plan.instance_type}")
        for step in plan.steps:
            _log.info(f"[PLAN] {step}")

        if plan.command == "conjecture":
            return self._report_conjecture(plan)
        handler = {
            "solve": self._report_solve,
            "bounds": self._report_bounds,
            "oracle": self._report_oracle,
            "check": self._report_check,
            "analyze": self._report_analyze,
            "simulate": self._report_simulate,
        }[plan.command]
        return handler(game, plan)


def execute(
    command: str,
    instance: Union[GameDocument, GameInstance, None],
    flags: Optional[RunFlags] = None,
) -> Report:
    """Crea y ejecuta el plan de un comando sobre un documento o una instancia."""
    stages = None
    if isinstance(instance, GameDocument):
        instance, stages = instance.instance, instance.stages
    planner = SolvePlanner(flags)
    plan = planner.create_plan(command, instance, stages)
    return planner.execute_plan(plan, instance)
