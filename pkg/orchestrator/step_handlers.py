# orchestrator/step_handlers.py

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict

from dimension.estimators import (
    conformal_dimension,
    dichotomy_report,
    positivity_diagnostic,
    rate,
    spectral_dimension,
)
from energy.sweep import energy_sweep
from network.analysis import growth_rates, validate_proper_system
from protocol.config import RunConfig
from protocol.results import (
    DichotomyRecord,
    DimensionReport,
    PositivityRecord,
    SpectralRecord,
    TraceRecord,
)
from tools.builders import build_family, build_system
from utils.errors import DivergentRate

logger = logging.getLogger("confdim.orchestrator")

REFERENCE_P = 2.0


class StepHandler(ABC):
    """One stage of the dimension pipeline."""

    def __init__(self, config: RunConfig, threads: int, domain_printer):
        self.config = config
        self.threads = threads
        self.domain_printer = domain_printer

    @abstractmethod
    def execute(self, state: Dict[str, Any]) -> Dict[str, Any]:
        pass

    def _print_domain_info(self, step_name: str, state: Dict[str, Any], result: Dict):
        self.domain_printer.print_step_info(step_name, state, result)


class BuildStepHandler(StepHandler):
    def execute(self, state):
        family = build_family(self.config.family)
        system = build_system(self.config)
        system.require(family)
        step_result = {"family": family, "system": system}
        self._print_domain_info("build", state, step_result)
        return step_result


class ValidateStepHandler(StepHandler):
    def execute(self, state):
        c = self.config
        validation = validate_proper_system(state["system"], state["family"], c.levels(), c.samples, c.seed)
        if not validation.holds:
            logger.warning("%s is not proper on levels %s; estimates may be off",
                           state["system"].describe(), c.levels())
        growth = growth_rates(state["family"], c.N2, c.window())
        step_result = {"validation": validation, "growth": growth}
        self._print_domain_info("validate", state, step_result)
        return step_result


class SweepStepHandler(StepHandler):
    def execute(self, state):
        c = self.config
        p_grid = sorted(set(c.p_grid) | {REFERENCE_P})
        sweep = energy_sweep(state["system"], state["family"], c.N1, c.N2, p_grid, c.window(),
                             c.w_policy, c.base_level, self.threads, with_modulus=c.with_modulus)
        step_result = {"sweep": sweep, "p_grid": p_grid}
        self._print_domain_info("sweep", state, step_result)
        return step_result


class RateStepHandler(StepHandler):
    def execute(self, state):
        rates = {p: rate(state["sweep"], p, self.config.window()) for p in state["p_grid"]}
        step_result = {"rates": rates, "degenerate": all(r.all_zero for r in rates.values())}
        self._print_domain_info("rates", state, step_result)
        return step_result


class BisectionStepHandler(StepHandler):
    def execute(self, state):
        c = self.config
        estimate = conformal_dimension(state["system"], state["family"], c.N1, c.N2, c.window(), c.p_bracket,
                                       c.tol, c.m_star, c.base_level, c.w_policy, self.threads)
        step_result = {"estimate": estimate, "degenerate": estimate.degenerate}
        self._print_domain_info("bisection", state, step_result)
        return step_result


class SpectralStepHandler(StepHandler):
    def execute(self, state):
        N_bar = state["growth"].N_upper
        spectral, dichotomy = {}, []
        for p, r in sorted(state["rates"].items()):
            if r.all_zero or N_bar <= 1:
                continue
            try:
                spectral[p] = spectral_dimension(p, r.rate, N_bar)
            except DivergentRate as exc:
                logger.warning("no spectral dimension at p=%g: %s", p, exc)
                continue
            dichotomy.append(dichotomy_report(p, r.rate, spectral[p].d))
        step_result = {"spectral": spectral, "dichotomy": dichotomy}
        self._print_domain_info("spectral", state, step_result)
        return step_result


class PositivityStepHandler(StepHandler):
    def execute(self, state):
        positivity = positivity_diagnostic(state["sweep"], REFERENCE_P)
        step_result = {"positivity": positivity}
        self._print_domain_info("positivity", state, step_result)
        return step_result


class ReportStepHandler(StepHandler):
    def execute(self, state):
        c = self.config
        family, growth = state["family"], state["growth"]
        estimate = state.get("estimate")
        spectral = state.get("spectral") or {}
        low, high = c.p_bracket
        report = DimensionReport(
            family=family.describe(),
            system=state["system"].describe(),
            N1=c.N1,
            N2=c.N2,
            k_window=c.window(),
            degenerate=state["degenerate"],
            p_low=estimate.p_low if estimate else low,
            p_high=estimate.p_high if estimate else high,
            p_star=estimate.p_star if estimate else None,
            volume_bound=growth.volume_bound_upper,
            volume_bound_lower=growth.volume_bound_lower,
            N_upper=growth.N_upper,
            within_volume_bound=estimate.within_volume_bound() if estimate else True,
            spectral=_spectral_record(spectral.get(REFERENCE_P)),
            dichotomy=[DichotomyRecord(p=d.p, rate=d.rate, d=d.d, branch=d.branch, consistent=d.consistent)
                       for d in state.get("dichotomy") or []],
            positivity=PositivityRecord(**{k: getattr(state["positivity"], k) for k in PositivityRecord.model_fields}),
            trace=[TraceRecord(p=t.p, rate=t.rate, all_zero=t.all_zero, low=t.low, high=t.high)
                   for t in (estimate.trace if estimate else [])],
        )
        if report.degenerate:
            logger.info("every energy vanishes; %s is degenerate for this system", family.describe())
        step_result = {"report": report}
        self._print_domain_info("report", state, step_result)
        return step_result


def _spectral_record(s) -> SpectralRecord:
    if s is None:
        return None
    return SpectralRecord(p=s.p, rate=s.rate, N_bar=s.N_bar, d=s.d, identity_residual=s.identity_residual)
