# orchestrator/orchestrator.py

import logging
from typing import Any, Dict, List, Optional

from dimension.estimators import DimensionEstimate, Dichotomy, PositivityReport, RateEstimate, SpectralDimension
from energy.sweep import EnergySweep
from fractal.partition import PartitionFamily
from network.analysis import GrowthRates, ProperSystemReport
from network.systems import ProperSystem
from protocol.config import RunConfig
from protocol.results import DimensionReport
from utils.log import setup_logger
from utils.state_machine import EntryPoint, Run, StateMachine, Step, Termination
from .domain_info_printer import ConsoleDomainPrinter, DomainInfoPrinter, SilentDomainPrinter
from .step_handlers import (
    BisectionStepHandler,
    BuildStepHandler,
    PositivityStepHandler,
    RateStepHandler,
    ReportStepHandler,
    SpectralStepHandler,
    StepHandler,
    SweepStepHandler,
    ValidateStepHandler,
)


class OrchestratorState(Dict[str, Any]):
    family: PartitionFamily
    system: ProperSystem
    validation: ProperSystemReport
    growth: GrowthRates
    p_grid: List[float]
    sweep: EnergySweep
    rates: Dict[float, RateEstimate]
    degenerate: bool
    estimate: Optional[DimensionEstimate]
    spectral: Dict[float, SpectralDimension]
    dichotomy: List[Dichotomy]
    positivity: PositivityReport
    report: DimensionReport


class DimensionOrchestrator:
    """build → validate → sweep → rates → bisection → spectral → positivity → report.

    Degenerate families (every energy zero) skip bisection and spectral.
    """

    def __init__(self, config: RunConfig, threads: int = 1, log_level: str = "info", verbosity: int = 1):
        self.config = config
        self.threads = threads
        self.domain_printer = self._create_domain_printer(verbosity)
        self.step_handlers = self._create_step_handlers()
        self.logger = self._setup_logger(log_level)
        self.workflow = self._build_state_machine()
        self.last_run: Optional[Run[OrchestratorState]] = None

    def _create_domain_printer(self, verbosity: int) -> DomainInfoPrinter:
        if verbosity == 0:
            return SilentDomainPrinter()
        return ConsoleDomainPrinter(verbosity)

    def _create_step_handlers(self) -> Dict[str, StepHandler]:
        args = (self.config, self.threads, self.domain_printer)
        return {
            "build": BuildStepHandler(*args),
            "validate": ValidateStepHandler(*args),
            "sweep": SweepStepHandler(*args),
            "rates": RateStepHandler(*args),
            "bisection": BisectionStepHandler(*args),
            "spectral": SpectralStepHandler(*args),
            "positivity": PositivityStepHandler(*args),
            "report": ReportStepHandler(*args),
        }

    def _setup_logger(self, log_level: str) -> logging.Logger:
        return setup_logger("Orchestrator", log_level)

    def _build_state_machine(self) -> StateMachine[OrchestratorState]:
        sm = StateMachine(state_schema=OrchestratorState, logger=self.logger)

        entry = EntryPoint()
        steps = {name: Step(name, handler.execute) for name, handler in self.step_handlers.items()}
        terminate = Termination()
        sm.add_steps([entry, *steps.values(), terminate])

        sm.connect(entry, steps["build"])
        sm.connect(steps["build"], steps["validate"])
        sm.connect(steps["validate"], steps["sweep"])
        sm.connect(steps["sweep"], steps["rates"])
        sm.connect(steps["rates"], [steps["bisection"], steps["positivity"]], condition=self._decide_post_rates)
        sm.connect(steps["bisection"], steps["spectral"])
        sm.connect(steps["spectral"], steps["positivity"])
        sm.connect(steps["positivity"], steps["report"])
        sm.connect(steps["report"], terminate)

        return sm

    def run(self) -> DimensionReport:
        run = self.workflow.run(self._create_initial_state())
        self.last_run = run
        self.logger.debug("dimension pipeline %s: %s", run.run_id, " -> ".join(run.step_ids()))
        return run.get_final_state()["report"]

    def final_state(self) -> Optional[OrchestratorState]:
        return self.last_run.get_final_state() if self.last_run else None

    def sweeps(self) -> List[EnergySweep]:
        """The initial sweep followed by one sweep per bisection evaluation."""
        state = self.final_state()
        if state is None:
            return []
        out = [state["sweep"]]
        if state.get("estimate") is not None:
            out.extend(state["estimate"].sweeps[p] for p in sorted(state["estimate"].sweeps))
        return out

    def _create_initial_state(self) -> OrchestratorState:
        return {
            "family": None,
            "system": None,
            "degenerate": False,
            "estimate": None,
            "spectral": {},
            "dichotomy": [],
        }

    def _decide_post_rates(self, state: OrchestratorState) -> str:
        return "positivity" if state["degenerate"] else "bisection"
