# orchestrator package
# The dimension pipeline as a state-machine run

from .orchestrator import DimensionOrchestrator, OrchestratorState
from .domain_info_printer import ConsoleDomainPrinter, DomainInfoPrinter, SilentDomainPrinter

__all__ = [
    "DimensionOrchestrator",
    "OrchestratorState",
    "ConsoleDomainPrinter",
    "DomainInfoPrinter",
    "SilentDomainPrinter",
]
