# tests/test_orchestrator.py

import logging
import math
import sys
from pathlib import Path

import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from orchestrator import DimensionOrchestrator, SilentDomainPrinter
from protocol.config import RunConfig
from utils.errors import UnsupportedFamily


def _config(kind: str, **overrides) -> RunConfig:
    data = {"family": {"kind": kind, "max_depth": 3}, "N1": 0, "N2": 1, "k_list": [1, 2]}
    data.update(overrides)
    return RunConfig.model_validate(data)


def test_cantor_set_takes_the_degenerate_route():
    orchestrator = DimensionOrchestrator(_config("cantor-ternary"), verbosity=0)
    assert isinstance(orchestrator.domain_printer, SilentDomainPrinter)
    report = orchestrator.run()
    assert report.degenerate
    assert report.p_star is None
    assert report.trace == []
    assert report.spectral is None
    assert not report.positivity.positive
    assert (report.p_low, report.p_high) == (1.1, 4.0)
    assert orchestrator.last_run.step_ids() == [
        "__entry__", "build", "validate", "sweep", "rates", "positivity", "report",
    ]
    assert len(orchestrator.sweeps()) == 1
    assert orchestrator.final_state()["spectral"] == {}


def test_reference_exponent_joins_the_grid():
    orchestrator = DimensionOrchestrator(_config("cantor-ternary", p_grid=[3.0]), verbosity=0)
    orchestrator.run()
    assert orchestrator.final_state()["p_grid"] == [2.0, 3.0]


def test_system_must_fit_the_family():
    orchestrator = DimensionOrchestrator(_config("square-full", system="edge"), verbosity=0)
    with pytest.raises(UnsupportedFamily):
        orchestrator.run()


def test_nothing_before_the_first_run():
    orchestrator = DimensionOrchestrator(_config("cantor-ternary"), verbosity=0)
    assert orchestrator.final_state() is None
    assert orchestrator.sweeps() == []


def test_rebuilding_keeps_a_single_log_handler():
    DimensionOrchestrator(_config("cantor-ternary"), verbosity=0)
    orchestrator = DimensionOrchestrator(_config("cantor-ternary"), verbosity=0, log_level="debug")
    assert orchestrator.logger.name == "Orchestrator"
    assert len(orchestrator.logger.handlers) == 1
    assert not orchestrator.logger.propagate
    assert orchestrator.logger.level == logging.DEBUG


@pytest.mark.slow
def test_carpet_dimension_pipeline():
    config = RunConfig.model_validate({
        "family": {"kind": "sierpinski-carpet", "max_depth": 5},
        "N1": 0, "N2": 2, "base_level": 1, "k_list": [1, 2, 3, 4], "p_grid": [2.0],
    })
    orchestrator = DimensionOrchestrator(config, threads=4, verbosity=0)
    report = orchestrator.run()
    energies = orchestrator.sweeps()[0].energies(2.0)
    values = [energies[k] for k in sorted(energies)]
    assert all(v > 0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert 1.6 <= report.spectral.d < 2.0
    assert report.p_star <= math.log(8) / math.log(3) + 0.05


@pytest.mark.slow
def test_square_calibration_and_dichotomy():
    config = RunConfig.model_validate({
        "family": {"kind": "square-full", "max_depth": 4},
        "N1": 0, "N2": 1, "base_level": 1, "k_list": [1, 2, 3], "p_grid": [1.5, 3.0],
    })
    report = DimensionOrchestrator(config, threads=4, verbosity=0).run()
    assert 1.8 <= report.p_star <= 2.2
    branches = {d.p: d.branch for d in report.dichotomy}
    assert branches[1.5] == "lower"
    assert branches[3.0] == "upper"
