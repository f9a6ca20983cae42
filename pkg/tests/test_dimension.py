# tests/test_dimension.py

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from dimension.estimators import (
    RateEstimate,
    bisect_rate,
    conformal_dimension,
    dichotomy_report,
    positivity_diagnostic,
    rate_from_values,
    spectral_dimension,
    volume_bound,
)
from energy.sweep import EnergySweep, SweepRow
from fractal.partition import SelfSimilarFamily
from network.systems import CellSystem
from utils.errors import BracketInvalid, DivergentRate, InvalidProblem


def _rate(p, value):
    return RateEstimate(p=p, rate=value, window=[1, 2])


def _sweep(energies):
    rows = [SweepRow(p=2.0, k=k, witness=(1,), energy=e, modulus=None, residual=0.0) for k, e in energies.items()]
    return EnergySweep(system="cell", indices=(1, 1, 1, 1), N1=0, N2=1, base_level=1, p_grid=[2.0],
                       k_list=sorted(energies), candidates=[(1,)], rows=rows)


def test_rate_of_a_geometric_sequence():
    est = rate_from_values(2.0, {1: 1.0, 2: 0.5, 3: 0.25})
    assert est.rate == pytest.approx(0.5)
    assert est.residual == pytest.approx(0.0, abs=1e-12)
    assert est.monotone
    assert est.ratios == pytest.approx({1: 0.5, 2: 0.5})


def test_rate_respects_the_window():
    est = rate_from_values(2.0, {1: 9.0, 2: 1.0, 3: 0.5}, k_window=[2, 3])
    assert est.window == [2, 3]
    assert est.rate == pytest.approx(0.5)


def test_rate_flags_non_monotone_energies():
    assert not rate_from_values(2.0, {1: 1.0, 2: 2.0, 3: 1.0}).monotone


def test_rate_of_vanishing_energies():
    est = rate_from_values(2.0, {1: 0.0, 2: 0.0})
    assert est.all_zero
    assert est.rate == 0.0


def test_rate_needs_two_positive_values():
    with pytest.raises(InvalidProblem):
        rate_from_values(2.0, {1: 0.0, 2: 0.5})


def test_bisection_finds_the_crossing():
    est = bisect_rate(lambda p: _rate(p, 2 ** (2 - p)), (1.1, 4.0), tol=0.01)
    assert est.p_star == pytest.approx(2.0, abs=0.01)
    assert est.p_high - est.p_low <= 0.01
    assert est.trace[0].p == 1.1
    assert not est.degenerate


def test_bisection_rejects_a_bad_bracket():
    with pytest.raises(BracketInvalid):
        bisect_rate(lambda p: _rate(p, 2 ** (2 - p)), (2.5, 4.0))
    with pytest.raises(BracketInvalid):
        bisect_rate(lambda p: _rate(p, 2 ** (2 - p)), (1.1, 1.5))
    with pytest.raises(BracketInvalid):
        bisect_rate(lambda p: _rate(p, 1.0), (3.0, 2.0))


def test_bisection_stops_when_energies_vanish():
    zero = lambda p: RateEstimate(p=p, rate=0.0, window=[1, 2], all_zero=True)
    est = bisect_rate(zero, (1.1, 4.0))
    assert est.degenerate
    assert est.p_star is None
    assert len(est.trace) == 1


def test_conformal_dimension_needs_a_wide_enough_annulus():
    carpet = SelfSimilarFamily("sierpinski-carpet", 2)
    with pytest.raises(InvalidProblem):
        conformal_dimension(CellSystem(1), carpet, 0, 1, [1], m_star=2)


def test_conformal_dimension_of_the_cantor_set_is_degenerate():
    cantor = SelfSimilarFamily("cantor-ternary", 3)
    est = conformal_dimension(CellSystem(1), cantor, 0, 1, [1, 2])
    assert est.degenerate
    assert est.p_star is None
    assert est.upper_bound_volume == pytest.approx(math.log(2) / math.log(3))


def test_volume_bound_of_the_carpet():
    carpet = SelfSimilarFamily("sierpinski-carpet", 2)
    assert volume_bound(carpet, 1, [1, 2]) == pytest.approx(math.log(8) / math.log(3))
    assert volume_bound(carpet, 1, [5]) is None


def test_spectral_dimension():
    s = spectral_dimension(2.0, 1 / 1.251, 8.0)
    assert s.d == pytest.approx(1.8056, abs=1e-3)
    assert s.identity_residual < 1e-9


def test_spectral_identity_on_random_inputs():
    rng = np.random.default_rng(19)
    for _ in range(1000):
        p = rng.uniform(1.05, 20.0)
        N_bar = rng.uniform(1.5, 50.0)
        R_p = rng.uniform(0.05, 0.9) * N_bar
        s = spectral_dimension(p, R_p, N_bar)
        assert s.identity_residual < 1e-12
        assert s.d > 0


@pytest.mark.parametrize("R, N", [(0.0, 8.0), (0.5, 1.0)])
def test_spectral_dimension_rejects_bad_inputs(R, N):
    with pytest.raises(ValueError):
        spectral_dimension(2.0, R, N)


def test_spectral_dimension_diverges_past_the_volume_rate():
    with pytest.raises(DivergentRate):
        spectral_dimension(2.0, 9.0, 8.0)


def test_dichotomy_branches():
    upper = dichotomy_report(2.0, 0.5, 1.5)
    assert upper.branch == "upper" and upper.consistent
    lower = dichotomy_report(2.0, 1.5, 2.5)
    assert lower.branch == "lower" and lower.consistent
    assert not dichotomy_report(2.0, 0.5, 2.5).consistent
    assert dichotomy_report(2.0, 1.0, 2.0).branch == "boundary"


def test_positivity_of_decaying_energies():
    report = positivity_diagnostic(_sweep({1: 0.5, 2: 0.25}), 2.0)
    assert report.positive
    assert report.energy_floor == 0.25
    assert report.modulus_floor is None
    assert report.decay == pytest.approx(0.5)


def test_positivity_fails_on_vanishing_energies():
    report = positivity_diagnostic(_sweep({1: 0.0, 2: 0.0}), 2.0)
    assert not report.positive
    assert report.decay is None
