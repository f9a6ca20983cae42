# tests/test_network.py

import math
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from fractal import weight as weights
from fractal.partition import SelfSimilarFamily
from network.analysis import balanced_check_bounded, growth_rates, validate_proper_system
from network.systems import (
    CellSystem,
    CornerLatticeSystem,
    EdgeSharingSystem,
    RebuiltSystem,
    cell_vertex,
    gamma,
    local_problem,
    make_system,
    refine,
)
from utils.errors import InvalidProblem, UnsupportedFamily


@pytest.fixture
def carpet():
    return SelfSimilarFamily("sierpinski-carpet", 2)


@pytest.fixture
def square():
    return SelfSimilarFamily("square-full", 2)


def test_gamma_and_refine(square):
    assert gamma(square, (1,), 1) == [(1,), (2,), (8,), (9,)]
    assert len(gamma(square, (9,), 1)) == 9
    assert len(refine(square, [(1,), (2,)], 1)) == 18


def test_first_level_networks_of_the_carpet(carpet):
    cells = CellSystem(1).build(carpet, 1)
    assert cells.graph.number_of_nodes() == 8
    assert cells.graph.number_of_edges() == 12
    edges = EdgeSharingSystem().build(carpet, 1)
    assert edges.graph.number_of_edges() == 8
    corners = CornerLatticeSystem().build(carpet, 1)
    assert corners.graph.number_of_nodes() == 16
    assert corners.graph.number_of_edges() == 24
    assert cells.vertices_of((1,)) == [cell_vertex((1,))]


def test_carpet_systems_refuse_other_families(square):
    with pytest.raises(UnsupportedFamily):
        validate_proper_system(EdgeSharingSystem(), square, [1])
    with pytest.raises(ValueError):
        make_system("ring")


def test_cell_system_is_proper(carpet):
    report = validate_proper_system(CellSystem(1), carpet, [1, 2])
    assert report.holds
    assert report.observed_l0 == 1
    assert [c.level for c in report.levels] == [1, 2]


def test_corner_lattice_multiplicity(carpet):
    report = validate_proper_system(CornerLatticeSystem(), carpet, [1])
    assert report.holds
    # an edge-sharing pair of squares carries five lattice edges
    assert report.observed_l0 == 5


def test_rebuilt_system_indices():
    rebuilt = RebuiltSystem(CornerLatticeSystem(), 3)
    assert rebuilt.indices == (3, 25, 3, 3)
    assert CellSystem(2).indices == (2, 1, 1, 1)


def test_growth_of_the_carpet(carpet):
    growth = growth_rates(carpet, 1, [1, 2])
    assert growth.L_star == 8
    assert growth.N_star == 8
    assert growth.cell_counts == {1: 8, 2: 64}
    assert growth.N_upper == pytest.approx(8.0)
    assert growth.volume_bound_upper == pytest.approx(math.log(8) / math.log(3))
    assert growth.reduction_consistent


def test_growth_of_the_full_square(square):
    assert growth_rates(square, 1, [1]).L_star == 9


def test_balanced_check_on_the_full_square(square):
    g = weights.geometric(F(1, 3))
    corner = balanced_check_bounded(square, g, 1, (1,))
    assert corner.verdict == "balanced"
    assert corner.min_slack == 0
    assert len(corner.path) == 3
    center = balanced_check_bounded(square, g, 1, (9,))
    assert center.verdict == "vacuous"
    assert center.balanced


def test_short_budget_cannot_certify_a_balanced_cell():
    square = SelfSimilarFamily("square-full", 3)

    def phi(u):
        return F(1) if len(u) <= 1 else F(3, 10)

    unbounded = balanced_check_bounded(square, phi, 1, (1,))
    assert unbounded.verdict == "violated"
    assert unbounded.min_slack == F(-1, 10)
    short = balanced_check_bounded(square, phi, 1, (1,), max_path_len=2)
    assert short.verdict == "inconclusive"
    assert not short.balanced
    enough = balanced_check_bounded(square, phi, 1, (1,), max_path_len=3)
    assert enough.verdict == "violated"
    assert len(enough.path) == 3


def test_budgeted_balanced_verdict_is_certified(square):
    verdict = balanced_check_bounded(square, weights.geometric(F(1, 3)), 1, (1,), max_path_len=2)
    assert verdict.verdict == "balanced"
    assert verdict.min_slack == 0
    assert verdict.max_path_len == 2


def test_local_problem_boundaries():
    interval = SelfSimilarFamily("interval-binary", 5)
    problem = local_problem(CellSystem(1), interval, (0, 1, 1), 1, 0, 1)
    assert len(problem.U1) == 2
    assert len(problem.U2) == 2
    assert problem.region_size == 6
    assert not problem.U1 & problem.U2
    with pytest.raises(InvalidProblem):
        local_problem(CellSystem(1), interval, (0, 1, 1), 1, 1, 1)
