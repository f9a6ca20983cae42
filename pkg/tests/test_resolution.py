# tests/test_resolution.py

import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from fractal import weight as weights
from fractal.partition import SelfSimilarFamily
from resolution.graph import (
    bridge_distance,
    build_resolution,
    format_vertex,
    graph_distance,
    gromov_eta,
    gromov_product,
    horizontally_minimal_scan,
    rearranged_resolution,
    root_geodesics_vertical,
)


@pytest.fixture
def interval_graph():
    return build_resolution(SelfSimilarFamily("interval-binary", 2), 2)


def test_carpet_first_level():
    G = build_resolution(SelfSimilarFamily("sierpinski-carpet", 2), 1)
    # 8 side contacts around the hole and 4 corner contacts across it
    assert len(G.horizontal_edges(1)) == 12
    assert len(G.vertical_edges()) == 8
    assert len(G.vertices(1)) == 8


def test_full_square_first_level_is_the_king_graph():
    G = build_resolution(SelfSimilarFamily("square-full", 2), 1)
    assert len(G.horizontal_edges(1)) == 20


def test_distances_and_gromov_products(interval_graph):
    G = interval_graph
    assert graph_distance(G, (0, 0), (1, 1)) == 3
    assert graph_distance(G, (), (1, 1)) == 2
    assert gromov_product(G, (0,), (1,)) == F(1, 2)
    assert bridge_distance(G, (0, 0), (1, 1)) == 3


def test_vertical_geodesics_from_the_root(interval_graph):
    assert root_geodesics_vertical(interval_graph) == []
    carpet = build_resolution(SelfSimilarFamily("sierpinski-carpet", 2), 2)
    assert root_geodesics_vertical(carpet) == []


def test_horizontal_scan_on_the_interval(interval_graph):
    scan = horizontally_minimal_scan(interval_graph)
    assert scan.per_level == {1: 1, 2: 3}
    assert scan.max_bound == 3
    assert not scan.truncated


def test_scan_flags_a_cutoff_hit(interval_graph):
    assert horizontally_minimal_scan(interval_graph, cutoff=1).truncated


def test_gromov_estimate_is_reproducible():
    G = build_resolution(SelfSimilarFamily("sierpinski-carpet", 2), 2)
    first = gromov_eta(G, samples=40, seed=3)
    again = gromov_eta(G, samples=40, seed=3)
    assert first.eta == again.eta
    assert first.eta >= 0
    assert first.samples == 40


def test_rearranged_resolution_of_the_natural_weight():
    interval = SelfSimilarFamily("interval-binary", 3)
    R = rearranged_resolution(interval, weights.geometric(F(1, 2)), F(1, 2), 2)
    assert R.rearranged
    assert R.vertices(2) == [(2, (0, 0)), (2, (0, 1)), (2, (1, 0)), (2, (1, 1))]
    assert R.up((2, (1, 0))) == (1, (1,))


def test_edge_lines(interval_graph):
    lines = interval_graph.edge_lines()
    assert "0: 1:0 v" in lines
    assert "1:0 1:1 h" in lines
    assert format_vertex((2, (1, 0))) == "2:1.0"


def test_full_level_scan_agrees_with_the_cutoff(interval_graph):
    full = horizontally_minimal_scan(interval_graph, cutoff=None)
    assert full.per_level == {1: 1, 2: 3}
    assert not full.truncated


def test_carpet_scan_is_certified_at_the_default_cutoff():
    G = build_resolution(SelfSimilarFamily("sierpinski-carpet", 3), 3)
    bounded = horizontally_minimal_scan(G)
    full = horizontally_minimal_scan(G, cutoff=None)
    assert not bounded.truncated
    assert bounded.per_level == full.per_level
    assert bounded.max_bound == full.max_bound


@pytest.mark.slow
def test_carpet_scan_stabilizes_across_levels():
    G = build_resolution(SelfSimilarFamily("sierpinski-carpet", 5), 5)
    scan = horizontally_minimal_scan(G)
    assert not scan.truncated
    assert scan.per_level[3] == scan.per_level[4] == scan.per_level[5]
    assert scan.max_bound == max(scan.per_level.values())
