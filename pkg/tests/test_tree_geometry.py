# tests/test_tree_geometry.py

import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from fractal.geometry import Box, arrangement_points, dist_sq, parse_fraction, parse_point
from fractal.tree import (
    ROOT,
    TreeShape,
    ancestors,
    confluence,
    end_metric,
    format_address,
    parse_address,
)
from utils.errors import DepthExceeded


def binary(depth):
    return TreeShape(alphabet=lambda w: [0, 1], max_depth=depth)


def test_confluence_and_ancestors():
    assert confluence((1, 2, 3), (1, 2, 5)) == (1, 2)
    assert confluence((1,), (2,)) == ROOT
    assert ancestors((4, 7)) == [(), (4,), (4, 7)]


def test_address_text_round_trip():
    assert format_address((1, 2, 3)) == "1.2.3"
    assert parse_address("1.2.3") == (1, 2, 3)
    assert parse_address("") == ROOT
    assert parse_address("root") == ROOT


def test_tree_levels_are_lexicographic():
    tree = binary(3)
    assert list(tree.level(2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(tree.descendants((1,), 2)) == 4
    assert tree.is_valid((0, 1, 1))
    assert not tree.is_valid((0, 2))


def test_tree_refuses_to_grow_past_the_cap():
    tree = binary(2)
    with pytest.raises(DepthExceeded):
        tree.children((0, 1))
    with pytest.raises(DepthExceeded):
        list(tree.level(3))


def test_end_metric():
    assert end_metric((0, 1), (0, 0)) == F(1, 2)
    assert end_metric((1, 1), (0, 0)) == 1
    assert end_metric((0, 1), (0, 1)) == 0


def test_box_measurements():
    b = Box.from_bounds((0, 1), (0, F(1, 2)))
    assert b.sides == (1, F(1, 2))
    assert b.diameter_sq() == F(5, 4)
    assert b.center() == (F(1, 2), F(1, 4))
    assert len(b.corners()) == 4


def test_box_intersection_and_contact():
    a = Box.from_bounds((0, F(1, 3)), (0, F(1, 3)))
    b = Box.from_bounds((F(1, 3), F(2, 3)), (F(1, 3), F(2, 3)))
    c = Box.from_bounds((F(2, 3), 1), (0, 1))
    corner = a.intersection(b)
    assert corner is not None and corner.degenerate_axes() == 2
    assert a.meets(b)
    assert a.intersection(c) is None
    assert a.gap((F(2, 3), F(1, 6))) == F(1, 3)


def test_arrangement_points_cover_every_face():
    region = Box.from_bounds((0, 1))
    points = list(arrangement_points(region, [Box.from_bounds((F(1, 3), F(2, 3)))]))
    # 4 vertices and 3 open intervals
    assert len(points) == 7
    assert (F(1, 2),) in points


def test_parse_point_forms():
    assert parse_point("(1/3,0)") == (F(1, 3), F(0))
    assert parse_point("1/3 1/4") == (F(1, 3), F(1, 4))
    assert parse_point(["1/2"]) == (F(1, 2),)
    assert dist_sq((F(0), F(0)), (F(1, 2), F(1, 2))) == F(1, 2)


def test_floats_are_rejected():
    with pytest.raises(ValueError):
        parse_fraction(0.5)
