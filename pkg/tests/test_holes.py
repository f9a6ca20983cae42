# tests/test_holes.py

import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from fractal.geometry import Box
from fractal.holes import (
    accumulating_strips,
    cantor_strips,
    corner_squares,
    distortion,
    framed_squares,
    generated_family,
    sq4_classify,
    splits_in_two,
    ternary_address,
    ternary_box,
)
from fractal.partition import SelfSimilarFamily
from utils.errors import DegenerateRectangle, UnsupportedFamily

UNIT = Box((F(0), F(0)), (F(1), F(1)))


def test_distortion_ignores_sides_on_the_boundary():
    assert distortion(Box.from_bounds((F(1, 3), F(2, 3)), (0, 1))) == 3
    assert distortion(Box.from_bounds((0, F(1, 3)), (F(1, 3), F(2, 3)))) == 1
    assert distortion(Box.from_bounds((F(1, 3), F(2, 3)), (F(4, 9), F(5, 9)))) == 3


def test_distortion_of_a_segment_is_refused():
    with pytest.raises(DegenerateRectangle):
        distortion(Box.from_bounds((F(1, 3), F(1, 3)), (F(1, 3), F(2, 3))))


def test_full_height_strip_splits_the_square():
    assert splits_in_two(UNIT, Box.from_bounds((F(1, 3), F(2, 3)), (0, 1)))
    assert not splits_in_two(UNIT, Box.from_bounds((F(1, 3), F(2, 3)), (F(1, 3), F(2, 3))))


def test_ternary_boxes_and_addresses_agree():
    for ix in range(9):
        for iy in range(9):
            w = ternary_address(2, ix, iy)
            assert ternary_box(w).lo == (F(ix, 9), F(iy, 9))


def test_generators():
    assert [b.lo[0] for b in cantor_strips(2)] == [F(1, 9), F(1, 3), F(7, 9)]
    assert accumulating_strips(2)[1].sides == (F(2, 81), F(1))
    assert len(framed_squares(2)) == 5
    assert [b.sides[0] for b in corner_squares(2)] == [F(1, 9), F(1, 81)]


def test_accumulating_strips_escape_both_classes():
    family = generated_family("accumulating_strips", 4, levels=2)
    verdicts = sq4_classify(family, 10)
    assert [v.verdict for v in verdicts] == ["R0", "neither"]
    assert verdicts[0].kappa_rect == F(9, 2)
    # the best splitting cell is a third of the strip's height
    assert verdicts[1].witness_kappa == F(27, 2)


def test_cantor_strips_are_split_by_first_level_cells():
    family = generated_family("cantor_strips", 2)
    verdicts = sq4_classify(family, 3)
    assert [v.verdict for v in verdicts] == ["R1", "R0", "R1"]
    assert all(v.in_r1 for v in verdicts)
    assert verdicts[0].witness_kappa == 3


def test_cantor_strips_all_split_at_distortion_three():
    verdicts = sq4_classify(generated_family("cantor_strips", 4), 3)
    assert len(verdicts) == 15
    assert all(v.in_r1 for v in verdicts)
    assert {v.witness_kappa for v in verdicts} == {3}


def test_accumulating_strips_leave_both_classes_for_good():
    verdicts = sq4_classify(generated_family("accumulating_strips", 4), 10)
    assert [v.verdict for v in verdicts] == ["R0", "neither", "neither"]
    assert [v.kappa_rect for v in verdicts] == [F(9, 2), F(81, 2), F(729, 2)]
    assert verdicts[2].witness_kappa == F(81, 2)


def test_framed_squares_are_undistorted():
    verdicts = sq4_classify(generated_family("framed_squares", 4), 1)
    assert verdicts
    assert all(v.verdict == "R0" and v.kappa_rect == 1 for v in verdicts)


def test_cantor_strips_family_is_minimal():
    assert generated_family("cantor_strips", 2).minimality_check(2).all_minimal


@pytest.mark.slow
@pytest.mark.parametrize("generator", ["cantor_strips", "accumulating_strips", "framed_squares"])
def test_hole_families_are_minimal_after_pruning(generator):
    family = generated_family(generator, 4).minimize(4)
    assert family.minimality_check(4).all_minimal


def test_classification_needs_a_holes_family():
    with pytest.raises(UnsupportedFamily):
        sq4_classify(SelfSimilarFamily("square-full", 2), 3)


def test_unknown_generator():
    with pytest.raises(ValueError):
        generated_family("spiral", 3)
