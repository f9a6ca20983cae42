# tests/test_weight.py

import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from fractal import weight as weights
from fractal.partition import SelfSimilarFamily
from fractal.weight import (
    Exact,
    ScaleSet,
    bilipschitz_constants,
    candidate_scales,
    check_weight,
    exp_constants,
    gentle_constant,
    horizon_floor,
    level_scales,
    thickness_th1_bound,
    uniformly_finite_bound,
)
from utils.errors import UnsupportedWeight


def test_geometric_weight_is_exact():
    g = weights.geometric(F(1, 3))
    assert g.exact((1, 2)) == F(1, 9)
    assert g((1, 2)) == pytest.approx(1 / 9)
    assert g.at_most((1,), F(1, 3))
    assert not g.at_most((1,), F(1, 4))


@pytest.mark.parametrize("r", [0, 1, F(3, 2)])
def test_geometric_ratio_must_lie_in_the_unit_interval(r):
    with pytest.raises(ValueError):
        weights.geometric(r)


def test_product_and_measure_weights():
    g = weights.product({0: F(1, 4), 1: F(1, 2)})
    assert g.exact((0, 1)) == F(1, 8)
    with pytest.raises(UnsupportedWeight):
        g.exact((2,))
    with pytest.raises(ValueError):
        weights.measure({0: F(1, 2), 1: F(1, 3)})
    assert weights.measure({0: F(1, 3), 1: F(2, 3)}).exact((1, 1)) == F(4, 9)


def test_metric_weight_is_stored_squared():
    square = SelfSimilarFamily("square-full", 2)
    g = weights.metric(square)
    assert not g.rational
    assert g.squared((1,)) == F(1, 9)
    assert str(g.magnitude((1,))) == "1/3"
    with pytest.raises(UnsupportedWeight):
        g.exact((1,))
    raw = weights.metric(square, normalize=False)
    assert str(raw.magnitude(())) == "sqrt(2)"


def test_table_weight_falls_back_to_the_tail_ratio():
    g = weights.table({(): 1, (0,): F(1, 2)}, tail_ratio=F(1, 2))
    assert g.exact((0, 0)) == F(1, 4)
    assert g.exact((1,)) == F(1, 2)
    assert g.exact((1, 1)) == F(1, 4)


def test_exact_values():
    assert str(Exact.of(F(1, 2))) == "1/2"
    assert str(Exact(F(2))) == "sqrt(2)"
    assert Exact(F(1, 4)) * Exact(F(4)) == Exact(F(1))


def test_scale_sets_on_the_interval():
    interval = SelfSimilarFamily("interval-binary", 3)
    g = weights.geometric(F(1, 2))
    lam = ScaleSet(F(1, 3), g, interval)
    assert lam.members == interval.level_cells(2)
    assert lam.adjacent((0, 1)) == [(0, 0), (0, 1), (1, 0)]
    assert lam.containing((F(1, 2),)) == [(0, 1), (1, 0)]
    assert (0, 1) in lam and (0,) not in lam


def test_scale_samples():
    carpet = SelfSimilarFamily("sierpinski-carpet", 3)
    g = weights.geometric(F(1, 3))
    assert level_scales(g, carpet, 2) == [F(1, 3), F(1, 9)]
    assert horizon_floor(g, carpet) == F(1, 27)
    assert candidate_scales(g, carpet) == [F(1, 27), F(1, 9), F(1, 3), F(1)]


def test_carpet_is_uniformly_finite_with_bound_eight():
    carpet = SelfSimilarFamily("sierpinski-carpet", 2)
    g = weights.geometric(F(1, 3))
    assert uniformly_finite_bound(g, carpet, [F(1, 3), F(1, 9)]) == 8


def test_exponential_constants_of_a_geometric_weight():
    interval = SelfSimilarFamily("interval-binary", 3)
    c = exp_constants(weights.geometric(F(1, 2)), interval, 3)
    assert c.lam == Exact.of(F(1, 2))
    assert c.gammas[2] == Exact.of(F(1, 4))
    assert c.sub_m == 1


def test_gentle_and_bilipschitz_comparisons():
    interval = SelfSimilarFamily("interval-binary", 4)
    g = weights.geometric(F(1, 2))
    h = weights.product({0: F(1, 4), 1: F(1, 2)})
    report = gentle_constant(g, h, interval, [F(1, 2), F(1, 4)])
    assert report.value is not None and not report.unbounded
    same = bilipschitz_constants(g, g, interval, 3)
    assert same.c1 == same.c2 == Exact(F(1))


def test_weight_conditions_hold_for_the_natural_weight():
    carpet = SelfSimilarFamily("sierpinski-carpet", 2)
    check = check_weight(weights.geometric(F(1, 3)), carpet, 2)
    assert check.holds
    assert [str(x) for x in check.level_maxima] == ["1", "1/3", "1/9"]


def test_weight_conditions_catch_a_flat_level():
    interval = SelfSimilarFamily("interval-binary", 2)
    g = weights.table({(): 1, (0,): 1, (1,): F(1, 2)})
    check = check_weight(g, interval, 1)
    assert check.g1 and check.g2
    assert not check.g3
    assert not check.holds


def test_thickness_of_the_full_square_and_the_carpet():
    assert thickness_th1_bound(SelfSimilarFamily("square-full", 2)).bound == 1
    carpet = thickness_th1_bound(SelfSimilarFamily("sierpinski-carpet", 4))
    assert not carpet.unbounded
    assert carpet.bound == 2
