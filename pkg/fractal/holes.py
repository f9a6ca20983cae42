# fractal/holes.py

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from utils.errors import DegenerateRectangle, UnsupportedFamily
from .geometry import Box
from .partition import SQUARE_OFFSETS, SquareWithHolesFamily
from .tree import Address

logger = logging.getLogger("confdim.holes")


def ternary_box(word: Address) -> Box:
    """Q_w for a word over the nine-square alphabet."""
    ix, iy = 0, 0
    for d in word:
        ox, oy = SQUARE_OFFSETS[d]
        ix, iy = 3 * ix + ox, 3 * iy + oy
    s = Fraction(1, 3 ** len(word))
    return Box((ix * s, iy * s), ((ix + 1) * s, (iy + 1) * s))


def cantor_strips(levels: int) -> List[Box]:
    """The gaps of the middle-third Cantor set times [0,1], down to the given level."""
    strips = []
    starts = [Fraction(0)]
    for n in range(1, levels + 1):
        s = Fraction(1, 3 ** n)
        strips.extend(Box((x + s, Fraction(0)), (x + 2 * s, Fraction(1))) for x in starts)
        starts = [y for x in starts for y in (x, x + 2 * s)]
    return sorted(strips, key=lambda b: b.lo)


def accumulating_strips(count: int) -> List[Box]:
    """Full-height strips [3^-j - 9^-j, 3^-j + 9^-j] x [0,1] accumulating at the left edge."""
    out = []
    for j in range(1, count + 1):
        c, h = Fraction(1, 3 ** j), Fraction(1, 9 ** j)
        out.append(Box((c - h, Fraction(0)), (c + h, Fraction(1))))
    return out


def framed_squares(levels: int) -> List[Box]:
    """A square of side 3^-m(1 - 2*3^-m) centered in each Q_{v9}, v in {1,3,5,7}^(m-1)."""
    out = []
    for m in range(1, levels + 1):
        margin = Fraction(1, 9 ** m)
        for v in product((1, 3, 5, 7), repeat=m - 1):
            q = ternary_box(tuple(v) + (9,))
            out.append(Box(tuple(a + margin for a in q.lo), tuple(b - margin for b in q.hi)))
    return out


def corner_squares(count: int) -> List[Box]:
    """R_j = Q_w with w = 1^(j-1) 9 1^j."""
    return [ternary_box((1,) * (j - 1) + (9,) + (1,) * j) for j in range(1, count + 1)]


GENERATORS: Dict[str, Callable[[int], List[Box]]] = {
    "cantor_strips": cantor_strips,
    "accumulating_strips": accumulating_strips,
    "framed_squares": framed_squares,
    "corner_squares": corner_squares,
}


def default_levels(generator: str, max_depth: int) -> int:
    if generator == "cantor_strips":
        return max_depth
    return max_depth // 2 + 1


def generated_family(generator: str, max_depth: int, levels: Optional[int] = None) -> SquareWithHolesFamily:
    if generator not in GENERATORS:
        raise ValueError(f"unknown hole layout generator {generator!r}; choose from {sorted(GENERATORS)}")
    n = default_levels(generator, max_depth) if levels is None else levels
    return SquareWithHolesFamily(GENERATORS[generator](n), max_depth, name=generator)


def holes_family(rectangles: Sequence[Box], max_depth: int) -> SquareWithHolesFamily:
    return SquareWithHolesFamily(list(rectangles), max_depth)


_DIGIT_AT = {off: d for d, off in SQUARE_OFFSETS.items()}


def ternary_address(m: int, ix: int, iy: int) -> Address:
    """Inverse of ternary_box on level m."""
    word = []
    for k in range(m - 1, -1, -1):
        p = 3 ** k
        word.append(_DIGIT_AT[((ix // p) % 3, (iy // p) % 3)])
    return tuple(word)


def distortion(rect: Box) -> Fraction:
    """Degree of distortion κ(R) of R = [a,b]x[c,d] inside [0,1]^2.

    A side ratio only counts when the short sides are away from the boundary of the square.
    """
    if rect.dim != 2:
        raise DegenerateRectangle(f"{rect.describe()} is not planar")
    (a, c), (b, d) = rect.lo, rect.hi
    if a == b or c == d:
        raise DegenerateRectangle(f"rectangle {rect.describe()} has an empty side")
    width, height = b - a, d - c
    wide = width / height if (c != 0 and d != 1) else Fraction(0)
    tall = height / width if (a != 0 and b != 1) else Fraction(0)
    return max(Fraction(1), wide, tall)


def _spans(lo: Fraction, hi: Fraction, r_lo: Fraction, r_hi: Fraction) -> bool:
    """[lo,hi] lies under the relative interior of [r_lo,r_hi] (faces on the boundary count)."""
    below = r_lo < lo or (r_lo == lo == 0)
    above = r_hi > hi or (r_hi == hi == 1)
    return below and above


def splits_in_two(q: Box, rect: Box) -> bool:
    """Q minus the relative interior of rect has exactly two connected components."""
    (x0, y0), (x1, y1) = q.lo, q.hi
    (a, c), (b, d) = rect.lo, rect.hi
    vertical = x0 < a and b < x1 and _spans(y0, y1, c, d)
    horizontal = y0 < c and d < y1 and _spans(x0, x1, a, b)
    return vertical or horizontal


@dataclass
class RectangleVerdict:
    index: int
    rectangle: Box
    kappa_rect: Fraction
    in_r0: bool
    in_r1: bool
    witness: Optional[Address] = None
    witness_kappa: Optional[Fraction] = None

    @property
    def verdict(self) -> str:
        if self.in_r0:
            return "R0"
        if self.in_r1:
            return "R1"
        return "neither"


def _split_candidates(family: SquareWithHolesFamily, rect: Box, m: int) -> Iterator[Address]:
    n = 3 ** m
    (a, c), (b, d) = rect.lo, rect.hi
    for lo, hi, vertical in ((a, b, True), (c, d, False)):
        k = math.ceil(lo * n) - 1
        if k < 0 or hi >= Fraction(k + 1, n):
            continue
        for j in range(n):
            ix, iy = (k, j) if vertical else (j, k)
            q = Box((Fraction(ix, n), Fraction(iy, n)), (Fraction(ix + 1, n), Fraction(iy + 1, n)))
            if splits_in_two(q, rect):
                w = ternary_address(m, ix, iy)
                if family.is_valid(w):
                    yield w


def sq4_classify(family: SquareWithHolesFamily, kappa, depth: Optional[int] = None) -> List[RectangleVerdict]:
    """Sort every removed rectangle into R0, R1 or neither for the given κ.

    The R1 witness is the cell with the smallest κ(Q_w ∩ R) among the splitting cells found
    up to depth, shallowest first on ties.
    """
    if not isinstance(family, SquareWithHolesFamily):
        raise UnsupportedFamily(f"sq4_classify needs a square-with-holes family, got {family.kind}")
    kappa = Fraction(kappa)
    depth = family.max_depth if depth is None else min(depth, family.max_depth)
    verdicts = []
    for j, rect in enumerate(family.holes):
        k_rect = distortion(rect)
        best: Optional[Tuple[Fraction, Address]] = None
        for m in range(depth + 1):
            for w in _split_candidates(family, rect, m):
                k_w = distortion(family.box(w).intersection(rect))
                if best is None or k_w < best[0]:
                    best = (k_w, w)
        verdicts.append(RectangleVerdict(
            index=j,
            rectangle=rect,
            kappa_rect=k_rect,
            in_r0=k_rect <= kappa,
            in_r1=best is not None and best[0] <= kappa,
            witness=best[1] if best else None,
            witness_kappa=best[0] if best else None,
        ))
        logger.debug("rectangle %d %s: kappa=%s witness=%s", j, rect.describe(), k_rect, best)
    return verdicts
