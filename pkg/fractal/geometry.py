# fractal/geometry.py

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

Point = Tuple[Fraction, ...]


def to_point(coords: Iterable) -> Point:
    return tuple(Fraction(c) for c in coords)


def format_point(x: Point) -> str:
    return "(" + ",".join(str(c) for c in x) + ")"


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box with rational bounds; may be degenerate."""
    lo: Point
    hi: Point

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box bounds differ in dimension")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"empty box {self.lo} {self.hi}")

    @classmethod
    def from_bounds(cls, *bounds) -> "Box":
        """Box.from_bounds((a, b), (c, d)) for [a,b]x[c,d]."""
        return cls(to_point(b[0] for b in bounds), to_point(b[1] for b in bounds))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> Tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def diameter_sq(self) -> Fraction:
        return sum((s * s for s in self.sides), Fraction(0))

    def degenerate_axes(self) -> int:
        return sum(1 for s in self.sides if s == 0)

    def contains_point(self, x: Point) -> bool:
        return all(a <= c <= b for a, c, b in zip(self.lo, x, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def interior_contains(self, x: Point) -> bool:
        return all(a < c < b for a, c, b in zip(self.lo, x, self.hi))

    def intersection(self, other: "Box") -> Optional["Box"]:
        lo = tuple(max(a, c) for a, c in zip(self.lo, other.lo))
        hi = tuple(min(b, d) for b, d in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def meets(self, other: "Box") -> bool:
        return all(max(a, c) <= min(b, d) for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def gap(self, x: Point) -> Fraction:
        """Chebyshev distance from the box to a point."""
        best = Fraction(0)
        for a, c, b in zip(self.lo, x, self.hi):
            d = a - c if c < a else (c - b if c > b else Fraction(0))
            best = max(best, d)
        return best

    def corners(self) -> List[Point]:
        return [tuple(c) for c in product(*zip(self.lo, self.hi))]

    def center(self) -> Point:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))

    def describe(self) -> str:
        return "x".join(f"[{a},{b}]" for a, b in zip(self.lo, self.hi))


def dist_sq(x: Point, y: Point) -> Fraction:
    return sum(((a - b) ** 2 for a, b in zip(x, y)), Fraction(0))


def axis_samples(coords: Iterable[Fraction]) -> List[Fraction]:
    """Sorted coordinates plus the midpoints between consecutive ones."""
    values = sorted(set(coords))
    samples = list(values)
    samples.extend((a + b) / 2 for a, b in zip(values, values[1:]))
    return sorted(samples)


def arrangement_points(region: Box, boxes: Sequence[Box]) -> Iterator[Point]:
    """One sample point in every face of the arrangement cut out inside region.

    Faces are the products of elementary intervals/points obtained from the
    coordinates of region and of the given boxes clipped to region.
    """
    per_axis = []
    for axis in range(region.dim):
        lo, hi = region.lo[axis], region.hi[axis]
        coords = {lo, hi}
        for b in boxes:
            for c in (b.lo[axis], b.hi[axis]):
                if lo <= c <= hi:
                    coords.add(c)
        per_axis.append(axis_samples(coords))
    for x in product(*per_axis):
        yield tuple(x)


def parse_fraction(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError(f"floating point value {text!r} not accepted; use 'num/den'")
    return Fraction(str(text).strip())


def parse_point(text) -> Point:
    """Accepts '(1/3,0)', '1/3,0', '1/3 0' or a sequence."""
    if isinstance(text, (list, tuple)):
        return tuple(parse_fraction(c) for c in text)
    cleaned = str(text).strip().strip("()[]").replace(";", ",")
    parts = [p for p in cleaned.replace(" ", ",").split(",") if p]
    return tuple(parse_fraction(p) for p in parts)
