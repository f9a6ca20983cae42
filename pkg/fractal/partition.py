# fractal/partition.py

import copy
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from utils.errors import DepthExceeded, HoleLayoutError, InvalidAddress, PointOutsideSpace
from .geometry import Box, Point, arrangement_points, format_point, to_point
from .tree import ROOT, Address, TreeShape, format_address, parent

logger = logging.getLogger("confdim.partition")

# Offsets (in units of the child side) of the nine sub-squares, counter-clockwise from the
# lower-left corner, center last.
SQUARE_OFFSETS: Dict[int, Tuple[int, int]] = {
    1: (0, 0), 2: (1, 0), 3: (2, 0), 4: (2, 1), 5: (2, 2),
    6: (1, 2), 7: (0, 2), 8: (0, 1), 9: (1, 1),
}

FAMILY_KINDS = (
    "interval-binary", "cantor-ternary", "square-full", "sierpinski-carpet",
    "square-with-holes", "dyadic-cubes", "box-table",
)


@dataclass(frozen=True)
class CellGeometry:
    """Exact description of K_w.

    K_w is box ∩ X. holes lists the removed rectangles meeting box (their interiors relative
    to the ambient cube are excluded), points the cloud points for point-cloud families.
    """
    address: Address
    box: Box
    holes: Tuple[Box, ...] = ()
    points: Optional[Tuple[Point, ...]] = None


@dataclass
class PointRef:
    coordinates: Point
    addresses: Dict[int, List[Address]] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return max(self.addresses) if self.addresses else 0

    def at(self, m: int) -> List[Address]:
        return self.addresses[m]

    def all_addresses(self) -> List[Address]:
        return [w for m in sorted(self.addresses) for w in self.addresses[m]]


@dataclass
class MinimalityResult:
    depth: int
    all_minimal: bool
    violating: List[Address]


@dataclass
class PartitionCheck:
    depth: int
    holds: bool
    violating: List[Address]


class PartitionFamily(ABC):
    """A partition w -> K_w of a compact X inside [0,1]^n, truncated at max_depth."""

    kind: str = ""
    contraction: Optional[Fraction] = None
    symmetric: bool = False
    strong_finiteness: Optional[int] = None
    boundary_in_space: bool = False

    def __init__(self, max_depth: int, dim: int):
        if max_depth < 0:
            raise ValueError("max_depth must be nonnegative")
        self.max_depth = max_depth
        self.dim = dim
        self.pruned: FrozenSet[Address] = frozenset()
        self._reset_caches()

    def _reset_caches(self):
        self._valid: Dict[Address, bool] = {ROOT: True}
        self._levels: Dict[int, List[Address]] = {}
        self._neighbors: Dict[Address, List[Address]] = {}
        self._boxes: Dict[Address, Box] = {}
        self._digits: Dict[Address, List[int]] = {}
        self._level_graphs: Dict[int, nx.Graph] = {}

    # -- structure -----------------------------------------------------------------------
    @abstractmethod
    def _candidate_digits(self, w: Address) -> Sequence[int]:
        """Digits of the children of w before geometric pruning."""

    @abstractmethod
    def _compute_box(self, w: Address) -> Box:
        """Ambient box Q_w of an address (valid or not)."""

    @abstractmethod
    def in_space(self, x: Point) -> bool:
        """Exact membership x ∈ X at the truncation horizon."""

    def _child_is_cell(self, w: Address) -> bool:
        """Geometric validity of a child address (parent already valid)."""
        return True

    def child_digits(self, w: Address) -> List[int]:
        w = tuple(w)
        if len(w) >= self.max_depth:
            return []
        if w not in self._digits:
            self._digits[w] = [d for d in self._candidate_digits(w)
                               if w + (d,) not in self.pruned and self._child_is_cell(w + (d,))]
        return self._digits[w]

    @property
    def tree(self) -> TreeShape:
        return TreeShape(alphabet=self.child_digits, max_depth=self.max_depth)

    def is_valid(self, w: Address) -> bool:
        w = tuple(w)
        if w in self._valid:
            return self._valid[w]
        if len(w) > self.max_depth:
            return False
        ok = self.is_valid(parent(w)) and w[-1] in self.child_digits(parent(w))
        self._valid[w] = ok
        return ok

    def require(self, w: Address) -> Address:
        w = tuple(w)
        if not self.is_valid(w):
            raise InvalidAddress(f"address {format_address(w) or 'root'} is not a cell of {self.kind}")
        return w

    def children(self, w: Address) -> List[Address]:
        w = self.require(w)
        if len(w) >= self.max_depth:
            raise DepthExceeded(f"address {format_address(w) or 'root'} is at max_depth {self.max_depth}")
        return [w + (d,) for d in self.child_digits(w)]

    def level_cells(self, m: int) -> List[Address]:
        if m > self.max_depth:
            raise DepthExceeded(f"level {m} beyond max_depth {self.max_depth}")
        if m not in self._levels:
            if m == 0:
                cells = [ROOT]
            else:
                cells = [c for w in self.level_cells(m - 1) for c in self.children(w)]
            self._levels[m] = cells
        return self._levels[m]

    def descendants(self, w: Address, k: int) -> List[Address]:
        w = self.require(w)
        if len(w) + k > self.max_depth:
            raise DepthExceeded(f"S^{k}({format_address(w) or 'root'}) exceeds max_depth {self.max_depth}")
        frontier = [w]
        for _ in range(k):
            frontier = [c for u in frontier for c in self.children(u)]
        return frontier

    # -- geometry ------------------------------------------------------------------------
    def box(self, w: Address) -> Box:
        w = self.require(w)
        if w not in self._boxes:
            self._boxes[w] = self._compute_box(w)
        return self._boxes[w]

    def space_box(self) -> Box:
        return Box(tuple(Fraction(0) for _ in range(self.dim)), tuple(Fraction(1) for _ in range(self.dim)))

    def _cut_boxes(self, region: Box) -> List[Box]:
        """Boxes whose faces cut X inside region (holes of the space)."""
        return []

    def cell(self, w: Address) -> CellGeometry:
        b = self.box(w)
        return CellGeometry(address=tuple(w), box=b, holes=tuple(self._cut_boxes(b)))

    def contains(self, w: Address, x: Point) -> bool:
        return self.box(w).contains_point(x) and self.in_space(x)

    def meets_space(self, region: Box) -> bool:
        return any(self.in_space(p) for p in arrangement_points(region, self._cut_boxes(region)))

    def intersects(self, w: Address, v: Address) -> bool:
        """Exact test K_w ∩ K_v ≠ ∅."""
        region = self.box(w).intersection(self.box(v))
        if region is None:
            return False
        if self.boundary_in_space:
            return True
        return self.meets_space(region)

    def neighbors(self, w: Address) -> List[Address]:
        """Same-level cells v ≠ w with K_v ∩ K_w ≠ ∅, in address order."""
        w = self.require(w)
        if w in self._neighbors:
            return self._neighbors[w]
        if w == ROOT:
            result: List[Address] = []
        else:
            up = parent(w)
            pool = [up] + self.neighbors(up)
            result = sorted(c for u in pool for c in self.children(u)
                            if c != w and self.intersects(w, c))
        self._neighbors[w] = result
        return result

    def level_graph(self, m: int) -> nx.Graph:
        """Cells of level m, joined when they meet."""
        if m not in self._level_graphs:
            graph = nx.Graph()
            for w in self.level_cells(m):
                graph.add_node(w)
                graph.add_edges_from((w, v) for v in self.neighbors(w))
            self._level_graphs[m] = graph
        return self._level_graphs[m]

    def point_addresses(self, x, depth: Optional[int] = None) -> PointRef:
        x = to_point(x)
        depth = self.max_depth if depth is None else depth
        if depth > self.max_depth:
            raise DepthExceeded(f"depth {depth} beyond max_depth {self.max_depth}")
        if not self.in_space(x):
            raise PointOutsideSpace(f"{format_point(x)} is not in X")
        ref = PointRef(coordinates=x, addresses={0: [ROOT]})
        frontier = [ROOT]
        for m in range(1, depth + 1):
            frontier = [c for w in frontier for c in self.children(w) if self.box(c).contains_point(x)]
            ref.addresses[m] = frontier
        return ref

    # -- minimality ----------------------------------------------------------------------
    def _candidate_points(self, w: Address, others: Iterable[Address]) -> Iterable[Point]:
        b = self.box(w)
        cuts = [self.box(o) for o in others] + self._cut_boxes(b)
        if len(w) < self.max_depth:
            cuts += [self.box(c) for c in self.children(w)]
        return arrangement_points(b, cuts)

    def interior_witness(self, w: Address) -> Optional[Point]:
        """A point of O_w = K_w minus the other same-level cells, or None."""
        others = self.neighbors(w)
        for p in self._candidate_points(w, others):
            if self.contains(w, p) and not any(self.contains(v, p) for v in others):
                return p
        return None

    def minimality_check(self, depth: int) -> MinimalityResult:
        if depth > self.max_depth:
            raise DepthExceeded(f"depth {depth} beyond max_depth {self.max_depth}")
        violating = [w for m in range(depth + 1) for w in self.level_cells(m)
                     if self.interior_witness(w) is None]
        return MinimalityResult(depth=depth, all_minimal=not violating, violating=violating)

    def _covered_by(self, w: Address, cover: List[Address]) -> bool:
        for p in self._candidate_points(w, cover):
            if self.contains(w, p) and not any(self.contains(u, p) for u in cover):
                return False
        return True

    def minimize(self, depth: int) -> "PartitionFamily":
        """Prune subtrees of cells covered by their remaining siblings, level by level."""
        result = self
        pruned = set(self.pruned)
        for m in range(1, min(depth, self.max_depth) + 1):
            changed = True
            while changed:
                changed = False
                for w in result.level_cells(m):
                    siblings = [c for c in result.children(parent(w)) if c != w]
                    if siblings and result._covered_by(w, siblings):
                        logger.debug("pruning %s", format_address(w))
                        pruned.add(w)
                        result = result.with_pruned(pruned)
                        changed = True
                        break
        return result

    def with_pruned(self, pruned: Iterable[Address]) -> "PartitionFamily":
        clone = copy.copy(self)
        clone.pruned = frozenset(tuple(w) for w in pruned)
        clone._reset_caches()
        return clone

    def check_p1(self, depth: int) -> PartitionCheck:
        """Exact check of K_w = ∪ K_{wi} for every w above depth."""
        violating = []
        for m in range(min(depth, self.max_depth)):
            for w in self.level_cells(m):
                kids = self.children(w)
                b = self.box(w)
                if not kids or not all(b.contains_box(self.box(c)) for c in kids):
                    violating.append(w)
                    continue
                for p in self._candidate_points(w, kids):
                    if self.contains(w, p) != any(self.contains(c, p) for c in kids):
                        violating.append(w)
                        break
        return PartitionCheck(depth=depth, holds=not violating, violating=violating)

    # -- symmetry ------------------------------------------------------------------------
    def symmetry_transforms(self) -> List[Callable[[Tuple[int, ...]], Tuple[int, ...]]]:
        if not self.symmetric:
            return [lambda o: o]
        if self.dim == 1:
            return [lambda o: o, lambda o: (-o[0],)]
        maps = []
        for swap in (False, True):
            for sx in (1, -1):
                for sy in (1, -1):
                    maps.append(lambda o, swap=swap, sx=sx, sy=sy:
                                (sx * o[1], sy * o[0]) if swap else (sx * o[0], sy * o[1]))
        return maps

    def describe(self) -> str:
        return f"{self.kind}(max_depth={self.max_depth})"


class GridFamily(PartitionFamily):
    """Families whose cells are b-adic cubes: the box of w = d1...dm is fixed by digit offsets."""

    def __init__(self, max_depth: int, dim: int, base: int, offsets: Dict[int, Tuple[int, ...]]):
        self.base = base
        self.offsets = offsets
        super().__init__(max_depth, dim)

    def _candidate_digits(self, w: Address) -> Sequence[int]:
        return sorted(self.offsets)

    def grid_index(self, w: Address) -> Tuple[int, ...]:
        """Lower corner of Q_w in units of base^-|w|."""
        idx = [0] * self.dim
        for d in w:
            off = self.offsets[d]
            idx = [self.base * i + o for i, o in zip(idx, off)]
        return tuple(idx)

    def side(self, m: int) -> Fraction:
        return Fraction(1, self.base ** m)

    def _compute_box(self, w: Address) -> Box:
        s = self.side(len(w))
        idx = self.grid_index(w)
        return Box(tuple(i * s for i in idx), tuple((i + 1) * s for i in idx))


class SelfSimilarFamily(GridFamily):
    """Interval, Cantor set, full square and Sierpinski carpet.

    X at the horizon is the union of the level-max_depth cell boxes.
    """
    boundary_in_space = True
    symmetric = True

    def __init__(self, kind: str, max_depth: int):
        if kind == "interval-binary":
            dim, base, offsets, bound = 1, 2, {0: (0,), 1: (1,)}, 2
        elif kind == "cantor-ternary":
            dim, base, offsets, bound = 1, 3, {0: (0,), 1: (2,)}, 1
        elif kind == "square-full":
            dim, base, offsets, bound = 2, 3, dict(SQUARE_OFFSETS), 4
        elif kind == "sierpinski-carpet":
            dim, base = 2, 3
            offsets = {d: o for d, o in SQUARE_OFFSETS.items() if d != 9}
            bound = 4
        else:
            raise ValueError(f"not a self-similar kind: {kind}")
        self.kind = kind
        self.contraction = Fraction(1, base)
        self.strong_finiteness = bound
        self.full = kind in ("interval-binary", "square-full")
        self._point_cache: Dict[Point, bool] = {}
        super().__init__(max_depth, dim, base, offsets)

    def in_space(self, x: Point) -> bool:
        x = to_point(x)
        if not self.space_box().contains_point(x):
            return False
        if self.full:
            return True
        if x not in self._point_cache:
            frontier = [ROOT]
            for _ in range(self.max_depth):
                frontier = [c for w in frontier for c in self.children(w) if self.box(c).contains_point(x)]
                if not frontier:
                    break
            self._point_cache[x] = bool(frontier)
        return self._point_cache[x]


def relative_interior_contains(hole: Box, x: Point) -> bool:
    """x in the interior of hole relative to [0,1]^n (faces on the boundary count as interior)."""
    for lo, c, hi in zip(hole.lo, x, hole.hi):
        left = lo < c or (lo == 0 and c == 0)
        right = c < hi or (hi == 1 and c == 1)
        if not (left and right):
            return False
    return True


def _is_ternary(q: Fraction) -> bool:
    d = q.denominator
    while d % 3 == 0:
        d //= 3
    return d == 1


class SquareWithHolesFamily(GridFamily):
    """[0,1]^2 minus the relative interiors of pairwise separated rectangles R_j.

    Cells are the ternary squares Q_w whose interior meets X.
    """
    kind = "square-with-holes"
    contraction = Fraction(1, 3)
    strong_finiteness = 4

    def __init__(self, holes: Sequence[Box], max_depth: int, name: str = "custom"):
        self.holes: Tuple[Box, ...] = tuple(holes)
        self.name = name
        self._validate_holes()
        super().__init__(max_depth, 2, 3, dict(SQUARE_OFFSETS))

    def _validate_holes(self):
        unit = Box((Fraction(0), Fraction(0)), (Fraction(1), Fraction(1)))
        for j, r in enumerate(self.holes):
            if r.dim != 2:
                raise HoleLayoutError(f"rectangle {j} is not planar")
            if any(s <= 0 for s in r.sides):
                raise HoleLayoutError(f"rectangle {j} {r.describe()} is degenerate")
            if not unit.contains_box(r) or r == unit:
                raise HoleLayoutError(f"rectangle {j} {r.describe()} is not a proper subset of [0,1]^2")
            if not all(_is_ternary(c) for c in r.lo + r.hi):
                raise HoleLayoutError(f"rectangle {j} {r.describe()} is not aligned to a ternary grid")
        for i in range(len(self.holes)):
            for j in range(i + 1, len(self.holes)):
                if self.holes[i].meets(self.holes[j]):
                    raise HoleLayoutError(
                        f"(SQ2) violated: rectangles {i} {self.holes[i].describe()} and "
                        f"{j} {self.holes[j].describe()} are not disjoint")

    def _child_is_cell(self, w: Address) -> bool:
        q = self._compute_box(w)
        return not any(r.contains_box(q) for r in self.holes)

    def in_space(self, x: Point) -> bool:
        x = to_point(x)
        if not self.space_box().contains_point(x):
            return False
        return not any(relative_interior_contains(r, x) for r in self.holes)

    def _cut_boxes(self, region: Box) -> List[Box]:
        return [r for r in self.holes if r.meets(region)]

    def describe(self) -> str:
        return f"square-with-holes[{self.name}](holes={len(self.holes)}, max_depth={self.max_depth})"


class DyadicCubeFamily(GridFamily):
    """Dyadic cubes of [0,1]^n kept when their closed cube holds a point of a finite cloud."""
    kind = "dyadic-cubes"
    contraction = Fraction(1, 2)

    def __init__(self, points: Sequence[Point], max_depth: int):
        if not points:
            raise ValueError("dyadic-cubes needs a nonempty point cloud")
        pts = sorted(set(to_point(p) for p in points))
        dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError("point cloud mixes dimensions")
        unit = Box(tuple(Fraction(0) for _ in range(dim)), tuple(Fraction(1) for _ in range(dim)))
        if not all(unit.contains_point(p) for p in pts):
            raise ValueError("point cloud must lie in [0,1]^n")
        self.points: Tuple[Point, ...] = tuple(pts)
        self._cloud = frozenset(pts)
        offsets = {d: tuple((d >> k) & 1 for k in range(dim)) for d in range(2 ** dim)}
        self.strong_finiteness = 2 ** dim
        super().__init__(max_depth, dim, 2, offsets)

    def _child_is_cell(self, w: Address) -> bool:
        q = self._compute_box(w)
        return any(q.contains_point(p) for p in self.points)

    def in_space(self, x: Point) -> bool:
        return to_point(x) in self._cloud

    def cloud_in(self, region: Box) -> List[Point]:
        return [p for p in self.points if region.contains_point(p)]

    def meets_space(self, region: Box) -> bool:
        return bool(self.cloud_in(region))

    def cell(self, w: Address) -> CellGeometry:
        b = self.box(w)
        return CellGeometry(address=tuple(w), box=b, points=tuple(self.cloud_in(b)))

    def _candidate_points(self, w: Address, others: Iterable[Address]) -> Iterable[Point]:
        return self.cloud_in(self.box(w))


class BoxTableFamily(PartitionFamily):
    """Hand-built family: an explicit address -> box table; X is the root box."""
    kind = "box-table"

    def __init__(self, boxes: Dict[Address, Box]):
        if ROOT not in boxes:
            raise ValueError("box table needs a root entry")
        self.table: Dict[Address, Box] = {tuple(w): b for w, b in boxes.items()}
        for w in self.table:
            if w and parent(w) not in self.table:
                raise ValueError(f"box table entry {format_address(w)} has no parent entry")
        depth = max(len(w) for w in self.table)
        super().__init__(depth, self.table[ROOT].dim)

    def _candidate_digits(self, w: Address) -> Sequence[int]:
        return sorted(a[-1] for a in self.table if len(a) == len(w) + 1 and a[:-1] == w)

    def _compute_box(self, w: Address) -> Box:
        return self.table[w]

    def space_box(self) -> Box:
        return self.table[ROOT]

    def in_space(self, x: Point) -> bool:
        return self.table[ROOT].contains_point(to_point(x))

    def meets_space(self, region: Box) -> bool:
        return True
