# metric/visual_metric.py

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from fractal.geometry import Point, dist_sq, format_point, to_point
from fractal.partition import PartitionFamily, PointRef
from fractal.tree import ROOT, Address, format_address
from fractal.weight import (
    Exact,
    ScaleSet,
    WeightFunction,
    candidate_scales,
    cell_diameter_sq,
    grows_without_bound,
    horizon_floor,
    level_scales,
)
from utils.errors import PointOutsideSpace, Unresolved, UnsupportedWeight

logger = logging.getLogger("confdim.metric")

PointLike = Union[PointRef, Point, Sequence]


def _coords(family: PartitionFamily, x: PointLike) -> Point:
    p = x.coordinates if isinstance(x, PointRef) else to_point(x)
    if not family.in_space(p):
        raise PointOutsideSpace(f"{format_point(p)} is not in X")
    return p


def _require_rational(g: WeightFunction):
    if not g.rational:
        raise UnsupportedWeight(f"visual pre-metrics need a rational weight, got {g.describe()}")


@dataclass
class ChainWitness:
    cells: List[Address]
    value: Fraction
    x: Point
    y: Point

    def describe(self) -> str:
        return " -> ".join(format_address(w) or "root" for w in self.cells)


@dataclass
class Neighborhood:
    """Λ_{s,M}(x) and its union U_M^g(x,s)."""
    x: Point
    s: Fraction
    M: int
    cells: List[Address]

    def covers(self, family: PartitionFamily, y: PointLike) -> bool:
        p = y.coordinates if isinstance(y, PointRef) else to_point(y)
        return any(family.contains(w, p) for w in self.cells)


@lru_cache(maxsize=64)
def _scale(g: WeightFunction, family: PartitionFamily, s: Fraction) -> ScaleSet:
    return ScaleSet(s, g, family)


def neighborhood(g: WeightFunction, family: PartitionFamily, x: PointLike, s, M: int) -> Neighborhood:
    x = _coords(family, x)
    s = min(Fraction(s), Fraction(1))
    lam = _scale(g, family, s)
    reached = nx.multi_source_dijkstra_path_length(lam.graph, set(lam.containing(x)), cutoff=M)
    return Neighborhood(x=x, s=s, M=M, cells=sorted(reached))


def _chain_in_scale(lam: ScaleSet, x: Point, y: Point, M: int) -> Optional[List[Address]]:
    """Shortest chain of at most M+1 cells of lam from x to y."""
    hops, paths = nx.multi_source_dijkstra(lam.graph, set(lam.containing(x)), cutoff=M)
    ends = [u for u in lam.containing(y) if u in hops]
    if not ends:
        return None
    return paths[min(ends, key=lambda u: (hops[u], u))]


@dataclass
class DeltaResult:
    value: Fraction
    chain: ChainWitness
    candidates: int = 0


def delta(g: WeightFunction, family: PartitionFamily, x: PointLike, y: PointLike, M: int) -> DeltaResult:
    """δ_M^g(x,y): the least scale s with a chain of at most M+1 cells of Λ_s^g joining x and y."""
    _require_rational(g)
    x, y = _coords(family, x), _coords(family, y)
    if x == y:
        return DeltaResult(value=Fraction(0), chain=ChainWitness([], Fraction(0), x, y))
    floor = horizon_floor(g, family)
    scales = [c for c in candidate_scales(g, family) if c >= floor]

    def feasible(s: Fraction) -> Optional[List[Address]]:
        return _chain_in_scale(_scale(g, family, s), x, y, M)

    if feasible(scales[0]) is not None:
        raise Unresolved(f"{format_point(x)} and {format_point(y)} are not separated within max_depth "
                         f"{family.max_depth} (M={M})")
    lo, hi = 0, len(scales) - 1
    best = feasible(scales[hi])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        chain = feasible(scales[mid])
        if chain is None:
            lo = mid
        else:
            hi, best = mid, chain
    return DeltaResult(value=scales[hi], chain=ChainWitness(best, scales[hi], x, y), candidates=len(scales))


class _Touching:
    """Cells of any level meeting a given cell, excluding its ancestors and descendants."""

    def __init__(self, family: PartitionFamily):
        self.family = family
        self._cache: Dict[Tuple[Address, int], List[Address]] = {}

    def __call__(self, u: Address, max_level: int) -> List[Address]:
        key = (u, max_level)
        if key not in self._cache:
            fam, region = self.family, self.family.box(u)
            found, stack = [], [ROOT]
            while stack:
                c = stack.pop()
                if not fam.box(c).meets(region):
                    continue
                related = c == u[:len(c)]
                if not related and fam.intersects(c, u):
                    found.append(c)
                if c != u and len(c) < max_level and len(c) < fam.max_depth:
                    stack.extend(fam.children(c))
            self._cache[key] = sorted(found)
        return self._cache[key]


def _cells_containing(family: PartitionFamily, x: Point, max_level: int) -> List[Address]:
    found, stack = [], [ROOT]
    while stack:
        c = stack.pop()
        if not family.contains(c, x):
            continue
        found.append(c)
        if len(c) < max_level and len(c) < family.max_depth:
            stack.extend(family.children(c))
    return found


_SOURCE = "source"


def _chain_graph(g: WeightFunction, family: PartitionFamily, x: Point, y: Point,
                 max_cells: Optional[int], budget: Optional[Fraction], max_level: int,
                 side: Optional[Fraction]) -> nx.DiGraph:
    """States (cell, cells used) reachable from x, each edge weighted by the cost of its target.

    A state is kept only while it can still reach y: the Chebyshev gap of the cell to y is at
    most (cells left) * side.
    """
    touching = _Touching(family)
    counted = max_cells is not None

    def admissible(c: Address, used: int) -> bool:
        if budget is not None and g.exact(c) > budget:
            return False
        return not counted or side is None or family.box(c).gap(y) <= (max_cells - used) * side

    graph = nx.DiGraph()
    graph.add_node(_SOURCE)
    pending = []
    for c in _cells_containing(family, x, max_level):
        if admissible(c, 1):
            state = (c, 1 if counted else 0)
            graph.add_edge(_SOURCE, state, weight=g.exact(c))
            pending.append(state)
    expanded = set()
    while pending:
        state = pending.pop()
        if state in expanded:
            continue
        expanded.add(state)
        u, used = state
        if counted and used >= max_cells:
            continue
        for v in touching(u, max_level):
            if admissible(v, used + 1):
                target = (v, used + 1 if counted else 0)
                graph.add_edge(state, target, weight=g.exact(v))
                pending.append(target)
    return graph


def _best_chain(g: WeightFunction, family: PartitionFamily, x: Point, y: Point,
                max_cells: Optional[int], budget: Optional[Fraction], max_level: int,
                side: Optional[Fraction] = None) -> Optional[Tuple[Fraction, List[Address]]]:
    """Node-weighted cheapest chain from x to y, total weight at most budget."""
    graph = _chain_graph(g, family, x, y, max_cells, budget, max_level, side)
    cost, paths = nx.single_source_dijkstra(graph, _SOURCE, cutoff=budget)
    ends = [state for state in cost if state != _SOURCE and family.contains(state[0], y)]
    if not ends:
        return None
    end = min(ends, key=lambda state: (cost[state], len(paths[state]), state))
    return cost[end], [c for c, _ in paths[end][1:]]


@dataclass
class ChainResult:
    value: Fraction
    chain: ChainWitness
    depth_cap: Optional[int] = None


def chain_distance(g: WeightFunction, family: PartitionFamily, x: PointLike, y: PointLike, M: int) -> ChainResult:
    """D_M^g(x,y): least total weight of a chain of at most M+1 cells (any levels) from x to y."""
    _require_rational(g)
    x, y = _coords(family, x), _coords(family, y)
    if x == y:
        deepest = max(_cells_containing(family, x, family.max_depth), key=len)
        return ChainResult(value=Fraction(0), chain=ChainWitness([deepest], Fraction(0), x, y))
    budget = (M + 1) * delta(g, family, x, y, M).value
    coarse = _scale(g, family, min(budget, Fraction(1)))
    side = max(max(family.box(w).sides) for w in coarse.members)
    found = _best_chain(g, family, x, y, M + 1, budget, family.max_depth, side)
    if found is None:
        raise Unresolved(f"no chain of {M + 1} cells joins {format_point(x)} and {format_point(y)}")
    value, cells = found
    return ChainResult(value=value, chain=ChainWitness(cells, value, x, y))


def chain_metric(g: WeightFunction, family: PartitionFamily, x: PointLike, y: PointLike,
                 depth_cap: int) -> ChainResult:
    """Upper bound on D^g(x,y): chains of any length through cells of depth at most depth_cap."""
    _require_rational(g)
    x, y = _coords(family, x), _coords(family, y)
    cap = min(depth_cap, family.max_depth)
    if x == y:
        return ChainResult(value=Fraction(0), chain=ChainWitness([], Fraction(0), x, y), depth_cap=cap)
    found = _best_chain(g, family, x, y, None, None, cap)
    if found is None:
        raise Unresolved(f"no chain joins {format_point(x)} and {format_point(y)} above depth {cap}")
    value, cells = found
    return ChainResult(value=value, chain=ChainWitness(cells, value, x, y), depth_cap=cap)


# -- adaptedness -----------------------------------------------------------------------------
def sample_pairs(family: PartitionFamily, count: int, seed: int, level: int) -> List[Tuple[Point, Point]]:
    """Distinct pairs of cell corners at the given level that lie in X."""
    rng = np.random.default_rng(seed)
    cells = family.level_cells(level)
    pairs, seen, attempts = [], set(), 0
    while len(pairs) < count and attempts < 50 * count:
        attempts += 1
        i, j = rng.integers(len(cells), size=2)
        a = family.box(cells[i]).corners()
        b = family.box(cells[j]).corners()
        x, y = a[rng.integers(len(a))], b[rng.integers(len(b))]
        if x == y or (x, y) in seen or (y, x) in seen:
            continue
        if family.in_space(x) and family.in_space(y):
            seen.add((x, y))
            pairs.append((x, y))
    return pairs


@dataclass
class PairRecord:
    x: Point
    y: Point
    delta: Fraction
    distance: Exact
    ratio: Exact


@dataclass
class AdaptednessReport:
    M: int
    c_ada: Exact
    c_adb: Optional[Exact]
    satisfied: bool
    diameter: Exact
    trace: List[Tuple[Fraction, Exact]] = field(default_factory=list)
    pairs: List[PairRecord] = field(default_factory=list)


def adaptedness_report(g: WeightFunction, family: PartitionFamily, M: int,
                       pairs: Iterable[Tuple[PointLike, PointLike]], depth: int) -> AdaptednessReport:
    """(ADa) and (ADb)_M constants for the Euclidean metric normalized to diam(X) = 1."""
    _require_rational(g)
    diam_sq = cell_diameter_sq(family, ROOT)
    c_ada = max(Exact(cell_diameter_sq(family, w) / diam_sq / g.squared(w))
                for m in range(depth + 1) for w in family.level_cells(m))
    records = []
    for x, y in pairs:
        x, y = _coords(family, x), _coords(family, y)
        if x == y:
            continue
        d = delta(g, family, x, y, M).value
        dist = dist_sq(x, y) / diam_sq
        records.append(PairRecord(x=x, y=y, delta=d, distance=Exact(dist), ratio=Exact(d * d / dist)))
    by_scale: Dict[Fraction, Exact] = {}
    for r in records:
        by_scale[r.delta] = max(by_scale.get(r.delta, r.ratio), r.ratio)
    trace = sorted(by_scale.items(), key=lambda t: t[0], reverse=True)
    unbounded = grows_without_bound([float(v) for _, v in trace])
    if unbounded:
        logger.warning("(ADb)_%d ratio grows as the scale shrinks: %s", M,
                       ", ".join(f"{s}:{float(v):.6g}" for s, v in trace))
    return AdaptednessReport(
        M=M,
        c_ada=c_ada,
        c_adb=max((r.ratio for r in records), default=None),
        satisfied=not unbounded,
        diameter=Exact(diam_sq),
        trace=trace,
        pairs=records,
    )


# -- separation ------------------------------------------------------------------------------
@dataclass
class SeparationWitness:
    s: Fraction
    w: Address
    v: Address
    gamma: Optional[Fraction]


@dataclass
class SeparationReport:
    M: int
    witnesses: List[SeparationWitness]
    trace: List[Tuple[Fraction, Optional[Fraction]]]
    violated: bool


def _intermediates(lam: ScaleSet, w: Address, v: Address, limit: int) -> int:
    """Least k with a chain (w, u_1..u_k, v), u_i in lam; limit + 1 when k exceeds limit."""
    fam = lam.family
    if fam.intersects(w, v):
        return 0
    sources = set(lam._descend(lambda u: fam.intersects(u, w)))
    hops = nx.multi_source_dijkstra_path_length(lam.graph, sources, cutoff=limit - 1)
    reached = [hops[u] + 1 for u in lam._descend(lambda u: fam.intersects(u, v)) if u in hops]
    return min(reached, default=limit + 1)


def separation_witnesses(g: WeightFunction, family: PartitionFamily, M: int, depth: int,
                         max_pairs: int = 20) -> SeparationReport:
    """Pairs exactly M-separated in Λ_s and the scale ratio γ at which they become (M+1)-separated.

    A shrinking γ along the scales is evidence against the existence of an M-adapted metric.
    """
    _require_rational(g)
    floor = horizon_floor(g, family)
    candidates = [c for c in candidate_scales(g, family) if c >= floor]
    witnesses, trace = [], []
    unresolved_any = False
    for s in level_scales(g, family, depth):
        lam = _scale(g, family, s)
        finer = sorted((t for t in candidates if t < s), reverse=True)
        pairs = []
        for w in lam.members:
            hops = nx.single_source_shortest_path_length(lam.graph, w, cutoff=M + 1)
            pairs.extend((w, v) for v, dv in hops.items() if dv == M + 1 and w < v)
        worst: Optional[Fraction] = None
        unresolved = False
        for w, v in pairs[:max_pairs]:
            gamma = None
            for t in finer:
                if _intermediates(_scale(g, family, t), w, v, M) > M:
                    gamma = t / s
                    break
            witnesses.append(SeparationWitness(s=s, w=w, v=v, gamma=gamma))
            if gamma is None:
                unresolved = True
            elif worst is None or gamma < worst:
                worst = gamma
        unresolved_any = unresolved_any or unresolved
        trace.append((s, worst))
    inverse = [float(1 / gm) for _, gm in trace if gm is not None]
    violated = unresolved_any or grows_without_bound(inverse)
    return SeparationReport(M=M, witnesses=witnesses, trace=trace, violated=violated)
