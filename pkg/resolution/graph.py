# resolution/graph.py

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

import networkx as nx
import numpy as np

from fractal.partition import PartitionFamily
from fractal.tree import ROOT, Address, format_address
from fractal.weight import ScaleSet, WeightFunction
from utils.errors import Disconnected

logger = logging.getLogger("confdim.resolution")

# (rank m, address w); for the plain resolution m = |w|.
Vertex = Tuple[int, Address]
VertexLike = Union[Vertex, Address]


def format_vertex(v: Vertex) -> str:
    m, w = v
    return f"{m}:{format_address(w)}"


class ResolutionGraph:
    """Levels 0..L of a resolution, stored as an undirected networkx graph.

    Every node carries its rank ("level") and its vertical parent ("up", None at the root);
    every edge carries kind "h" (horizontal) or "v" (vertical).
    """

    def __init__(self, levels: int, rearranged: bool = False):
        self.levels = levels
        self.rearranged = rearranged
        self.graph = nx.Graph()
        self._horizontal: Dict[int, nx.Graph] = {}
        self._balls: Dict[Tuple[Vertex, Optional[int]], Dict[Vertex, int]] = {}

    @property
    def root(self) -> Vertex:
        return (0, ROOT)

    def key(self, a: VertexLike) -> Vertex:
        if len(a) == 2 and isinstance(a[1], tuple):
            return (int(a[0]), tuple(a[1]))
        w = tuple(a)
        return (len(w), w)

    def add_vertex(self, v: Vertex, up: Optional[Vertex]):
        self.graph.add_node(v, level=v[0], up=up)
        if up is not None:
            self.graph.add_edge(up, v, kind="v")

    def add_horizontal(self, a: Vertex, b: Vertex):
        if a != b:
            self.graph.add_edge(a, b, kind="h")

    def vertices(self, m: int) -> List[Vertex]:
        return sorted(v for v, lvl in self.graph.nodes(data="level") if lvl == m)

    def horizontal_edges(self, m: Optional[int] = None) -> List[Tuple[Vertex, Vertex]]:
        edges = []
        for a, b, kind in self.graph.edges(data="kind"):
            if kind == "h" and (m is None or a[0] == m):
                edges.append(tuple(sorted((a, b))))
        return sorted(edges)

    def vertical_edges(self) -> List[Tuple[Vertex, Vertex]]:
        return sorted(tuple(sorted((a, b))) for a, b, kind in self.graph.edges(data="kind") if kind == "v")

    def horizontal_layer(self, m: int) -> nx.Graph:
        if m not in self._horizontal:
            layer = nx.Graph()
            layer.add_nodes_from(self.vertices(m))
            layer.add_edges_from(self.horizontal_edges(m))
            self._horizontal[m] = layer
        return self._horizontal[m]

    def horizontal_ball(self, a: Vertex, cutoff: Optional[int]) -> Dict[Vertex, int]:
        key = (a, cutoff)
        if key not in self._balls:
            self._balls[key] = nx.single_source_shortest_path_length(self.horizontal_layer(a[0]), a, cutoff=cutoff)
        return self._balls[key]

    def up(self, a: Vertex, steps: int = 1) -> Vertex:
        for _ in range(steps):
            a = self.graph.nodes[a]["up"]
        return a

    def edge_lines(self) -> List[str]:
        lines = []
        for a, b, kind in sorted(self.graph.edges(data="kind"), key=lambda e: (min(e[0], e[1]), max(e[0], e[1]))):
            a, b = sorted((a, b))
            lines.append(f"{format_vertex(a)} {format_vertex(b)} {kind}")
        return lines


def build_resolution(family: PartitionFamily, L: int) -> ResolutionGraph:
    """(T,B) up to level L: parent links plus E^h_m from exact cell intersection."""
    L = min(L, family.max_depth)
    G = ResolutionGraph(L)
    G.add_vertex((0, ROOT), None)
    for m in range(1, L + 1):
        for w in family.level_cells(m):
            G.add_vertex((m, w), (m - 1, w[:-1]))
    for m in range(1, L + 1):
        for w in family.level_cells(m):
            for v in family.neighbors(w):
                if w < v:
                    G.add_horizontal((m, w), (m, v))
    logger.debug("resolution to level %d: %d vertices, %d edges", L,
                 G.graph.number_of_nodes(), G.graph.number_of_edges())
    return G


def rearranged_resolution(family: PartitionFamily, g: WeightFunction, r, levels: int) -> ResolutionGraph:
    """Vertices (m, w) for w in Λ^g_{r^m}; vertical edges follow π^{g,r}."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0,1), got {r}")
    G = ResolutionGraph(levels, rearranged=True)
    G.add_vertex((0, ROOT), None)
    previous = ScaleSet(Fraction(1), g, family)
    for m in range(1, levels + 1):
        lam = ScaleSet(r ** m, g, family)
        for w in lam.members:
            anchor = next(w[:k] for k in range(len(w), -1, -1) if previous.is_member(w[:k]))
            G.add_vertex((m, w), (m - 1, anchor))
        for w in lam.members:
            for v in lam.adjacent(w):
                if w < v:
                    G.add_horizontal((m, w), (m, v))
        previous = lam
    return G


def graph_distance(G: ResolutionGraph, a: VertexLike, b: VertexLike) -> int:
    a, b = G.key(a), G.key(b)
    try:
        return nx.shortest_path_length(G.graph, a, b)
    except nx.NetworkXNoPath:
        raise Disconnected(f"no path between {format_vertex(a)} and {format_vertex(b)}")


def gromov_product(G: ResolutionGraph, a: VertexLike, b: VertexLike) -> Fraction:
    """(a|b) based at the root."""
    a, b = G.key(a), G.key(b)
    return Fraction(graph_distance(G, G.root, a) + graph_distance(G, G.root, b) - graph_distance(G, a, b), 2)


def bridge_distance(G: ResolutionGraph, a: VertexLike, b: VertexLike, cutoff: Optional[int] = None) -> int:
    """Shortest ascending-horizontal-descending path between two vertices of equal rank."""
    a, b = G.key(a), G.key(b)
    if a[0] != b[0]:
        raise ValueError("bridge distance needs vertices of equal rank")
    m = a[0]
    best = None
    for k in range(m, -1, -1):
        climb = 2 * (m - k)
        if best is not None and climb >= best:
            break
        ua, ub = G.up(a, m - k), G.up(b, m - k)
        hd = G.horizontal_ball(ua, cutoff).get(ub)
        if hd is not None and (best is None or climb + hd < best):
            best = climb + hd
    if best is None:
        raise Disconnected(f"no bridge between {format_vertex(a)} and {format_vertex(b)}")
    return best


@dataclass
class ScanResult:
    max_bound: int
    per_level: Dict[int, int]
    witnesses: List[Tuple[Vertex, Vertex, int]]
    truncated: bool = False


def horizontally_minimal_scan(G: ResolutionGraph, L: Optional[int] = None,
                              cutoff: Optional[int] = 8) -> ScanResult:
    """Largest distance realized by a purely horizontal geodesic, per level.

    Pairs are searched within horizontal distance cutoff, or over the whole level when cutoff
    is None. A bridge whose horizontal leg passes the cutoff is longer than every pair searched,
    so each comparison is exact; max_bound is certified when truncated is False.
    """
    L = G.levels if L is None else min(L, G.levels)
    per_level: Dict[int, int] = {}
    witnesses: List[Tuple[Vertex, Vertex, int]] = []
    truncated = False
    for m in range(1, L + 1):
        level_max, level_pairs = 0, []
        for a in G.vertices(m):
            for b, hd in G.horizontal_ball(a, cutoff).items():
                if b <= a:
                    continue
                if bridge_distance(G, a, b, cutoff) != hd:
                    continue
                if hd > level_max:
                    level_max, level_pairs = hd, [(a, b, hd)]
                elif hd == level_max:
                    level_pairs.append((a, b, hd))
                if cutoff is not None and hd == cutoff:
                    truncated = True
        per_level[m] = level_max
        witnesses.extend(level_pairs[:3])
    if truncated:
        logger.warning("horizontally minimal pairs reach the scan cutoff %s; the bound may be larger", cutoff)
    return ScanResult(max_bound=max(per_level.values(), default=0), per_level=per_level,
                      witnesses=witnesses, truncated=truncated)


@dataclass
class GromovEstimate:
    eta: Fraction
    samples: int
    worst: Optional[Tuple[Vertex, Vertex, Vertex]] = None


def gromov_eta(G: ResolutionGraph, samples: int = 200, seed: int = 0) -> GromovEstimate:
    """Smallest η with (a|b) ≥ min((a|c), (b|c)) − η over sampled triples."""
    rng = np.random.default_rng(seed)
    nodes = sorted(G.graph.nodes)
    eta, worst, done = Fraction(0), None, 0
    if len(nodes) < 3:
        return GromovEstimate(eta=eta, samples=0)
    for _ in range(samples):
        a, b, c = (nodes[i] for i in rng.choice(len(nodes), size=3, replace=False))
        try:
            ab, ac, bc = gromov_product(G, a, b), gromov_product(G, a, c), gromov_product(G, b, c)
        except Disconnected:
            continue
        done += 1
        for x, y, z in ((ab, ac, bc), (ac, ab, bc), (bc, ab, ac)):
            gap = min(y, z) - x
            if gap > eta:
                eta, worst = gap, (a, b, c)
    return GromovEstimate(eta=eta, samples=done, worst=worst)


def root_geodesics_vertical(G: ResolutionGraph) -> List[Vertex]:
    """Vertices whose distance from the root differs from their rank."""
    dist = nx.single_source_shortest_path_length(G.graph, G.root)
    return sorted(v for v in G.graph.nodes if dist.get(v) != v[0])


def bridge_violations(G: ResolutionGraph, pairs: Iterable[Tuple[VertexLike, VertexLike]]) -> List[Tuple[Vertex, Vertex]]:
    """Pairs whose graph distance is not attained by a bridge."""
    bad = []
    for a, b in pairs:
        a, b = G.key(a), G.key(b)
        if graph_distance(G, a, b) != bridge_distance(G, a, b):
            bad.append((a, b))
    return bad


def sample_level_pairs(G: ResolutionGraph, count: int, seed: int = 0) -> List[Tuple[Vertex, Vertex]]:
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        m = int(rng.integers(1, G.levels + 1)) if G.levels else 0
        layer = G.vertices(m)
        if len(layer) < 2:
            continue
        i, j = rng.choice(len(layer), size=2, replace=False)
        pairs.append((layer[i], layer[j]))
    return pairs
