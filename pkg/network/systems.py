# network/systems.py

import logging
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from fractal.geometry import Point, format_point
from fractal.partition import PartitionFamily
from fractal.tree import Address, format_address
from utils.errors import InvalidProblem, UnsupportedFamily

logger = logging.getLogger("confdim.network")

# ("cell", address) or ("point", coordinates); the tag keeps cells and points apart.
NetVertex = Tuple[str, tuple]

SYSTEM_NAMES = ("cell", "edge", "corner")


def cell_vertex(w: Address) -> NetVertex:
    return ("cell", tuple(w))


def point_vertex(x: Point) -> NetVertex:
    return ("point", tuple(x))


def format_net_vertex(m: int, v: NetVertex) -> str:
    tag, body = v
    return f"{m}:{format_address(body)}" if tag == "cell" else f"{m}:{format_point(body)}"


def gamma(family: PartitionFamily, w: Address, M: int) -> List[Address]:
    """Γ_M(w): same-level cells reached from w by a horizontal chain of at most M steps."""
    w = family.require(w)
    return sorted(nx.single_source_shortest_path_length(family.level_graph(len(w)), w, cutoff=M))


def refine(family: PartitionFamily, cells: Iterable[Address], k: int) -> List[Address]:
    """S^k(A): depth-k descendants of every member of A."""
    out: Set[Address] = set()
    for w in cells:
        out.update(family.descendants(w, k))
    return sorted(out)


@dataclass
class HorizontalNetwork:
    """(Ω_m, E_m) with ownership w -> Ω_{m,w}; may cover only part of a level."""
    level: int
    graph: nx.Graph
    owners: Dict[NetVertex, Tuple[Address, ...]]
    cells: FrozenSet[Address] = frozenset()
    _owned: Dict[Address, List[NetVertex]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        owned = defaultdict(list)
        for v, ws in self.owners.items():
            for w in ws:
                owned[w].append(v)
        self._owned = {w: sorted(vs) for w, vs in owned.items()}

    def vertices_of(self, w: Address) -> List[NetVertex]:
        """Ω_{m,w}."""
        return self._owned.get(tuple(w), [])

    def vertices_over(self, cells: Iterable[Address]) -> Set[NetVertex]:
        """Ω_m(U) for a cell set U."""
        out: Set[NetVertex] = set()
        for w in cells:
            out.update(self.vertices_of(w))
        return out

    def edges(self) -> List[Tuple[NetVertex, NetVertex]]:
        return sorted(tuple(sorted(e)) for e in self.graph.edges)

    def max_degree(self) -> int:
        return max((d for _, d in self.graph.degree), default=0)

    def edge_lines(self) -> List[str]:
        m = self.level
        return [f"{format_net_vertex(m, a)} {format_net_vertex(m, b)}" for a, b in self.edges()]

    def ownership_lines(self) -> List[str]:
        m = self.level
        return [f"{format_net_vertex(m, v)} " + " ".join(format_address(w) for w in self.owners[v])
                for v in sorted(self.owners)]


class ProperSystem(ABC):
    """Builder for one proper system of horizontal networks, with its declared indices."""

    name: str = ""

    @property
    @abstractmethod
    def indices(self) -> Tuple[int, int, int, int]:
        """(N, L0, L1, L2)."""

    def supports(self, family: PartitionFamily) -> bool:
        return True

    def require(self, family: PartitionFamily):
        if not self.supports(family):
            raise UnsupportedFamily(f"system {self.name} is only defined on the Sierpinski carpet, "
                                    f"not on {family.kind}")

    @abstractmethod
    def build(self, family: PartitionFamily, m: int,
              cells: Optional[Iterable[Address]] = None) -> HorizontalNetwork:
        """Level-m network; with cells given, only edges inside those cells' ownership are built."""

    def describe(self) -> str:
        return f"{self.name}{self.indices}"


class CellSystem(ProperSystem):
    """Ω_*^{(N)}: vertices are the level-m cells, edges join u and v ∈ Γ_N(u)."""

    def __init__(self, N: int = 1):
        if N < 1:
            raise ValueError(f"N must be at least 1, got {N}")
        self.N = N
        self.name = "cell" if N == 1 else f"cell{N}"

    @property
    def indices(self) -> Tuple[int, int, int, int]:
        return (self.N, 1, 1, 1)

    def build(self, family, m, cells=None):
        cells = family.level_cells(m) if cells is None else sorted(set(cells))
        graph = nx.Graph()
        owners: Dict[NetVertex, Tuple[Address, ...]] = {}
        for u in cells:
            a = cell_vertex(u)
            graph.add_node(a)
            owners[a] = (u,)
            for v in gamma(family, u, self.N):
                if v != u:
                    b = cell_vertex(v)
                    owners.setdefault(b, (v,))
                    graph.add_edge(a, b)
        return HorizontalNetwork(level=m, graph=graph, owners=owners,
                                 cells=frozenset(cells))


class _CarpetSystem(ProperSystem):
    def supports(self, family: PartitionFamily) -> bool:
        return family.kind == "sierpinski-carpet"


class EdgeSharingSystem(_CarpetSystem):
    """Carpet Ω¹: cell graph with the slanting (corner-only) edges removed."""

    name = "edge"

    @property
    def indices(self):
        return (1, 1, 1, 2)

    def build(self, family, m, cells=None):
        self.require(family)
        cells = family.level_cells(m) if cells is None else sorted(set(cells))
        graph = nx.Graph()
        owners: Dict[NetVertex, Tuple[Address, ...]] = {}
        for u in cells:
            a = cell_vertex(u)
            graph.add_node(a)
            owners[a] = (u,)
            for v in family.neighbors(u):
                meet = family.box(u).intersection(family.box(v))
                # a shared side, not a single corner
                if meet is not None and meet.degenerate_axes() == 1:
                    b = cell_vertex(v)
                    owners.setdefault(b, (v,))
                    graph.add_edge(a, b)
        return HorizontalNetwork(level=m, graph=graph, owners=owners,
                                 cells=frozenset(cells))


class CornerLatticeSystem(_CarpetSystem):
    """Carpet Ω²: corners of the level-m squares joined along their sides."""

    name = "corner"

    @property
    def indices(self):
        return (1, 5, 1, 1)

    def build(self, family, m, cells=None):
        self.require(family)
        cells = family.level_cells(m) if cells is None else sorted(set(cells))
        pool = set(cells)
        for u in cells:
            pool.update(family.neighbors(u))
        graph = nx.Graph()
        corners: Dict[Point, Set[Address]] = defaultdict(set)
        for u in sorted(pool):
            for x in family.box(u).corners():
                corners[x].add(u)
        for u in cells:
            (x0, y0), (x1, y1) = family.box(u).lo, family.box(u).hi
            ring = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            for i in range(4):
                graph.add_edge(point_vertex(ring[i]), point_vertex(ring[(i + 1) % 4]))
        owners = {v: tuple(sorted(corners[v[1]])) for v in graph.nodes}
        return HorizontalNetwork(level=m, graph=graph, owners=owners,
                                 cells=frozenset(cells))


def make_system(name: str, N: int = 1) -> ProperSystem:
    if name == "cell":
        return CellSystem(N)
    if name == "edge":
        return EdgeSharingSystem()
    if name == "corner":
        return CornerLatticeSystem()
    raise ValueError(f"unknown proper system {name!r}; choose from {SYSTEM_NAMES}")


def build_network(system: ProperSystem, family: PartitionFamily, m: int) -> HorizontalNetwork:
    net = system.build(family, m)
    logger.debug("%s level %d: %d vertices, %d edges", system.name, m,
                 net.graph.number_of_nodes(), net.graph.number_of_edges())
    return net


class RebuiltSystem(ProperSystem):
    """Ω̄^M: the vertices of a base system with every pair over J^h_{M,m} joined."""

    def __init__(self, base: ProperSystem, M: int):
        self.base = base
        self.M = M
        self.name = f"{base.name}-bar{M}"

    @property
    def indices(self):
        N, L0, _, _ = self.base.indices
        return (self.M, L0 * L0, self.M, self.M)

    def supports(self, family):
        return self.base.supports(family)

    def build(self, family, m, cells=None):
        cells = family.level_cells(m) if cells is None else sorted(set(cells))
        around: Set[Address] = set()
        for u in cells:
            around.update(gamma(family, u, self.M))
        base = self.base.build(family, m, around)
        graph = nx.Graph()
        graph.add_nodes_from(base.vertices_over(cells))
        for u in cells:
            for x in base.vertices_of(u):
                for v in gamma(family, u, self.M):
                    for y in base.vertices_of(v):
                        if x != y:
                            graph.add_edge(x, y)
        owners = {v: base.owners[v] for v in graph.nodes}
        return HorizontalNetwork(level=m, graph=graph, owners=owners, cells=frozenset(cells))


@dataclass
class LocalProblem:
    """Boundary value data behind E_{p,k,w}(N1, N2, Ω).

    graph holds the vertices owned by S^k(Γ_{N2}(w)) and their outer neighbours; U2 is every
    vertex with an owner outside that region. Edges inside U2 are dropped.
    """
    w: Address
    k: int
    N1: int
    N2: int
    graph: nx.Graph
    U1: FrozenSet[NetVertex]
    U2: FrozenSet[NetVertex]
    region_size: int


def local_problem(system: ProperSystem, family: PartitionFamily, w: Address, k: int,
                  N1: int, N2: int) -> LocalProblem:
    if not 0 <= N1 < N2:
        raise InvalidProblem(f"need 0 <= N1 < N2, got N1={N1} N2={N2}")
    w = family.require(w)
    m = len(w) + k
    region = set(refine(family, gamma(family, w, N2), k))
    core = set(refine(family, gamma(family, w, N1), k))
    net = system.build(family, m, region)
    U1 = frozenset(v for v in net.graph.nodes if any(u in core for u in net.owners[v]))
    U2 = frozenset(v for v in net.graph.nodes if any(u not in region for u in net.owners[v]))
    if U1 & U2:
        raise InvalidProblem(f"boundary sets overlap for w={format_address(w)} k={k}")
    graph = nx.Graph()
    graph.add_nodes_from(net.graph.nodes)
    graph.add_edges_from((a, b) for a, b in net.graph.edges if not (a in U2 and b in U2))
    return LocalProblem(w=w, k=k, N1=N1, N2=N2, graph=graph, U1=U1, U2=U2, region_size=len(region))
