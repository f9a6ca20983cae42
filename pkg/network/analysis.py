# network/analysis.py

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from fractal.partition import PartitionFamily
from fractal.tree import Address, format_address, parent
from .systems import HorizontalNetwork, ProperSystem, build_network, gamma, refine

logger = logging.getLogger("confdim.network")


@dataclass
class LevelCheck:
    level: int
    vertices: int
    edges: int
    n1: bool
    n2: bool
    n3_max: int
    n3: bool
    n4: bool
    n5_checked: int = 0
    n5_failures: List[Tuple[Address, Address]] = field(default_factory=list)

    @property
    def n5(self) -> bool:
        return not self.n5_failures

    @property
    def holds(self) -> bool:
        return self.n1 and self.n2 and self.n3 and self.n4 and self.n5


@dataclass
class ProperSystemReport:
    system: str
    indices: Tuple[int, int, int, int]
    levels: List[LevelCheck]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.levels)

    @property
    def observed_l0(self) -> int:
        return max((c.n3_max for c in self.levels), default=0)


def _pair_counts(net: HorizontalNetwork) -> Dict[Tuple[Address, Address], int]:
    """#E_m(u,v) per unordered cell pair, each undirected edge counted once per pair."""
    seen: Dict[Tuple[Address, Address], set] = defaultdict(set)
    for x, y in net.graph.edges:
        e = frozenset((x, y))
        for u in net.owners[x]:
            for v in net.owners[y]:
                seen[(min(u, v), max(u, v))].add(e)
    return {k: len(v) for k, v in seen.items()}


def _n5_holds(net: HorizontalNetwork, family: PartitionFamily, u: Address, v: Address, L2: int) -> bool:
    allowed = set(gamma(family, u, L2))
    keep = [x for x in net.graph.nodes if any(w in allowed for w in net.owners[x])]
    sub = net.graph.subgraph(keep)
    for x in net.vertices_of(u):
        reach = nx.node_connected_component(sub, x)
        if any(y not in reach for y in net.vertices_of(v)):
            return False
    return True


def validate_proper_system(system: ProperSystem, family: PartitionFamily, levels: Iterable[int],
                           samples: int = 50, seed: int = 0) -> ProperSystemReport:
    """Exact (N1)-(N4) on every listed level and (N5) on sampled J^h_{L1} pairs."""
    system.require(family)
    N, L0, L1, L2 = system.indices
    rng = np.random.default_rng(seed)
    checks = []
    for m in levels:
        net = build_network(system, family, m)
        cells = family.level_cells(m)
        n1 = all(family.is_valid(body) and len(body) == m if tag == "cell" else family.in_space(body)
                 for tag, body in net.graph.nodes)
        n2 = all(net.vertices_of(w) for w in cells)
        counts = _pair_counts(net)
        n3_max = max(counts.values(), default=0)
        reach = {w: set(gamma(family, w, N)) for w in cells}
        n4 = all(any(v in reach[u] for u in net.owners[x] for v in net.owners[y])
                 for x, y in net.graph.edges)
        pairs = sorted((u, v) for u in cells for v in gamma(family, u, L1))
        if len(pairs) > samples:
            pairs = [pairs[i] for i in sorted(rng.choice(len(pairs), size=samples, replace=False))]
        failures = [(u, v) for u, v in pairs if not _n5_holds(net, family, u, v, L2)]
        check = LevelCheck(level=m, vertices=net.graph.number_of_nodes(), edges=net.graph.number_of_edges(),
                           n1=n1, n2=n2, n3_max=n3_max, n3=n3_max <= L0, n4=n4,
                           n5_checked=len(pairs), n5_failures=failures)
        if not check.holds:
            logger.warning("%s fails on level %d: %s", system.describe(), m, check)
        checks.append(check)
    return ProperSystemReport(system=system.name, indices=system.indices, levels=checks)


# -- growth --------------------------------------------------------------------------------
@dataclass
class GrowthRates:
    L_star: int
    N_star: int
    volume_counts: Dict[int, int]
    cell_counts: Dict[int, int]
    volume_rates: Dict[int, float]
    cell_rates: Dict[int, float]
    N_upper: float
    N_lower: float
    volume_bound_upper: Optional[float] = None
    volume_bound_lower: Optional[float] = None

    @property
    def reduction_consistent(self) -> bool:
        """#S^n(w) never exceeds #S^n(Γ_{N2}(w)); both sequences share their limits."""
        return all(self.cell_counts[n] <= self.volume_counts[n] for n in self.cell_counts)


def growth_rates(family: PartitionFamily, N2: int, depths: Sequence[int],
                 base_levels: Optional[Sequence[int]] = None, r: Optional[Fraction] = None) -> GrowthRates:
    """Exact sup_w #S^n(Γ_{N2}(w)) and sup_w #S^n(w) over cells w on base_levels.

    N̄_* and N̲_* are the largest and smallest n-th-root rates over the last half of depths.
    """
    depths = sorted(depths)
    horizon = family.max_depth
    scan = min(horizon, max(3, max(depths, default=1)))
    L_star = max(len(gamma(family, w, 1)) for m in range(scan + 1) for w in family.level_cells(m))
    N_star = max(len(family.child_digits(w)) for m in range(horizon) for w in family.level_cells(m))
    volume_counts, cell_counts = {}, {}
    for n in depths:
        if n < 1 or n > horizon:
            raise ValueError(f"depth {n} outside 1..{horizon}")
        levels = base_levels if base_levels is not None else range(min(2, horizon - n) + 1)
        pool = [w for m in levels if m + n <= horizon for w in family.level_cells(m)]
        volume_counts[n] = max(len(refine(family, gamma(family, w, N2), n)) for w in pool)
        cell_counts[n] = max(len(family.descendants(w, n)) for w in pool)
    volume_rates = {n: volume_counts[n] ** (1.0 / n) for n in depths}
    cell_rates = {n: cell_counts[n] ** (1.0 / n) for n in depths}
    tail = [cell_rates[n] for n in depths[len(depths) // 2:]]
    N_upper, N_lower = max(tail), min(tail)
    r = r if r is not None else family.contraction
    upper = lower = None
    if r is not None and N_upper > 0:
        upper = -math.log(N_upper) / math.log(float(r))
        lower = -math.log(N_lower) / math.log(float(r))
    return GrowthRates(L_star=L_star, N_star=N_star, volume_counts=volume_counts, cell_counts=cell_counts,
                       volume_rates=volume_rates, cell_rates=cell_rates, N_upper=N_upper, N_lower=N_lower,
                       volume_bound_upper=upper, volume_bound_lower=lower)


# -- balanced functions --------------------------------------------------------------------
PhiLike = Union[Mapping[Address, Fraction], Callable[[Address], Fraction]]


def _phi_of(phi: PhiLike) -> Callable[[Address], Fraction]:
    if hasattr(phi, "exact"):
        return lambda w: Fraction(phi.exact(w))
    if isinstance(phi, Mapping):
        return lambda w: Fraction(phi[tuple(w)])
    return lambda w: Fraction(phi(w))


@dataclass
class BalancedVerdict:
    w: Address
    M: int
    verdict: str  # "balanced", "violated", "vacuous" or "inconclusive"
    min_slack: Optional[Fraction] = None
    path: List[Address] = field(default_factory=list)
    max_path_len: Optional[int] = None

    @property
    def balanced(self) -> bool:
        return self.verdict in ("balanced", "vacuous")


_SOURCE = "source"


def _worst_jpath(starts: Iterable[Address], ends: Iterable[Address], steps: Mapping[Address, List[Address]],
                 value: Callable[[Address], Fraction],
                 max_path_len: Optional[int]) -> Optional[Tuple[Fraction, List[Address]]]:
    """Least slack Σφ(path) − φ(π(end)) over the jpaths of at most max_path_len cells.

    States are (cell, cells used), or (cell, 0) without a budget; each edge carries the φ of
    its target, so a Dijkstra from a common source prices every path.
    """
    layers = range(1, max_path_len + 1) if max_path_len else [0]
    graph = nx.DiGraph()
    graph.add_node(_SOURCE)
    for u in starts:
        graph.add_edge(_SOURCE, (u, layers[0]), weight=value(u))
    for h in layers:
        if max_path_len and h == max_path_len:
            break
        nxt = h + 1 if max_path_len else 0
        for u, targets in steps.items():
            graph.add_edges_from(((u, h), (v, nxt), {"weight": value(v)}) for v in targets)
    cost, paths = nx.single_source_dijkstra(graph, _SOURCE)
    ends = set(ends)
    found = [(cost[state] - value(parent(state[0])), state)
             for state in cost if state != _SOURCE and state[0] in ends]
    if not found:
        return None
    slack, state = min(found)
    return slack, [c for c, _ in paths[state][1:]]


def balanced_check_bounded(family: PartitionFamily, phi: PhiLike, M: int, w: Address,
                           max_path_len: Optional[int] = None) -> BalancedVerdict:
    """Minimize Σφ(w(i)) − φ(π(w(m))) over the jpaths of C_w^M.

    Without max_path_len every path length is covered. With it, only a violation is final:
    "balanced" or "vacuous" is returned when the search without a budget agrees, and
    "inconclusive" otherwise.
    """
    w = family.require(w)
    value = _phi_of(phi)
    around = gamma(family, w, M)
    region = set(refine(family, around, 1))
    starts = set()
    for c in family.children(w):
        starts.update(u for u in gamma(family, c, M) if u in region)
    ends = {u for u in region if any(v not in region for v in gamma(family, u, M))}
    if not ends or not starts:
        return BalancedVerdict(w=w, M=M, verdict="vacuous", max_path_len=max_path_len)
    steps = {u: [v for v in gamma(family, u, M) if v in region] for u in region}

    found = _worst_jpath(sorted(starts), ends, steps, value, max_path_len)
    if found is not None and found[0] < 0:
        verdict = "violated"
    elif max_path_len:
        unbounded = _worst_jpath(sorted(starts), ends, steps, value, None)
        if unbounded is not None and unbounded[0] < 0:
            verdict = "inconclusive"
        else:
            verdict = "vacuous" if unbounded is None else "balanced"
            found = unbounded
    else:
        verdict = "vacuous" if found is None else "balanced"
    logger.debug("balanced check at %s: %s", format_address(w) or "root", verdict)
    if found is None:
        return BalancedVerdict(w=w, M=M, verdict=verdict, max_path_len=max_path_len)
    return BalancedVerdict(w=w, M=M, verdict=verdict, min_slack=found[0], path=found[1],
                           max_path_len=max_path_len)
