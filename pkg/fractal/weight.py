# fractal/weight.py

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product as cartesian
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from utils.errors import DepthExceeded, UnsupportedWeight
from .geometry import Point, dist_sq, to_point
from .partition import DyadicCubeFamily, PartitionFamily
from .tree import ROOT, Address, format_address, parent

logger = logging.getLogger("confdim.weight")

WEIGHT_FORMS = ("geometric", "product", "measure", "metric", "table", "custom")

# Two consecutive depth steps growing by at least this factor mark a trace as unbounded.
GROWTH_FACTOR = 2


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


@dataclass(frozen=True, order=True)
class Exact:
    """A nonnegative real kept exactly through its square."""
    sq: Fraction

    @classmethod
    def of(cls, q) -> "Exact":
        q = Fraction(q)
        return cls(q * q)

    def root(self) -> Optional[Fraction]:
        return _exact_sqrt(self.sq)

    def __float__(self) -> float:
        return math.sqrt(self.sq)

    def __mul__(self, other: "Exact") -> "Exact":
        return Exact(self.sq * other.sq)

    def __truediv__(self, other: "Exact") -> "Exact":
        return Exact(self.sq / other.sq)

    def __str__(self) -> str:
        r = self.root()
        return str(r) if r is not None else f"sqrt({self.sq})"


def grows_without_bound(trace: Sequence) -> bool:
    """True when the last two steps of the trace each grow by GROWTH_FACTOR or more."""
    if len(trace) < 3:
        return False
    a, b, c = trace[-3], trace[-2], trace[-1]
    return b >= GROWTH_FACTOR * a and c >= GROWTH_FACTOR * b


class WeightFunction:
    """g: T -> (0,1] evaluated exactly.

    Rational forms (power 1) store g(w) itself; the metric form (power 2) stores the exact
    squared value, so comparisons with a scale s are made on squares.
    """

    def __init__(self, form: str, evaluator: Callable[[Address], Fraction], power: int = 1,
                 name: str = "", params: Optional[Dict[str, str]] = None):
        if form not in WEIGHT_FORMS:
            raise ValueError(f"unknown weight form {form!r}")
        if power not in (1, 2):
            raise ValueError("power must be 1 or 2")
        self.form = form
        self.power = power
        self.name = name or form
        self.params = params or {}
        self._evaluator = evaluator
        self._cache: Dict[Address, Fraction] = {}

    @property
    def rational(self) -> bool:
        return self.power == 1

    def stored(self, w: Address) -> Fraction:
        """g(w) for rational forms, g(w)^2 for the metric form."""
        w = tuple(w)
        if w not in self._cache:
            self._cache[w] = Fraction(self._evaluator(w))
        return self._cache[w]

    def exact(self, w: Address) -> Fraction:
        if not self.rational:
            raise UnsupportedWeight(f"weight {self.name} has irrational values; use magnitude()")
        return self.stored(w)

    def squared(self, w: Address) -> Fraction:
        v = self.stored(w)
        return v * v if self.power == 1 else v

    def magnitude(self, w: Address) -> Exact:
        return Exact(self.squared(w))

    def at_most(self, w: Address, s) -> bool:
        s = Fraction(s)
        return self.squared(w) <= s * s

    def __call__(self, w: Address) -> float:
        return float(self.magnitude(w))

    def describe(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}(" + ", ".join(f"{k}={v}" for k, v in self.params.items()) + ")"


def geometric(r) -> WeightFunction:
    """h_r(w) = r^|w|."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise ValueError(f"geometric ratio must lie in (0,1), got {r}")
    return WeightFunction("geometric", lambda w: r ** len(w), name=f"h_{r}", params={"r": str(r)})


def product(rates: Mapping[int, Fraction], form: str = "product") -> WeightFunction:
    """g(w) = product of per-digit ratios."""
    table = {int(d): Fraction(r) for d, r in rates.items()}
    if any(not 0 < r < 1 for r in table.values()):
        raise ValueError("product weight ratios must lie in (0,1)")

    def evaluate(w: Address) -> Fraction:
        value = Fraction(1)
        for d in w:
            if d not in table:
                raise UnsupportedWeight(f"no ratio given for digit {d}")
            value *= table[d]
        return value

    params = {f"r{d}": str(r) for d, r in sorted(table.items())}
    return WeightFunction(form, evaluate, name=form, params=params)


def measure(masses: Mapping[int, Fraction]) -> WeightFunction:
    """g_mu for a product measure with the given digit masses (summing to 1)."""
    total = sum((Fraction(m) for m in masses.values()), Fraction(0))
    if total != 1:
        raise ValueError(f"digit masses must sum to 1, got {total}")
    return product(masses, form="measure")


def cell_diameter_sq(family: PartitionFamily, w: Address) -> Fraction:
    """Exact squared Euclidean diameter of K_w."""
    if isinstance(family, DyadicCubeFamily):
        pts = list(family.cell(w).points)
    else:
        b = family.box(w)
        axes = []
        for axis in range(b.dim):
            coords = {b.lo[axis], b.hi[axis]}
            for h in family._cut_boxes(b):
                coords.update(c for c in (h.lo[axis], h.hi[axis]) if b.lo[axis] <= c <= b.hi[axis])
            axes.append(sorted(coords))
        pts = [tuple(p) for p in cartesian(*axes) if family.in_space(tuple(p))]
    best = Fraction(0)
    for x, y in combinations(pts, 2):
        best = max(best, dist_sq(x, y))
    return best


def metric(family: PartitionFamily, normalize: bool = True) -> WeightFunction:
    """g_d(w) = diam(K_w, d) for the Euclidean d, normalized so that diam(X, d) = 1."""
    scale = cell_diameter_sq(family, ROOT) if normalize else Fraction(1)
    if scale == 0:
        raise UnsupportedWeight("space has zero diameter")

    def evaluate(w: Address) -> Fraction:
        return cell_diameter_sq(family, family.require(w)) / scale

    return WeightFunction("metric", evaluate, power=2, name="g_d",
                          params={"normalized": str(normalize).lower()})


def table(values: Mapping[Address, Fraction], tail_ratio=Fraction(1, 2)) -> WeightFunction:
    """Custom table; unlisted addresses get g(parent) * tail_ratio."""
    tail = Fraction(tail_ratio)
    listed = {tuple(w): Fraction(v) for w, v in values.items()}
    weight: Optional[WeightFunction] = None

    def evaluate(w: Address) -> Fraction:
        if w in listed:
            return listed[w]
        if w == ROOT:
            return Fraction(1)
        return weight.stored(parent(w)) * tail

    weight = WeightFunction("table", evaluate, name="table", params={"entries": str(len(listed)),
                                                                       "tail_ratio": str(tail)})
    return weight


def custom(fn: Callable[[Address], Fraction], name: str = "custom") -> WeightFunction:
    return WeightFunction("custom", fn, name=name)


# -- scale sets ------------------------------------------------------------------------------
class ScaleSet:
    """Λ_s^g: the cells w with g(π(w)) > s ≥ g(w).

    Membership is decided by the rule itself, so local queries (adjacent, containing) never
    enumerate the whole set; members is computed on first use.
    """

    def __init__(self, s, weight: WeightFunction, family: PartitionFamily):
        self.s = Fraction(s)
        if not 0 < self.s <= 1:
            raise ValueError(f"scale must lie in (0,1], got {self.s}")
        self.weight = weight
        self.family = family
        self._members: Optional[List[Address]] = None
        self._adjacent: Dict[Address, List[Address]] = {}
        self._graph: Optional[nx.Graph] = None

    def is_member(self, w: Address) -> bool:
        w = tuple(w)
        if not self.weight.at_most(w, self.s):
            return False
        return w == ROOT or not self.weight.at_most(parent(w), self.s)

    def __contains__(self, w) -> bool:
        return self.family.is_valid(w) and self.is_member(w)

    def _descend(self, accept: Callable[[Address], bool]) -> List[Address]:
        found, stack = [], [ROOT]
        while stack:
            u = stack.pop()
            if not accept(u):
                continue
            if self.weight.at_most(u, self.s):
                found.append(u)
                continue
            if len(u) >= self.family.max_depth:
                raise DepthExceeded(
                    f"g({format_address(u) or 'root'}) > {self.s} at max_depth {self.family.max_depth}")
            stack.extend(self.family.children(u))
        return sorted(found)

    @property
    def members(self) -> List[Address]:
        if self._members is None:
            self._members = self._descend(lambda u: True)
        return self._members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def adjacent(self, w: Address) -> List[Address]:
        """Λ_{s,1}(w): members v with K_v ∩ K_w ≠ ∅, w included."""
        w = tuple(w)
        if w not in self._adjacent:
            self._adjacent[w] = self._descend(lambda u: self.family.intersects(u, w))
        return self._adjacent[w]

    @property
    def graph(self) -> nx.Graph:
        """Members, joined when their cells meet."""
        if self._graph is None:
            graph = nx.Graph()
            graph.add_nodes_from(self.members)
            for w in self.members:
                graph.add_edges_from((w, v) for v in self.adjacent(w) if v != w)
            self._graph = graph
        return self._graph

    def containing(self, x: Point) -> List[Address]:
        """Λ_{s,0}(x)."""
        x = to_point(x)
        return self._descend(lambda u: self.family.contains(u, x))


def scale_set(g: WeightFunction, family: PartitionFamily, s) -> ScaleSet:
    lam = ScaleSet(s, g, family)
    if not lam.members:
        raise DepthExceeded(f"scale {lam.s} has no members")
    return lam


def level_scales(g: WeightFunction, family: PartitionFamily, depth: int) -> List[Fraction]:
    """max g over (T)_m for m = 1..depth; the natural scale samples of a rational weight."""
    if g.form == "geometric":
        r = Fraction(g.params["r"])
        return [r ** m for m in range(1, depth + 1)]
    return [max(g.exact(w) for w in family.level_cells(m)) for m in range(1, depth + 1)]


def candidate_scales(g: WeightFunction, family: PartitionFamily) -> List[Fraction]:
    """A sorted superset of the values g takes on the truncated tree."""
    if not g.rational:
        raise UnsupportedWeight(f"weight {g.name} has irrational values")
    values = {Fraction(1)}
    if g.form == "geometric":
        r = Fraction(g.params["r"])
        values.update(r ** m for m in range(family.max_depth + 1))
    elif g.form in ("product", "measure"):
        ratios = sorted({Fraction(v) for k, v in g.params.items() if k.startswith("r")})
        layer = {Fraction(1)}
        for _ in range(family.max_depth):
            layer = {a * r for a in layer for r in ratios}
            values.update(layer)
    else:
        values.update(g.exact(w) for m in range(family.max_depth + 1) for w in family.level_cells(m))
    return sorted(values)


def horizon_floor(g: WeightFunction, family: PartitionFamily) -> Fraction:
    """Smallest scale whose Λ_s is realizable within max_depth: max g over (T)_H."""
    if g.form == "geometric":
        return Fraction(g.params["r"]) ** family.max_depth
    if g.form in ("product", "measure"):
        return max(Fraction(v) for k, v in g.params.items() if k.startswith("r")) ** family.max_depth
    return max(g.exact(w) for w in family.level_cells(family.max_depth))


# -- diagnostics ---------------------------------------------------------------------------
@dataclass
class ExpConstants:
    lam: Exact
    gammas: Dict[int, Exact]
    sub_m: Optional[int] = None
    sub_gamma: Optional[Exact] = None

    @property
    def sub_exponential(self) -> bool:
        return self.sub_m is not None


def exp_constants(g: WeightFunction, family: PartitionFamily, depth: int) -> ExpConstants:
    if depth < 2:
        raise ValueError("exp_constants needs depth >= 2")
    lam: Optional[Exact] = None
    for m in range(1, depth + 1):
        for w in family.level_cells(m):
            r = g.magnitude(w) / g.magnitude(parent(w))
            lam = r if lam is None or r < lam else lam
    gammas: Dict[int, Exact] = {}
    for k in range(1, depth + 1):
        best: Optional[Exact] = None
        for m in range(depth - k + 1):
            for w in family.level_cells(m):
                base = g.magnitude(w)
                for v in family.descendants(w, k):
                    r = g.magnitude(v) / base
                    best = r if best is None or r > best else best
        if best is not None:
            gammas[k] = best
    sub_m = next((k for k in sorted(gammas) if gammas[k].sq < 1), None)
    return ExpConstants(lam=lam, gammas=gammas, sub_m=sub_m,
                        sub_gamma=gammas[sub_m] if sub_m is not None else None)


def uniformly_finite_bound(g: WeightFunction, family: PartitionFamily, scales: Iterable) -> int:
    """max #Λ_{s,1}(w) over sampled scales."""
    bound = 0
    for s in scales:
        lam = scale_set(g, family, s)
        for w in lam:
            bound = max(bound, len(lam.adjacent(w)))
    return bound


@dataclass
class TraceReport:
    value: Optional[Exact]
    trace: List[Tuple[Fraction, Exact]] = field(default_factory=list)
    unbounded: bool = False


def gentle_constant(g: WeightFunction, h: WeightFunction, family: PartitionFamily,
                    scales: Iterable) -> TraceReport:
    """max h(w)/h(v) over adjacent w, v in Λ_s^g, per scale in decreasing order."""
    trace = []
    for s in sorted((Fraction(s) for s in scales), reverse=True):
        lam = scale_set(g, family, s)
        best = Exact(Fraction(1))
        for w in lam:
            for v in lam.adjacent(w):
                r = h.magnitude(w) / h.magnitude(v)
                best = max(best, r)
        trace.append((s, best))
    values = [t[1].sq for t in trace]
    unbounded = grows_without_bound(values)
    if unbounded:
        logger.warning("gentleness ratio of %s against %s keeps growing: %s",
                       h.describe(), g.describe(), ", ".join(str(t[1]) for t in trace))
    return TraceReport(value=max((t[1] for t in trace), default=None), trace=trace, unbounded=unbounded)


@dataclass
class BiLipschitz:
    c1: Exact
    c2: Exact


def bilipschitz_constants(g: WeightFunction, h: WeightFunction, family: PartitionFamily,
                          depth: int) -> BiLipschitz:
    ratios = [h.magnitude(w) / g.magnitude(w)
              for m in range(depth + 1) for w in family.level_cells(m)]
    return BiLipschitz(c1=min(ratios), c2=max(ratios))


@dataclass
class ThicknessReport:
    bound: Optional[int]
    per_level: List[int]
    unbounded: bool
    worst: Optional[Address] = None


def _inner_depth(family: PartitionFamily, w: Address) -> Optional[int]:
    """Smallest k with some v in S^k(w) avoiding every other cell of w's level."""
    others = family.neighbors(w)
    frontier = [w]
    for k in range(family.max_depth - len(w) + 1):
        for v in frontier:
            if not any(family.intersects(v, u) for u in others):
                return k
        if k < family.max_depth - len(w):
            frontier = [c for u in frontier for c in family.children(u)]
    return None


def thickness_th1_bound(family: PartitionFamily, depth: Optional[int] = None) -> ThicknessReport:
    """Finite-depth view of sup_w min{|v|-|w| : v in T_w, K_v ⊆ O_w}.

    Cells with |w| ≤ depth are examined against the whole horizon. The bound is reported
    unbounded when some cell has no such v within the horizon, or when the per-level
    maxima keep rising.
    """
    depth = family.max_depth // 2 if depth is None else depth
    if depth > family.max_depth:
        raise DepthExceeded(f"depth {depth} beyond max_depth {family.max_depth}")
    per_level, worst, best = [], None, -1
    missing = False
    for m in range(depth + 1):
        level_max = 0
        for w in family.level_cells(m):
            k = _inner_depth(family, w)
            if k is None:
                logger.info("no inner cell below %s within the horizon", format_address(w) or "root")
                missing, worst = True, w
                break
            if k > level_max:
                level_max = k
            if k > best:
                best, worst = k, w
        if missing:
            break
        per_level.append(level_max)
    tail = per_level[1:]
    rising = len(tail) >= 3 and tail[-3] < tail[-2] < tail[-1]
    unbounded = missing or rising
    return ThicknessReport(bound=None if unbounded else best, per_level=per_level,
                           unbounded=unbounded, worst=worst)


@dataclass
class WeightCheck:
    g1: bool
    g2: bool
    g3: bool
    level_maxima: List[Exact]
    violations: List[str]

    @property
    def holds(self) -> bool:
        return self.g1 and self.g2 and self.g3


def check_weight(g: WeightFunction, family: PartitionFamily, depth: int) -> WeightCheck:
    """Check g(root) = 1, monotonicity along parents and decreasing level maxima."""
    violations = []
    g1 = g.squared(ROOT) == 1
    if not g1:
        violations.append(f"g(root) = {g.magnitude(ROOT)}")
    g2 = True
    maxima = [g.magnitude(ROOT)]
    for m in range(1, depth + 1):
        cells = family.level_cells(m)
        for w in cells:
            if g.squared(w) > g.squared(parent(w)):
                g2 = False
                violations.append(f"g({format_address(w)}) exceeds its parent")
            if g.squared(w) <= 0:
                g2 = False
                violations.append(f"g({format_address(w)}) is not positive")
        if cells:
            maxima.append(max(g.magnitude(w) for w in cells))
    g3 = all(b < a for a, b in zip(maxima, maxima[1:]))
    if not g3:
        violations.append("level maxima do not strictly decrease: " + ", ".join(str(x) for x in maxima))
    return WeightCheck(g1=g1, g2=g2, g3=g3, level_maxima=maxima, violations=violations)
