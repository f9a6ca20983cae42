# energy/solvers.py

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.optimize import minimize
from scipy.sparse.linalg import spsolve

from utils.errors import InadmissibleInput, InvalidP, InvalidProblem

logger = logging.getLogger("confdim.energy")

P_MIN, P_MAX = 1.0, 20.0
EPSILON_SCHEDULE = tuple(10.0 ** -j for j in range(2, 9))
ENERGY_TOL = 1e-9
MODULUS_TOL = 1e-7

_SOURCE, _SINK = ("__source__",), ("__sink__",)


def check_p(p: float) -> float:
    p = float(p)
    if not (P_MIN < p <= P_MAX):
        raise InvalidP(f"p must lie in ({P_MIN:g}, {P_MAX:g}], got {p:g}")
    return p


def holder_constant(p: float, n: int) -> float:
    """C_h(p, n) = max(n^(p-1), 1)."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return max(float(n) ** (p - 1.0), 1.0)


def max_degree(graph: nx.Graph) -> int:
    """L(V, E)."""
    return max((d for _, d in graph.degree), default=0)


def energy_eval(f: Mapping[Hashable, float], graph: nx.Graph, p: float) -> float:
    """E_p(f); each undirected edge is stored once, so no factor 1/2."""
    return float(sum(abs(f[a] - f[b]) ** p for a, b in graph.edges))


@dataclass
class BoundaryValueProblem:
    graph: nx.Graph
    U1: FrozenSet[Hashable]
    U2: FrozenSet[Hashable]
    p: float

    def __post_init__(self):
        self.p = check_p(self.p)
        self.U1, self.U2 = frozenset(self.U1), frozenset(self.U2)
        if self.U1 & self.U2:
            raise InvalidProblem("U1 and U2 must be disjoint")
        missing = [v for v in self.U1 | self.U2 if v not in self.graph]
        if missing:
            raise InvalidProblem(f"{len(missing)} boundary vertices are not in the graph")


@dataclass
class EnergyResult:
    value: float
    minimizer: Dict[Hashable, float]
    residual: float = 0.0
    exact_zero: bool = False
    converged: bool = True
    iterations: int = 0


class _Smoothed:
    """Σ (Δ_e² + ε²)^{p/2} over the edges, as a function of the free values."""

    def __init__(self, n: int, edges: np.ndarray, free: np.ndarray, base: np.ndarray, p: float):
        rows = np.repeat(np.arange(len(edges)), 2)
        cols = edges.ravel()
        vals = np.tile([1.0, -1.0], len(edges))
        self.B = sparse.csr_matrix((vals, (rows, cols)), shape=(len(edges), n))
        self.Bf = self.B[:, free].tocsc()
        self.free = free
        self.base = base
        self.p = p

    def full(self, x: np.ndarray) -> np.ndarray:
        f = self.base.copy()
        f[self.free] = x
        return f

    def value(self, x: np.ndarray, eps: float) -> float:
        d = self.B @ self.full(x)
        return float(np.sum((d * d + eps * eps) ** (self.p / 2)))

    def derivatives(self, x: np.ndarray, eps: float):
        d = self.B @ self.full(x)
        s = d * d + eps * eps
        p = self.p
        first = p * d * s ** (p / 2 - 1)
        second = p * s ** (p / 2 - 2) * ((p - 1) * d * d + eps * eps)
        grad = self.Bf.T @ first
        hess = (self.Bf.T @ sparse.diags(second) @ self.Bf).tocsc()
        return grad, hess


def _newton_stage(fn: _Smoothed, x: np.ndarray, eps: float, tol: float, max_iter: int):
    """Damped Newton with Armijo backtracking, iterates kept in [0,1]."""
    decrement = math.inf
    for it in range(1, max_iter + 1):
        grad, hess = fn.derivatives(x, eps)
        diag = hess.diagonal()
        mu = 1e-10 * (float(np.mean(diag)) if len(diag) else 1.0)
        step = spsolve(hess + mu * sparse.identity(len(x), format="csc"), -grad)
        step = np.atleast_1d(step)
        current = fn.value(x, eps)
        slope = float(grad @ step)
        decrement = abs(slope) / max(current, 1e-300)
        if decrement <= tol:
            return x, decrement, it, True
        t = 1.0
        while t > 1e-12:
            trial = np.clip(x + t * step, 0.0, 1.0)
            if fn.value(trial, eps) <= current + 1e-4 * t * slope:
                break
            t /= 2
        else:
            return x, decrement, it, False
        x = trial
    return x, decrement, max_iter, False


def solve_energy(bvp: BoundaryValueProblem, tol: float = ENERGY_TOL, max_iter: int = 200) -> EnergyResult:
    """Minimize E_p over f = 1 on U1, f = 0 on U2.

    Components meeting only one boundary set take that set's value; components meeting
    neither are set to 0. The rest is solved by ε-continuation on the smoothed functional.
    """
    graph, p = bvp.graph, bvp.p
    nodes = list(graph.nodes)
    index = {v: i for i, v in enumerate(nodes)}
    values = np.zeros(len(nodes))
    free: List[int] = []
    bridged = False
    for comp in nx.connected_components(graph):
        ones, zeros = comp & bvp.U1, comp & bvp.U2
        inner = [index[v] for v in comp if v not in bvp.U1 and v not in bvp.U2]
        for v in ones:
            values[index[v]] = 1.0
        if ones and zeros:
            bridged = True
            free.extend(inner)
        elif ones:
            values[inner] = 1.0
    if not bridged:
        minimizer = {v: float(values[index[v]]) for v in nodes}
        return EnergyResult(value=energy_eval(minimizer, graph, p), minimizer=minimizer, exact_zero=True)
    if not free:
        minimizer = {v: float(values[index[v]]) for v in nodes}
        return EnergyResult(value=energy_eval(minimizer, graph, p), minimizer=minimizer)

    free_idx = np.array(sorted(free))
    edges = np.array([(index[a], index[b]) for a, b in graph.edges], dtype=int)
    fn = _Smoothed(len(nodes), edges, free_idx, values, p)
    x = np.full(len(free_idx), 0.5)
    total, residual, converged = 0, math.inf, False
    for eps in EPSILON_SCHEDULE:
        x, residual, used, converged = _newton_stage(fn, x, eps, tol, max_iter)
        total += used
        logger.debug("energy p=%g eps=%g: %d iterations, decrement %.3g", p, eps, used, residual)
    if not converged:
        logger.warning("energy solver p=%g stopped with decrement %.3g after %d iterations", p, residual, total)
    f = fn.full(x)
    minimizer = {v: float(f[index[v]]) for v in nodes}
    return EnergyResult(value=energy_eval(minimizer, graph, p), minimizer=minimizer, residual=float(residual),
                        converged=converged, iterations=total)


# -- modulus -------------------------------------------------------------------------------
@dataclass
class ModulusResult:
    value: float
    density: Dict[Hashable, float]
    active_curves: List[Tuple[Hashable, ...]] = field(default_factory=list)
    residual: float = 0.0
    converged: bool = True
    no_curve: bool = False


def _curve_graph(graph: nx.Graph, U1: FrozenSet, U2: FrozenSet) -> nx.DiGraph:
    """Source -> x(1) -> ... -> x(m) -> sink, with x(1) next to U1 and x(m) next to U2.

    Node weights are charged on entering a vertex, so only x(1..m) count.
    """
    D = nx.DiGraph()
    D.add_node(_SOURCE)
    D.add_node(_SINK)
    for a, b in graph.edges:
        for x, y in ((a, b), (b, a)):
            D.add_edge(x, y)
            if x in U1:
                D.add_edge(_SOURCE, y)
            if y in U2:
                D.add_edge(x, _SINK)
    return D


def _touching(graph: nx.Graph, U1: FrozenSet, U2: FrozenSet) -> bool:
    return any((a in U1 and b in U2) or (a in U2 and b in U1) for a, b in graph.edges)


def _lightest_curve(D: nx.DiGraph, density: Mapping) -> Tuple[float, Tuple]:
    dist, path = nx.single_source_dijkstra(D, _SOURCE, _SINK, weight=lambda u, v, d: density.get(v, 0.0))
    return float(dist), tuple(path[1:-1])


def _restricted_dual(A: sparse.csr_matrix, p: float, lam0: np.ndarray):
    """Maximize Σλ − (p−1)Σ(s/p)^q, s = Aᵀλ, over λ ≥ 0; f = (s/p)^{1/(p−1)}."""
    q = p / (p - 1.0)

    def objective(lam):
        s = A.T @ lam
        f = (s / p) ** (1.0 / (p - 1.0))
        value = -float(lam.sum()) + (p - 1.0) * float(np.sum((s / p) ** q))
        return value, A @ f - 1.0

    res = minimize(objective, lam0, jac=True, method="L-BFGS-B", bounds=[(0.0, None)] * len(lam0),
                   options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000})
    lam = np.maximum(res.x, 0.0)
    s = A.T @ lam
    return lam, (s / p) ** (1.0 / (p - 1.0)), -float(res.fun)


def solve_modulus(graph: nx.Graph, U1: Iterable, U2: Iterable, p: float, tol: float = MODULUS_TOL,
                  max_rounds: int = 2000) -> ModulusResult:
    """Mod_p of the curves joining U1 to U2, by constraint generation.

    A curve is x(1..m), m >= 1, with x(0) in U1 and x(m+1) in U2 outside the sum. Unless an
    edge joins U1 to U2 directly, the optimal density vanishes on U1 ∪ U2.
    """
    p = check_p(p)
    U1, U2 = frozenset(U1), frozenset(U2)
    if U1 & U2:
        raise InvalidProblem("U1 and U2 must be disjoint")
    D = _curve_graph(graph, U1, U2)
    if not nx.has_path(D, _SOURCE, _SINK):
        return ModulusResult(value=0.0, density={v: 0.0 for v in graph.nodes}, no_curve=True)

    interior = sorted((v for v in D.nodes if v not in (_SOURCE, _SINK)), key=repr)
    column = {v: i for i, v in enumerate(interior)}
    curves: List[Tuple] = [tuple(nx.shortest_path(D, _SOURCE, _SINK)[1:-1])]
    seen = set(curves)
    lam = np.ones(1)
    f = np.zeros(len(interior))
    lower, converged, rounds = 0.0, False, 0
    for rounds in range(1, max_rounds + 1):
        rows = [i for i, c in enumerate(curves) for _ in c]
        cols = [column[v] for c in curves for v in c]
        A = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(curves), len(interior)))
        lam, f, lower = _restricted_dual(A, p, lam)
        worst = float((A @ f).min())
        if 0 < worst < 1:
            f = f / worst
        density = {v: float(f[column[v]]) for v in interior}
        length, curve = _lightest_curve(D, density)
        if length >= 1 - tol:
            converged = True
            break
        if curve in seen:
            logger.warning("modulus separation repeated a curve at length %.3g", length)
            break
        seen.add(curve)
        curves.append(curve)
        lam = np.append(lam, 0.0)
    if not converged:
        logger.warning("modulus p=%g stopped after %d rounds with %d curves", p, rounds, len(curves))
    upper = float(np.sum(f ** p))
    density = {v: 0.0 for v in graph.nodes}
    density.update({v: float(f[column[v]]) for v in interior})
    active = [c for c in curves if sum(density[v] for v in c) <= 1 + 1e-6]
    logger.debug("modulus p=%g: %d curves, value %.6g, dual %.6g", p, len(curves), upper, lower)
    return ModulusResult(value=upper, density=density, active_curves=active,
                         residual=(upper - lower) / upper if upper > 0 else 0.0, converged=converged)


# -- transfer maps -------------------------------------------------------------------------
def transfer_F(f: Mapping[Hashable, float], graph: nx.Graph, U1: Iterable, U2: Iterable,
               tol: float = 1e-9) -> Dict[Hashable, float]:
    """F(f)(x): lightest f-weight of a path from U2 to x, capped at 1.

    f is first zeroed on U1 ∪ U2, which keeps it admissible.
    """
    U1, U2 = frozenset(U1), frozenset(U2)
    if any(f.get(v, 0.0) < -tol for v in graph.nodes):
        raise InadmissibleInput("density must be nonnegative")
    if _touching(graph, U1, U2):
        raise InadmissibleInput("no density is admissible when U1 and U2 are adjacent")
    fz = {v: (0.0 if v in U1 or v in U2 else max(float(f.get(v, 0.0)), 0.0)) for v in graph.nodes}
    D = _curve_graph(graph, U1, U2)
    if nx.has_path(D, _SOURCE, _SINK) and _lightest_curve(D, fz)[0] < 1 - tol:
        raise InadmissibleInput("some curve joining U1 to U2 has f-length below 1")
    if not U2:
        return {v: 1.0 for v in graph.nodes}
    dist = nx.multi_source_dijkstra_path_length(graph, set(U2), weight=lambda u, v, d: fz[v])
    return {v: min(1.0, dist.get(v, math.inf)) for v in graph.nodes}


def transfer_G(g: Mapping[Hashable, float], graph: nx.Graph, U1: Iterable, U2: Iterable,
               tol: float = 1e-9) -> Dict[Hashable, float]:
    """G(g)(x) = Σ_{y ~ x} |g(x) − g(y)|."""
    U1, U2 = frozenset(U1), frozenset(U2)
    if any(g[v] < -tol for v in graph.nodes):
        raise InadmissibleInput("g must be nonnegative")
    if any(g[v] < 1 - tol for v in U1):
        raise InadmissibleInput("g must be at least 1 on U1")
    if any(abs(g[v]) > tol for v in U2):
        raise InadmissibleInput("g must vanish on U2")
    return {x: float(sum(abs(g[x] - g[y]) for y in graph.neighbors(x))) for x in graph.nodes}


@dataclass
class DualityCheck:
    L: int
    energy: float
    modulus: float
    energy_slack: float
    modulus_slack: float

    def holds(self, tol: float = 1e-6) -> bool:
        return self.energy_slack >= -tol and self.modulus_slack >= -tol


def duality_check(graph: nx.Graph, p: float, energy: float, modulus: float) -> DualityCheck:
    """Slacks of E ≤ C_h(p,2)·L·Mod and Mod ≤ 2·C_h(p,L)·E."""
    L = max_degree(graph)
    if L == 0:
        return DualityCheck(L=0, energy=energy, modulus=modulus, energy_slack=0.0, modulus_slack=0.0)
    upper_e = holder_constant(p, 2) * L * modulus
    upper_m = 2 * holder_constant(p, L) * energy
    return DualityCheck(L=L, energy=energy, modulus=modulus,
                        energy_slack=(math.inf if math.isinf(upper_e) else upper_e - energy),
                        modulus_slack=(math.inf if math.isinf(modulus) and math.isinf(upper_m) else upper_m - modulus))


@dataclass
class TransferCheck:
    F_admissible: bool
    G_admissible: bool
    F_slack: float
    G_slack: float


def transfer_check(graph: nx.Graph, U1: Iterable, U2: Iterable, p: float,
                   density: Mapping[Hashable, float], g: Mapping[Hashable, float],
                   tol: float = 1e-9) -> TransferCheck:
    """Push a modulus density through F and an energy function through G and test both bounds."""
    U1, U2 = frozenset(U1), frozenset(U2)
    L = max(max_degree(graph), 1)
    F = transfer_F(density, graph, U1, U2, tol)
    F_ok = all(F[v] >= 1 - tol for v in U1) and all(F[v] <= tol for v in U2)
    F_slack = holder_constant(p, 2) * L * sum(density.get(v, 0.0) ** p for v in graph.nodes
                                               if v not in U1 and v not in U2) - energy_eval(F, graph, p)
    G = transfer_G(g, graph, U1, U2, tol)
    D = _curve_graph(graph, U1, U2)
    G_ok = (not nx.has_path(D, _SOURCE, _SINK)) or _lightest_curve(D, G)[0] >= 1 - tol
    G_slack = 2 * holder_constant(p, L) * energy_eval(g, graph, p) - sum(v ** p for v in G.values())
    return TransferCheck(F_admissible=F_ok, G_admissible=G_ok, F_slack=F_slack, G_slack=G_slack)
