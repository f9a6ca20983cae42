# energy/sweep.py

import concurrent.futures
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from fractal.partition import GridFamily, PartitionFamily, SelfSimilarFamily
from fractal.tree import Address, format_address
from network.systems import CellSystem, LocalProblem, ProperSystem, RebuiltSystem, gamma, local_problem
from network.analysis import growth_rates
from utils.errors import ConfdimError
from .solvers import BoundaryValueProblem, duality_check, holder_constant, solve_energy, solve_modulus

logger = logging.getLogger("confdim.energy")

W_POLICIES = ("all", "symmetry")


@dataclass
class CellValue:
    """One (p, k, w) problem."""
    p: float
    k: int
    w: Address
    energy: Optional[float] = None
    modulus: Optional[float] = None
    residual: float = 0.0
    converged: bool = True
    exact_zero: bool = False
    vertices: int = 0
    energy_slack: Optional[float] = None
    modulus_slack: Optional[float] = None
    error: Optional[str] = None


@dataclass
class SweepRow:
    """Max over the candidate cells for one (p, k); ties go to the smallest address."""
    p: float
    k: int
    witness: Address
    energy: Optional[float]
    modulus: Optional[float]
    residual: float


@dataclass
class EnergySweep:
    system: str
    indices: Tuple[int, int, int, int]
    N1: int
    N2: int
    base_level: int
    p_grid: List[float]
    k_list: List[int]
    candidates: List[Address]
    rows: List[SweepRow] = field(default_factory=list)
    cells: List[CellValue] = field(default_factory=list)

    def row(self, p: float, k: int) -> SweepRow:
        return next(r for r in self.rows if r.p == p and r.k == k)

    def energies(self, p: float) -> Dict[int, float]:
        return {r.k: r.energy for r in self.rows if r.p == p and r.energy is not None}

    def moduli(self, p: float) -> Dict[int, float]:
        return {r.k: r.modulus for r in self.rows if r.p == p and r.modulus is not None}

    @property
    def errors(self) -> List[CellValue]:
        return [c for c in self.cells if c.error]


def pattern_key(family: GridFamily, w: Address, N1: int, N2: int, reach: int = 1) -> Tuple:
    """Γ_{N2+reach}(w) as grid offsets from w, each tagged by its ring, up to the family's symmetries.

    The outer ring holds the cells that own U2, so two cells share a key only when their
    local problems are isomorphic.
    """
    origin = family.grid_index(w)
    inner = set(gamma(family, w, N1))
    region = set(gamma(family, w, N2))
    cells = [(tuple(a - b for a, b in zip(family.grid_index(v), origin)), (v in inner) + (v in region))
             for v in gamma(family, w, N2 + reach)]
    return min(tuple(sorted((t(off), mark) for off, mark in cells)) for t in family.symmetry_transforms())


def sweep_candidates(family: PartitionFamily, base_level: int, policy: str, N1: int, N2: int,
                     reach: int = 1) -> List[Address]:
    if policy not in W_POLICIES:
        raise ValueError(f"unknown w policy {policy!r}; choose from {W_POLICIES}")
    cells = family.level_cells(base_level)
    if policy == "all":
        return cells
    if not isinstance(family, SelfSimilarFamily):
        logger.info("%s has no exact self-similarity; sweeping every cell", family.kind)
        return cells
    seen: Dict[Tuple, Address] = {}
    for w in cells:
        seen.setdefault(pattern_key(family, w, N1, N2, reach), w)
    reps = sorted(seen.values())
    logger.debug("symmetry reduction: %d of %d cells on level %d", len(reps), len(cells), base_level)
    return reps


def _solve_cell(problem: LocalProblem, p: float, measures: Sequence[str]) -> CellValue:
    cell = CellValue(p=p, k=problem.k, w=problem.w, vertices=problem.graph.number_of_nodes())
    try:
        if "energy" in measures:
            res = solve_energy(BoundaryValueProblem(problem.graph, problem.U1, problem.U2, p))
            cell.energy, cell.residual = res.value, res.residual
            cell.converged, cell.exact_zero = res.converged, res.exact_zero
        if "modulus" in measures:
            mod = solve_modulus(problem.graph, problem.U1, problem.U2, p)
            cell.modulus = mod.value
            cell.converged = cell.converged and mod.converged
            cell.residual = max(cell.residual, mod.residual)
        if cell.energy is not None and cell.modulus is not None:
            check = duality_check(problem.graph, p, cell.energy, cell.modulus)
            cell.energy_slack, cell.modulus_slack = check.energy_slack, check.modulus_slack
    except ConfdimError as exc:
        logger.warning("p=%g k=%d w=%s failed: %s", p, problem.k, format_address(problem.w), exc)
        cell.error = f"{type(exc).__name__}: {exc}"
    return cell


def _run(system: ProperSystem, family: PartitionFamily, N1: int, N2: int, p_grid: Sequence[float],
         k_list: Sequence[int], w_policy: str, base_level: int, threads: int,
         measures: Sequence[str]) -> EnergySweep:
    system.require(family)
    if not 0 <= N1 < N2:
        raise ValueError(f"need 0 <= N1 < N2, got N1={N1} N2={N2}")
    if base_level + max(k_list) > family.max_depth:
        raise ValueError(f"base level {base_level} + k {max(k_list)} exceeds max_depth {family.max_depth}")
    candidates = sweep_candidates(family, base_level, w_policy, N1, N2, system.indices[0])
    problems = {(k, w): local_problem(system, family, w, k, N1, N2) for k in k_list for w in candidates}
    jobs = [(p, k, w) for p in p_grid for k in k_list for w in candidates]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        futures = [executor.submit(_solve_cell, problems[(k, w)], p, measures) for p, k, w in jobs]
    cells = [f.result() for f in futures]

    sweep = EnergySweep(system=system.name, indices=system.indices, N1=N1, N2=N2, base_level=base_level,
                        p_grid=list(p_grid), k_list=list(k_list), candidates=candidates, cells=cells)
    key = "energy" if "energy" in measures else "modulus"
    for p in p_grid:
        for k in k_list:
            group = sorted((c for c in cells if c.p == p and c.k == k and not c.error), key=lambda c: c.w)
            if not group:
                continue
            best = group[0]
            for c in group[1:]:
                if getattr(c, key) > getattr(best, key):
                    best = c
            sweep.rows.append(SweepRow(
                p=p, k=k, witness=best.w,
                energy=max(c.energy for c in group) if "energy" in measures else None,
                modulus=max(c.modulus for c in group) if "modulus" in measures else None,
                residual=max(c.residual for c in group),
            ))
    logger.info("%s sweep on %s: %d cells, %d failed", system.name, family.describe(), len(cells), len(sweep.errors))
    return sweep


def energy_sweep(system: ProperSystem, family: PartitionFamily, N1: int, N2: int, p_grid: Sequence[float],
                 k_list: Sequence[int], w_policy: str = "all", base_level: int = 1, threads: int = 1,
                 with_modulus: bool = False) -> EnergySweep:
    """E_{p,k}(N1, N2, Ω) = max over candidate w of E_{p,k,w}."""
    measures = ("energy", "modulus") if with_modulus else ("energy",)
    return _run(system, family, N1, N2, p_grid, k_list, w_policy, base_level, threads, measures)


def modulus_sweep(system: ProperSystem, family: PartitionFamily, N1: int, N2: int, p_grid: Sequence[float],
                  k_list: Sequence[int], w_policy: str = "all", base_level: int = 1, threads: int = 1,
                  with_energy: bool = True) -> EnergySweep:
    """M_{p,k}(N1, N2, Ω); with_energy also records E_{p,k,w} and the duality slacks per cell."""
    measures = ("energy", "modulus") if with_energy else ("modulus",)
    return _run(system, family, N1, N2, p_grid, k_list, w_policy, base_level, threads, measures)


@dataclass
class SubmultiplicativityCheck:
    p: float
    k: int
    l: int
    M: int
    J: int
    combined: float
    rebuilt: float
    plain: float
    constant: float

    @property
    def bound(self) -> float:
        return self.constant * self.rebuilt * self.plain

    def holds(self, tol: float = 1e-6) -> bool:
        return self.combined <= self.bound + tol


def submultiplicativity(family: PartitionFamily, p: float, k: int, l: int, M: int = 1, J: int = 1,
                        base: Optional[ProperSystem] = None, base_level: int = 1,
                        w_policy: str = "symmetry", threads: int = 1) -> SubmultiplicativityCheck:
    """M_{p,k+l}(0,M,Ω_*^{(J)}) against C·M_{p,k}(0,M,Ω̄^{2M+J})·M_{p,l}(0,M,Ω_*^{(J)}).

    C = L_*·C_h(p, L_*^{N+1}·L0) with (N, L0) the indices of the base system.
    """
    base = base or CellSystem(1)
    N, L0, _, _ = base.indices
    L_star = growth_rates(family, M, [1]).L_star
    constant = L_star * holder_constant(p, L_star ** (N + 1) * L0)
    plain_system = CellSystem(J)
    rebuilt_system = RebuiltSystem(base, 2 * M + J)

    def top(system, depth):
        s = modulus_sweep(system, family, 0, M, [p], [depth], w_policy, base_level, threads, with_energy=False)
        values = s.moduli(p)
        return values.get(depth, math.nan)

    check = SubmultiplicativityCheck(p=p, k=k, l=l, M=M, J=J,
                                     combined=top(plain_system, k + l), rebuilt=top(rebuilt_system, k),
                                     plain=top(plain_system, l), constant=constant)
    logger.info("submultiplicativity p=%g k=%d l=%d: %.6g <= %.6g", p, k, l, check.combined, check.bound)
    return check
