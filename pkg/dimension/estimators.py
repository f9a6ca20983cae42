# dimension/estimators.py

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from energy.sweep import EnergySweep, energy_sweep
from fractal.partition import PartitionFamily
from network.analysis import growth_rates
from network.systems import ProperSystem
from utils.errors import BracketInvalid, DivergentRate, InvalidProblem

logger = logging.getLogger("confdim.dimension")

RATE_TOL = 1e-9
IDENTITY_TOL = 1e-12


@dataclass
class RateEstimate:
    """exp of the least-squares slope of log E_{p,k} over the window."""
    p: float
    rate: float
    window: List[int]
    slope: Optional[float] = None
    residual: float = 0.0
    ratios: Dict[int, float] = field(default_factory=dict)
    all_zero: bool = False
    monotone: bool = True


def rate_from_values(p: float, values: Mapping[int, float], k_window: Optional[Sequence[int]] = None) -> RateEstimate:
    window = sorted(k_window if k_window is not None else values)
    window = [k for k in window if k in values]
    series = [values[k] for k in window]
    if all(v <= 0 for v in series):
        return RateEstimate(p=p, rate=0.0, window=window, all_zero=True)
    used = [(k, v) for k, v in zip(window, series) if v > 0]
    if len(used) < 2:
        raise InvalidProblem(f"rate at p={p:g} needs two positive values, got {len(used)}")
    ks = np.array([k for k, _ in used], dtype=float)
    logs = np.log(np.array([v for _, v in used]))
    slope, intercept = np.polyfit(ks, logs, 1)
    fitted = slope * ks + intercept
    residual = float(np.sqrt(np.mean((logs - fitted) ** 2)))
    ratios = {a: vb / va for (a, va), (_, vb) in zip(used, used[1:])}
    monotone = all(r <= 1 + RATE_TOL for r in ratios.values()) or all(r >= 1 - RATE_TOL for r in ratios.values())
    if not monotone:
        logger.warning("E_{p,k} at p=%g is not monotone in k: ratios %s", p, ratios)
    return RateEstimate(p=p, rate=float(math.exp(slope)), window=window, slope=float(slope),
                        residual=residual, ratios=ratios, monotone=monotone)


def rate(sweep: EnergySweep, p: float, k_window: Optional[Sequence[int]] = None) -> RateEstimate:
    return rate_from_values(p, sweep.energies(p), k_window)


@dataclass
class BisectionStep:
    p: float
    rate: float
    all_zero: bool
    low: float
    high: float

    @property
    def width(self) -> float:
        return self.high - self.low


@dataclass
class DimensionEstimate:
    p_low: float
    p_high: float
    p_star: Optional[float]
    trace: List[BisectionStep]
    rates: Dict[float, RateEstimate]
    upper_bound_volume: Optional[float] = None
    degenerate: bool = False
    sweeps: Dict[float, EnergySweep] = field(default_factory=dict, repr=False)

    def within_volume_bound(self, slack: float = 0.05) -> bool:
        if self.p_star is None or self.upper_bound_volume is None:
            return True
        return self.p_star <= self.upper_bound_volume + slack


def bisect_rate(evaluate: Callable[[float], RateEstimate], p_bracket: Tuple[float, float],
                tol: float = 0.01, max_iter: int = 40) -> DimensionEstimate:
    """Bisection for R_p = 1 on a rate function that is non-increasing in p."""
    low, high = p_bracket
    if not low < high:
        raise BracketInvalid(f"bracket ({low}, {high}) is empty")
    rates: Dict[float, RateEstimate] = {}

    def at(p):
        if p not in rates:
            rates[p] = evaluate(p)
        return rates[p]

    first = at(low)
    trace = [BisectionStep(p=low, rate=first.rate, all_zero=first.all_zero, low=low, high=high)]
    if first.all_zero:
        logger.info("all energies vanish at p=%g; the dimension lies below the bracket", low)
        return DimensionEstimate(p_low=low, p_high=high, p_star=None, trace=trace, rates=rates, degenerate=True)
    if first.rate < 1 - RATE_TOL:
        raise BracketInvalid(f"R at p_low={low:g} is {first.rate:.6g} < 1")
    last = at(high)
    trace.append(BisectionStep(p=high, rate=last.rate, all_zero=last.all_zero, low=low, high=high))
    if last.rate > 1 + RATE_TOL:
        raise BracketInvalid(f"R at p_high={high:g} is {last.rate:.6g} > 1")
    for _ in range(max_iter):
        if high - low <= tol:
            break
        mid = (low + high) / 2
        r = at(mid)
        if r.rate >= 1:
            low = mid
        else:
            high = mid
        trace.append(BisectionStep(p=mid, rate=r.rate, all_zero=r.all_zero, low=low, high=high))
        logger.debug("bisection p=%.6g R=%.6g bracket [%.6g, %.6g]", mid, r.rate, low, high)
    return DimensionEstimate(p_low=low, p_high=high, p_star=(low + high) / 2, trace=trace, rates=rates)


def conformal_dimension(system: ProperSystem, family: PartitionFamily, N1: int, N2: int,
                        k_window: Sequence[int], p_bracket: Tuple[float, float] = (1.1, 4.0),
                        tol: float = 0.01, m_star: int = 1, base_level: int = 1, w_policy: str = "symmetry",
                        threads: int = 1) -> DimensionEstimate:
    """Crossing R_p = 1 of the energy decay rate, bracketed by bisection."""
    if N2 < N1 + m_star:
        raise InvalidProblem(f"N2={N2} must be at least N1 + M_* = {N1 + m_star}")
    sweeps: Dict[float, EnergySweep] = {}

    def evaluate(p):
        sweeps[p] = energy_sweep(system, family, N1, N2, [p], k_window, w_policy, base_level, threads)
        return rate(sweeps[p], p, k_window)

    estimate = bisect_rate(evaluate, p_bracket, tol)
    estimate.sweeps = sweeps
    estimate.upper_bound_volume = volume_bound(family, N2, k_window)
    if estimate.p_star is not None:
        logger.info("p_* in [%.4f, %.4f] after %d evaluations", estimate.p_low, estimate.p_high, len(sweeps))
    return estimate


def volume_bound(family: PartitionFamily, N2: int, depths: Sequence[int]) -> Optional[float]:
    """−log N̄_* / log r from exact volume counts."""
    usable = [n for n in depths if 1 <= n <= family.max_depth]
    if not usable or family.contraction is None:
        return None
    return growth_rates(family, N2, usable).volume_bound_upper


@dataclass
class SpectralDimension:
    p: float
    rate: float
    N_bar: float
    d: float
    identity_residual: float


def spectral_dimension(p: float, R_p: float, N_bar: float) -> SpectralDimension:
    """d = p·log N̄ / (log N̄ − log R_p), the solution of N̄·(R_p/N̄)^{d/p} = 1."""
    if R_p <= 0:
        raise ValueError(f"rate must be positive, got {R_p}")
    if N_bar <= 1:
        raise ValueError(f"volume rate must exceed 1, got {N_bar}")
    if R_p >= N_bar:
        raise DivergentRate(f"rate {R_p:g} is not below the volume rate {N_bar:g}")
    log_n = math.log(N_bar)
    d = p * log_n / (log_n - math.log(R_p))
    residual = abs(N_bar * (R_p / N_bar) ** (d / p) - 1.0)
    if residual > IDENTITY_TOL:
        logger.warning("spectral identity residual %.3g at p=%g R=%g", residual, p, R_p)
    return SpectralDimension(p=p, rate=R_p, N_bar=N_bar, d=d, identity_residual=residual)


@dataclass
class Dichotomy:
    p: float
    rate: float
    d: float
    branch: str  # "upper": dim_AR <= d < p; "lower": dim_AR >= d >= p; "boundary": d = p
    consistent: bool


def dichotomy_report(p: float, R_p: float, d_p: float, tol: float = 1e-9) -> Dichotomy:
    if abs(R_p - 1) <= tol:
        branch, consistent = "boundary", abs(d_p - p) <= max(tol, 1e-9) * max(1.0, p)
    elif R_p < 1:
        branch, consistent = "upper", d_p < p
    else:
        branch, consistent = "lower", d_p > p
    if not consistent:
        logger.warning("d_p=%g and R_p=%g disagree at p=%g", d_p, R_p, p)
    return Dichotomy(p=p, rate=R_p, d=d_p, branch=branch, consistent=consistent)


@dataclass
class PositivityReport:
    p: float
    energy_floor: Optional[float]
    modulus_floor: Optional[float]
    energies: Dict[int, float]
    moduli: Dict[int, float]
    floor: float
    positive: bool
    decay: Optional[float] = None


def positivity_diagnostic(sweep: EnergySweep, p: float, floor: float = 1e-6) -> PositivityReport:
    """min over k of E_{p,k} and M_{p,k}; decay is last/first of the energies."""
    energies, moduli = sweep.energies(p), sweep.moduli(p)
    e_floor = min(energies.values()) if energies else None
    m_floor = min(moduli.values()) if moduli else None
    present = [v for v in (e_floor, m_floor) if v is not None]
    decay = None
    if energies:
        ks = sorted(energies)
        if energies[ks[0]] > 0:
            decay = energies[ks[-1]] / energies[ks[0]]
    return PositivityReport(p=p, energy_floor=e_floor, modulus_floor=m_floor, energies=energies, moduli=moduli,
                            floor=floor, positive=bool(present) and all(v > floor for v in present), decay=decay)
