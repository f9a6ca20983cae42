# protocol/results.py

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel

TOOL = "confdim"
VERSION = "0.3.0"


class OutputHeader(BaseModel):
    tool: str = TOOL
    version: str = VERSION
    config_hash: str
    caps: Dict[str, int] = {}

    def lines(self) -> List[str]:
        out = [f"# tool: {self.tool}", f"# version: {self.version}", f"# config_hash: {self.config_hash}"]
        out.extend(f"# {k}: {v}" for k, v in sorted(self.caps.items()))
        return out


class ErrorReport(BaseModel):
    kind: str  # exception class, e.g. "HoleLayoutError" or "ValidationError"
    message: str
    exit_code: Literal[2, 3]


# -- partition -------------------------------------------------------------------------------
class MinimalityRecord(BaseModel):
    depth: int
    all_minimal: bool
    violating: List[str] = []


class ThicknessRecord(BaseModel):
    bound: Optional[int] = None
    per_level: List[int] = []
    unbounded: bool = False
    worst: Optional[str] = None


class WeightCheckRecord(BaseModel):
    weight: str
    holds: bool
    level_maxima: List[str]
    violations: List[str] = []


class RectangleRecord(BaseModel):
    index: int
    rectangle: str
    kappa_rect: str
    verdict: Literal["R0", "R1", "neither"]
    witness: Optional[str] = None
    witness_kappa: Optional[str] = None


class PartitionReport(BaseModel):
    family: str
    kind: str
    max_depth: int
    cells_per_level: Dict[int, int]
    minimality: MinimalityRecord
    pruned: List[str] = []
    p1_holds: bool
    p1_violating: List[str] = []
    weight_check: Optional[WeightCheckRecord] = None
    thickness: Optional[ThicknessRecord] = None
    sq4: Optional[List[RectangleRecord]] = None
    kappa: Optional[str] = None


# -- metric ----------------------------------------------------------------------------------
class SeparationRecord(BaseModel):
    M: int
    violated: bool
    witnesses: int
    trace: List[List[Optional[str]]] = []


class MetricReport(BaseModel):
    weight: str
    M: int
    pairs: int
    unresolved: int
    c_ada: Optional[str] = None
    c_adb: Optional[str] = None
    adapted: Optional[bool] = None
    separation: Optional[SeparationRecord] = None


# -- resolution ------------------------------------------------------------------------------
class ResolutionReport(BaseModel):
    levels: int
    vertices: int
    horizontal_edges: int
    vertical_edges: int
    max_bound: int
    per_level: Dict[int, int]
    truncated: bool
    witnesses: List[str] = []
    eta: str
    eta_samples: int
    vertical_violations: List[str] = []
    bridge_checked: int = 0
    bridge_violations: List[str] = []


# -- network ---------------------------------------------------------------------------------
class LevelRecord(BaseModel):
    level: int
    vertices: int
    edges: int
    n1: bool
    n2: bool
    n3: bool
    n3_max: int
    n4: bool
    n5: bool
    n5_checked: int
    n5_failures: List[str] = []


class GrowthRecord(BaseModel):
    L_star: int
    N_star: int
    volume_counts: Dict[int, int]
    cell_counts: Dict[int, int]
    N_upper: float
    N_lower: float
    volume_bound_upper: Optional[float] = None
    volume_bound_lower: Optional[float] = None
    reduction_consistent: bool


class NetworkReport(BaseModel):
    system: str
    indices: List[int]
    holds: bool
    observed_l0: int
    levels: List[LevelRecord]
    growth: Optional[GrowthRecord] = None


# -- energy / modulus ------------------------------------------------------------------------
class SubmultiplicativityRecord(BaseModel):
    p: float
    k: int
    l: int
    combined: float
    rebuilt: float
    plain: float
    constant: float
    bound: float
    holds: bool


class SweepReport(BaseModel):
    measure: Literal["energy", "modulus"]
    system: str
    indices: List[int]
    N1: int
    N2: int
    base_level: int
    p_grid: List[float]
    k_list: List[int]
    candidates: List[str]
    cells: int
    failures: List[str] = []
    unconverged: int = 0
    min_energy_slack: Optional[float] = None
    min_modulus_slack: Optional[float] = None
    duality_holds: Optional[bool] = None
    submultiplicativity: List[SubmultiplicativityRecord] = []


# -- dimension -------------------------------------------------------------------------------
class TraceRecord(BaseModel):
    p: float
    rate: float
    all_zero: bool
    low: float
    high: float


class SpectralRecord(BaseModel):
    p: float
    rate: float
    N_bar: float
    d: float
    identity_residual: float


class DichotomyRecord(BaseModel):
    p: float
    rate: float
    d: float
    branch: Literal["upper", "lower", "boundary"]
    consistent: bool


class PositivityRecord(BaseModel):
    p: float
    energy_floor: Optional[float] = None
    modulus_floor: Optional[float] = None
    floor: float
    positive: bool
    decay: Optional[float] = None


class DimensionReport(BaseModel):
    family: str
    system: str
    N1: int
    N2: int
    k_window: List[int]
    degenerate: bool
    p_low: float
    p_high: float
    p_star: Optional[float] = None
    volume_bound: Optional[float] = None
    volume_bound_lower: Optional[float] = None
    N_upper: Optional[float] = None
    within_volume_bound: bool = True
    spectral: Optional[SpectralRecord] = None
    dichotomy: List[DichotomyRecord] = []
    positivity: Optional[PositivityRecord] = None
    trace: List[TraceRecord] = []
    note: str = ("the estimate is the crossing R_p = 1 at finite depth; it does not separate "
                 "inf{p : R_p < 1} from max{p : R_p = 1}")


# -- validate --------------------------------------------------------------------------------
class ValidateReport(BaseModel):
    family: str
    checks: Dict[str, bool]
    details: Dict[str, str] = {}

    @property
    def holds(self) -> bool:
        return all(self.checks.values())
