# protocol/config.py

import hashlib
import json
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

P_MIN = 1.0
P_MAX = 20.0

# "a/b" strings or integers; floats are rejected so every rational stays exact
Rational = Union[str, int]

FamilyKind = Literal["interval-binary", "cantor-ternary", "square-full", "sierpinski-carpet",
                     "square-with-holes", "dyadic-cubes", "box-table"]
HoleGenerator = Literal["cantor_strips", "accumulating_strips", "framed_squares", "corner_squares"]


def _check_rational(value: Rational) -> Rational:
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    try:
        Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{value!r} is not a rational 'num/den'")
    return value


def _check_bounds(bounds: List[List[Rational]]) -> List[List[Rational]]:
    for pair in bounds:
        if len(pair) != 2:
            raise ValueError(f"bounds {pair} must be [lo, hi]")
        lo, hi = (Fraction(str(_check_rational(v)).strip()) for v in pair)
        if lo > hi:
            raise ValueError(f"bounds {pair} are reversed")
    return bounds


class FamilySpec(BaseModel):
    kind: FamilyKind
    max_depth: int = Field(4, ge=0, le=12)

    # square-with-holes: explicit rectangles [[x0, x1], [y0, y1]] or a named layout
    rectangles: Optional[List[List[List[Rational]]]] = None
    generator: Optional[HoleGenerator] = None
    levels: Optional[int] = Field(None, ge=1)

    # dyadic-cubes: point strings like "(1/3,1/4)" or a CSV file with x,y columns
    points: Optional[List[str]] = None
    points_path: Optional[str] = None

    # box-table: address ("" for the root) -> per-axis bounds
    boxes: Optional[Dict[str, List[List[Rational]]]] = None

    @field_validator("rectangles")
    @classmethod
    def _rectangles(cls, value):
        if value is not None:
            for rect in value:
                _check_bounds(rect)
        return value

    @field_validator("boxes")
    @classmethod
    def _boxes(cls, value):
        if value is not None:
            if "" not in value:
                raise ValueError("box table needs a root entry under the key ''")
            for bounds in value.values():
                _check_bounds(bounds)
        return value

    @model_validator(mode="after")
    def _kind_data(self):
        if self.kind == "square-with-holes" and (self.rectangles is None) == (self.generator is None):
            raise ValueError("square-with-holes needs exactly one of rectangles or generator")
        if self.kind == "dyadic-cubes" and not (self.points or self.points_path):
            raise ValueError("dyadic-cubes needs points or points_path")
        if self.kind == "box-table":
            if not self.boxes:
                raise ValueError("box-table needs boxes")
            self.max_depth = max(len([d for d in a.split(".") if d]) for a in self.boxes)
        return self


class WeightSpec(BaseModel):
    form: Literal["geometric", "product", "measure", "metric", "table"] = "geometric"
    r: Optional[Rational] = None  # geometric ratio; defaults to the family's contraction
    rates: Optional[Dict[int, Rational]] = None  # per-digit ratios (product) or masses (measure)
    normalize: bool = True
    table_path: Optional[str] = None
    tail_ratio: Rational = "1/2"

    @field_validator("r", "tail_ratio")
    @classmethod
    def _rational(cls, value):
        return value if value is None else _check_rational(value)

    @field_validator("rates")
    @classmethod
    def _rates(cls, value):
        if value is not None:
            for v in value.values():
                _check_rational(v)
        return value

    @model_validator(mode="after")
    def _form_data(self):
        if self.form in ("product", "measure") and not self.rates:
            raise ValueError(f"{self.form} weight needs rates")
        if self.form == "table" and not self.table_path:
            raise ValueError("table weight needs table_path")
        return self


class RunConfig(BaseModel):
    family: FamilySpec
    weight: WeightSpec = Field(default_factory=WeightSpec)
    system: Literal["cell", "edge", "corner"] = "cell"
    N: int = Field(1, ge=1)
    N1: int = Field(0, ge=0)
    N2: int = Field(2, ge=1)
    base_level: int = Field(1, ge=0)
    p_grid: List[float] = [2.0]
    k_list: Optional[List[int]] = None
    k_window: Optional[List[int]] = None
    w_policy: Literal["all", "symmetry"] = "symmetry"
    p_bracket: Tuple[float, float] = (1.1, 4.0)
    tol: float = Field(0.01, gt=0)
    m_star: int = Field(1, ge=1)
    seed: int = 0
    samples: int = Field(50, ge=1)
    threads: Optional[int] = Field(None, ge=1)
    output_dir: str = "out"
    log_level: Literal["info", "debug"] = "info"
    verbosity: int = Field(1, ge=0, le=2)

    # metric
    M: int = Field(1, ge=0)
    pairs_path: Optional[str] = None
    pair_count: int = Field(200, ge=1)
    metric_depth: Optional[int] = Field(None, ge=0)

    # partition
    kappa: Optional[Rational] = None

    # resolution
    resolution_levels: Optional[int] = Field(None, ge=1)
    scan_cutoff: Optional[int] = Field(8, ge=1)
    rearranged: bool = False

    # network
    network_levels: Optional[List[int]] = None
    growth_depths: Optional[List[int]] = None

    # energy / modulus
    with_modulus: bool = False
    submultiplicativity: bool = False

    @field_validator("p_grid")
    @classmethod
    def _p_grid(cls, value):
        if not value:
            raise ValueError("p_grid is empty")
        for p in value:
            if not P_MIN < p <= P_MAX:
                raise ValueError(f"p={p} outside ({P_MIN:g}, {P_MAX:g}]")
        return sorted(set(value))

    @field_validator("p_bracket")
    @classmethod
    def _p_bracket(cls, value):
        low, high = value
        if not P_MIN < low < high <= P_MAX:
            raise ValueError(f"p_bracket {value} must satisfy {P_MIN:g} < low < high <= {P_MAX:g}")
        return value

    @field_validator("k_list", "k_window", "network_levels", "growth_depths")
    @classmethod
    def _positive_depths(cls, value):
        if value is not None:
            if not value:
                raise ValueError("depth list is empty")
            if any(k < 1 for k in value):
                raise ValueError(f"depths must be at least 1, got {value}")
            return sorted(set(value))
        return value

    @field_validator("kappa")
    @classmethod
    def _kappa(cls, value):
        return value if value is None else _check_rational(value)

    @model_validator(mode="after")
    def _depths(self):
        if not self.N2 > self.N1:
            raise ValueError(f"need N2 > N1, got N1={self.N1} N2={self.N2}")
        if self.N2 < self.N1 + self.m_star:
            raise ValueError(f"N2={self.N2} must be at least N1 + m_star = {self.N1 + self.m_star}")
        H = self.family.max_depth
        if self.base_level > H:
            raise ValueError(f"base_level {self.base_level} exceeds max_depth {H}")
        for name in ("k_list", "k_window"):
            ks = getattr(self, name)
            if ks and self.base_level + max(ks) > H:
                raise ValueError(f"base_level + max({name}) = {self.base_level + max(ks)} exceeds max_depth {H}")
        if self.k_window and self.k_list and not set(self.k_window) <= set(self.k_list):
            raise ValueError("k_window must be a subset of k_list")
        for name in ("metric_depth", "resolution_levels"):
            value = getattr(self, name)
            if value is not None and value > H:
                raise ValueError(f"{name}={value} exceeds max_depth {H}")
        for name in ("network_levels", "growth_depths"):
            values = getattr(self, name)
            if values and max(values) > H:
                raise ValueError(f"{name} reach depth {max(values)} beyond max_depth {H}")
        return self

    # -- derived defaults ------------------------------------------------------------------
    def depths(self) -> List[int]:
        """k_list, or every k the depth cap allows above base_level."""
        if self.k_list:
            return list(self.k_list)
        return list(range(1, self.family.max_depth - self.base_level + 1))

    def window(self) -> List[int]:
        return list(self.k_window) if self.k_window else self.depths()

    def levels(self) -> List[int]:
        if self.network_levels:
            return list(self.network_levels)
        return list(range(1, min(2, self.family.max_depth) + 1))

    def caps(self) -> Dict[str, int]:
        """Depth caps written into every output header."""
        caps = {"max_depth": self.family.max_depth, "base_level": self.base_level}
        if self.metric_depth is not None:
            caps["metric_depth"] = self.metric_depth
        if self.resolution_levels is not None:
            caps["resolution_levels"] = self.resolution_levels
        return caps


# Fields that never change a computed value.
_UNHASHED = {"output_dir", "log_level", "verbosity", "threads"}


def config_hash(config: RunConfig) -> str:
    """sha256 of the canonical JSON dump (sorted keys, no whitespace)."""
    data = config.model_dump(mode="json", exclude=_UNHASHED)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
