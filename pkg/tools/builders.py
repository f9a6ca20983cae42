# tools/builders.py

import logging
from fractions import Fraction
from typing import Dict, List

from fractal import weight as weights
from fractal.geometry import Box, parse_fraction, parse_point
from fractal.holes import generated_family, holes_family
from fractal.partition import BoxTableFamily, DyadicCubeFamily, PartitionFamily, SelfSimilarFamily
from fractal.tree import parse_address
from fractal.weight import WeightFunction
from network.systems import ProperSystem, make_system
from protocol.config import FamilySpec, RunConfig, WeightSpec
from utils.errors import ConfdimError, ConfigError
from .loaders import load_points, load_weight_table

logger = logging.getLogger("confdim.tools")

SELF_SIMILAR = ("interval-binary", "cantor-ternary", "square-full", "sierpinski-carpet")


def _box(bounds: List[List]) -> Box:
    return Box.from_bounds(*[(parse_fraction(lo), parse_fraction(hi)) for lo, hi in bounds])


def build_family(spec: FamilySpec) -> PartitionFamily:
    """
    Turn a validated FamilySpec into a partition family.

    Args:
        spec (FamilySpec): family section of the run configuration.

    Returns:
        PartitionFamily: the family, truncated at spec.max_depth.

    Raises:
        ConfigError: when the data is well-formed but does not describe a valid family
            (HoleLayoutError for rectangle layouts).
    """
    try:
        if spec.kind in SELF_SIMILAR:
            family = SelfSimilarFamily(spec.kind, spec.max_depth)
        elif spec.kind == "square-with-holes":
            if spec.generator:
                family = generated_family(spec.generator, spec.max_depth, spec.levels)
            else:
                family = holes_family([_box(r) for r in spec.rectangles], spec.max_depth)
        elif spec.kind == "dyadic-cubes":
            points = [parse_point(p) for p in spec.points or []]
            if spec.points_path:
                points += load_points(spec.points_path)
            family = DyadicCubeFamily(points, spec.max_depth)
        else:
            family = BoxTableFamily({parse_address(a): _box(b) for a, b in spec.boxes.items()})
    except ConfdimError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid {spec.kind} family: {exc}") from exc
    logger.info("family %s", family.describe())
    return family


def build_weight(spec: WeightSpec, family: PartitionFamily) -> WeightFunction:
    """Geometric weights default to h_r with r the family's contraction ratio."""
    try:
        if spec.form == "geometric":
            r = parse_fraction(spec.r) if spec.r is not None else family.contraction
            if r is None:
                raise ConfigError(f"{family.kind} has no contraction ratio; give weight.r")
            return weights.geometric(r)
        rates: Dict[int, Fraction] = {d: parse_fraction(v) for d, v in (spec.rates or {}).items()}
        if spec.form == "product":
            return weights.product(rates)
        if spec.form == "measure":
            return weights.measure(rates)
        if spec.form == "metric":
            return weights.metric(family, normalize=spec.normalize)
        return weights.table(load_weight_table(spec.table_path), tail_ratio=parse_fraction(spec.tail_ratio))
    except ConfdimError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid {spec.form} weight: {exc}") from exc


def build_system(config: RunConfig) -> ProperSystem:
    return make_system(config.system, config.N)
