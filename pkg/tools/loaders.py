# tools/loaders.py

import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import dotenv
import pandas as pd

from fractal.geometry import Point, parse_fraction, parse_point
from fractal.tree import Address, parse_address
from protocol.config import RunConfig
from utils.errors import ConfigError

logger = logging.getLogger("confdim.tools")

THREADS_ENV = "CONFDIM_THREADS"


def load_config(path: str) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Args:
        path (str): path to the JSON file.

    Returns:
        RunConfig: the validated configuration.

    Raises:
        ConfigError: if the file cannot be read.
        pydantic.ValidationError: if the content does not validate.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.model_validate_json(text)


def apply_overrides(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Flags win over file values; None means 'not given'. The result is validated again."""
    given = {k: v for k, v in overrides.items() if v is not None}
    if not given:
        return config
    data = config.model_dump()
    for key, value in given.items():
        # "family.max_depth" reaches into the nested family spec
        *path, leaf = key.split(".")
        target = data
        for part in path:
            target = target[part]
        target[leaf] = value
    return RunConfig.model_validate(data)


def resolve_threads(config: RunConfig) -> int:
    if config.threads is not None:
        return config.threads
    dotenv.load_dotenv()
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer")
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1, got {threads}")
    return threads


def _read_table(path: str, columns: List[str]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path, dtype=str, comment="#", skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ConfigError(f"{path} lacks column(s) {missing}; found {list(df.columns)}")
    return df


def load_points(path: str) -> List[Point]:
    """Point cloud CSV: one coordinate per column (x, y, ...), rationals as 'num/den'."""
    try:
        df = pd.read_csv(path, dtype=str, comment="#", skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return [tuple(parse_fraction(v) for v in row) for row in df.itertuples(index=False)]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad coordinate in {path}: {exc}") from exc


def load_pairs(path: str) -> List[Tuple[Point, Point]]:
    """Pairs CSV with columns x and y, each a point such as '(1/3,0)', '1/3 0' or '1/2'."""
    df = _read_table(path, ["x", "y"])
    try:
        return [(parse_point(x), parse_point(y)) for x, y in zip(df["x"], df["y"])]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad point in {path}: {exc}") from exc


def load_weight_table(path: Optional[str]) -> Dict[Address, Fraction]:
    """Custom weight table CSV with columns address and value; the root is '' or 'root'."""
    df = _read_table(path, ["address", "value"]).fillna("")
    try:
        return {parse_address(a): parse_fraction(v) for a, v in zip(df["address"], df["value"])}
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad weight table entry in {path}: {exc}") from exc
