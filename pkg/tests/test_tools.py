# tests/test_tools.py

import json
import sys
from fractions import Fraction as F
from pathlib import Path

import pandas as pd
import pytest
from pydantic import ValidationError

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from fractal.partition import DyadicCubeFamily, SelfSimilarFamily, SquareWithHolesFamily
from protocol.config import FamilySpec, RunConfig, WeightSpec
from protocol.results import ErrorReport, OutputHeader, ThicknessRecord
from tools import (
    OutputWriter,
    apply_overrides,
    build_family,
    build_system,
    build_weight,
    exact_text,
    load_config,
    load_pairs,
    load_points,
    load_weight_table,
    resolve_threads,
)
from utils.errors import ConfigError, HoleLayoutError


@pytest.fixture
def config():
    return RunConfig.model_validate({"family": {"kind": "sierpinski-carpet", "max_depth": 3}})


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"family": {"kind": "square-full", "max_depth": 2}, "p_grid": [2, 3]}))
    config = load_config(str(path))
    assert config.family.kind == "square-full"
    assert config.p_grid == [2.0, 3.0]


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"family": {"kind": "menger-sponge"}}))
    with pytest.raises(ValidationError):
        load_config(str(bad))


def test_overrides_reach_nested_fields(config):
    updated = apply_overrides(config, {"family.max_depth": 4, "p_grid": [2.5], "N1": None})
    assert updated.family.max_depth == 4
    assert updated.p_grid == [2.5]
    assert updated.N1 == config.N1
    assert apply_overrides(config, {"N2": None}) is config


def test_overrides_are_validated(config):
    with pytest.raises(ValidationError):
        apply_overrides(config, {"p_grid": [0.5]})


def test_threads_from_the_environment(config, monkeypatch):
    monkeypatch.setenv("CONFDIM_THREADS", "3")
    assert resolve_threads(config) == 3
    assert resolve_threads(config.model_copy(update={"threads": 2})) == 2
    monkeypatch.setenv("CONFDIM_THREADS", "zero")
    with pytest.raises(ConfigError):
        resolve_threads(config)
    monkeypatch.setenv("CONFDIM_THREADS", "0")
    with pytest.raises(ConfigError):
        resolve_threads(config)


def test_load_pairs(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text('x,y\n"(0,0)","(1/3,0)"\n1/2,3/4\n')
    assert load_pairs(str(path)) == [((F(0), F(0)), (F(1, 3), F(0))), ((F(1, 2),), (F(3, 4),))]


def test_load_pairs_needs_both_columns(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("x\n1/2\n")
    with pytest.raises(ConfigError):
        load_pairs(str(path))


def test_load_points(tmp_path):
    path = tmp_path / "points.csv"
    path.write_text("# sample cloud\nx,y\n1/3,1/4\n0,1\n")
    assert load_points(str(path)) == [(F(1, 3), F(1, 4)), (F(0), F(1))]


def test_load_weight_table(tmp_path):
    path = tmp_path / "weights.csv"
    path.write_text("address,value\n,1\n0,1/2\n0.1,1/8\n")
    assert load_weight_table(str(path)) == {(): F(1), (0,): F(1, 2), (0, 1): F(1, 8)}
    path.write_text("address,value\n0,0.5.1\n")
    with pytest.raises(ConfigError):
        load_weight_table(str(path))


def test_build_families():
    assert isinstance(build_family(FamilySpec(kind="sierpinski-carpet", max_depth=2)), SelfSimilarFamily)
    holes = build_family(FamilySpec(kind="square-with-holes", generator="cantor_strips", max_depth=2))
    assert isinstance(holes, SquareWithHolesFamily)
    dyadic = build_family(FamilySpec(kind="dyadic-cubes", points=["(1/3,1/4)", "(3/4,3/4)"], max_depth=2))
    assert isinstance(dyadic, DyadicCubeFamily)


def test_overlapping_rectangles_are_a_layout_error():
    spec = FamilySpec(kind="square-with-holes", max_depth=2,
                      rectangles=[[["1/3", "2/3"], ["1/3", "2/3"]], [["5/9", "8/9"], ["5/9", "8/9"]]])
    with pytest.raises(HoleLayoutError):
        build_family(spec)


def test_build_weights():
    carpet = SelfSimilarFamily("sierpinski-carpet", 2)
    assert build_weight(WeightSpec(), carpet).exact((1,)) == F(1, 3)
    assert build_weight(WeightSpec(r="1/2"), carpet).exact((1,)) == F(1, 2)
    assert build_weight(WeightSpec(form="measure", rates={0: "1/4", 1: "3/4"}),
                        SelfSimilarFamily("interval-binary", 2)).exact((1,)) == F(3, 4)
    with pytest.raises(ConfigError):
        build_weight(WeightSpec(form="measure", rates={0: "1/4", 1: "1/4"}), carpet)


def test_build_system(config):
    assert build_system(config).indices == (1, 1, 1, 1)
    assert build_system(config.model_copy(update={"system": "corner"})).indices == (1, 5, 1, 1)


def test_output_writer(tmp_path):
    header = OutputHeader(config_hash="f" * 64, caps={"max_depth": 3})
    writer = OutputWriter(tmp_path / "out", header)
    table = writer.write_table("rates.csv", pd.DataFrame({"p": [2.0], "rate": [1 / 3]}))
    text = table.read_text().splitlines()
    assert text[:3] == ["# tool: confdim", "# version: 0.3.0", "# config_hash: " + "f" * 64]
    assert text[-1] == "2,0.333333333333"
    assert pd.read_csv(table, comment="#")["p"].tolist() == [2.0]

    report = json.loads(writer.write_json("partition.json", ThicknessRecord(bound=2)).read_text())
    assert report["header"]["caps"] == {"max_depth": 3}
    assert report["report"]["bound"] == 2

    lines = writer.write_lines("edges.txt", ["0: 1:0 v"]).read_text().splitlines()
    assert lines[-1] == "0: 1:0 v"
    assert len(writer.written) == 3


def test_error_report(tmp_path):
    path = OutputWriter(tmp_path).write_error(ErrorReport(kind="ConfigError", message="no family", exit_code=2))
    assert path.name == "error.json"
    assert json.loads(path.read_text()) == {"kind": "ConfigError", "message": "no family", "exit_code": 2}


def test_exact_text():
    assert exact_text(None) == ""
    assert exact_text(F(2, 6)) == "1/3"
