# tests/test_energy.py

import sys
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import minimize

# Add the project root so the packages import directly
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from energy.solvers import (
    BoundaryValueProblem,
    duality_check,
    energy_eval,
    holder_constant,
    solve_energy,
    solve_modulus,
    transfer_F,
    transfer_G,
)
from energy.sweep import energy_sweep, modulus_sweep, submultiplicativity, sweep_candidates
from fractal.partition import SelfSimilarFamily
from network.systems import CellSystem
from utils.errors import InadmissibleInput, InvalidP, InvalidProblem


@pytest.fixture
def path():
    return nx.path_graph(["a", "b", "c"])


@pytest.fixture
def cycle():
    return nx.cycle_graph(["a", "b", "c", "d"])


@pytest.mark.parametrize("p, expected", [(2.0, 0.5), (3.0, 0.25)])
def test_energy_of_a_path(path, p, expected):
    result = solve_energy(BoundaryValueProblem(path, {"a"}, {"c"}, p))
    assert result.value == pytest.approx(expected, rel=1e-5)
    assert result.minimizer["b"] == pytest.approx(0.5, abs=1e-4)
    assert result.converged


def test_energy_of_a_cycle(cycle):
    result = solve_energy(BoundaryValueProblem(cycle, {"a"}, {"c"}, 2.0))
    assert result.value == pytest.approx(1.0, rel=1e-5)


def test_energy_is_exactly_zero_without_a_connection():
    graph = nx.Graph([("a", "b")])
    graph.add_node("c")
    result = solve_energy(BoundaryValueProblem(graph, {"a"}, {"c"}, 2.0))
    assert result.exact_zero
    assert result.value == 0
    assert result.minimizer == {"a": 1.0, "b": 1.0, "c": 0.0}


def test_boundary_value_problem_validation(path):
    with pytest.raises(InvalidP):
        BoundaryValueProblem(path, {"a"}, {"c"}, 1.0)
    with pytest.raises(InvalidP):
        BoundaryValueProblem(path, {"a"}, {"c"}, 21.0)
    with pytest.raises(InvalidProblem):
        BoundaryValueProblem(path, {"a"}, {"a"}, 2.0)
    with pytest.raises(InvalidProblem):
        BoundaryValueProblem(path, {"z"}, {"c"}, 2.0)


def test_modulus_of_a_path_and_a_cycle(path, cycle):
    assert solve_modulus(path, {"a"}, {"c"}, 2.0).value == pytest.approx(1.0, rel=1e-4)
    assert solve_modulus(cycle, {"a"}, {"c"}, 2.0).value == pytest.approx(2.0, rel=1e-4)


def test_modulus_across_a_single_edge():
    # the only curve is (c, a): x(0) = a, x(1) = c, x(2) = a, x(3) = c
    edge = nx.Graph([("a", "c")])
    assert solve_modulus(edge, {"a"}, {"c"}, 2.0).value == pytest.approx(0.5, rel=1e-4)


def test_modulus_without_curves():
    graph = nx.Graph([("a", "b")])
    graph.add_node("c")
    result = solve_modulus(graph, {"a"}, {"c"}, 2.0)
    assert result.no_curve
    assert result.value == 0


def test_holder_constant():
    assert holder_constant(2.0, 2) == 2
    assert holder_constant(3.0, 4) == 16
    assert holder_constant(2.0, 1) == 1


def test_duality_on_a_path(path):
    check = duality_check(path, 2.0, 0.5, 1.0)
    assert check.L == 2
    assert check.energy_slack == pytest.approx(3.5)
    assert check.modulus_slack == pytest.approx(1.0)
    assert check.holds()


def test_transfer_maps(path):
    F = transfer_F({"a": 0.0, "b": 1.0, "c": 0.0}, path, {"a"}, {"c"})
    assert F == {"a": 1.0, "b": 1.0, "c": 0.0}
    assert energy_eval(F, path, 2.0) == 1.0
    G = transfer_G({"a": 1.0, "b": 0.5, "c": 0.0}, path, {"a"}, {"c"})
    assert G == {"a": 0.5, "b": 1.0, "c": 0.5}


def test_transfer_F_rejects_inadmissible_densities(path):
    with pytest.raises(InadmissibleInput):
        transfer_F({"b": 0.5}, path, {"a"}, {"c"})
    with pytest.raises(InadmissibleInput):
        transfer_F({}, nx.Graph([("a", "c")]), {"a"}, {"c"})


def test_transfer_G_rejects_bad_boundary_values(path):
    with pytest.raises(InadmissibleInput):
        transfer_G({"a": 0.5, "b": 0.5, "c": 0.0}, path, {"a"}, {"c"})


def test_symmetry_reduces_the_candidates():
    square = SelfSimilarFamily("square-full", 2)
    assert len(sweep_candidates(square, 1, "all", 0, 1)) == 9
    # corner, side and center patterns
    assert len(sweep_candidates(square, 1, "symmetry", 0, 1)) == 3


def test_energy_sweep_on_the_interval():
    interval = SelfSimilarFamily("interval-binary", 5)
    sweep = energy_sweep(CellSystem(1), interval, 0, 1, [2.0], [1, 2], "symmetry", base_level=3)
    assert not sweep.errors
    # both sides of the core sit 3 edges (k=1) and 5 edges (k=2) from the outer boundary
    assert sweep.row(2.0, 1).energy == pytest.approx(2 / 3, rel=1e-5)
    assert sweep.row(2.0, 2).energy == pytest.approx(2 / 5, rel=1e-5)
    assert sweep.energies(2.0) == pytest.approx({1: 2 / 3, 2: 2 / 5}, rel=1e-5)


def test_modulus_sweep_records_duality_slacks():
    interval = SelfSimilarFamily("interval-binary", 4)
    sweep = modulus_sweep(CellSystem(1), interval, 0, 1, [2.0], [1], "all", base_level=3)
    assert sweep.row(2.0, 1).modulus == pytest.approx(1.0, rel=1e-3)
    checked = [c for c in sweep.cells if c.energy_slack is not None]
    assert checked and all(c.energy_slack >= -1e-6 and c.modulus_slack >= -1e-6 for c in checked)


def test_sweep_rejects_depths_past_the_cap():
    interval = SelfSimilarFamily("interval-binary", 3)
    with pytest.raises(ValueError):
        energy_sweep(CellSystem(1), interval, 0, 1, [2.0], [3], base_level=1)


@pytest.mark.slow
def test_submultiplicativity_constant_on_the_carpet():
    carpet = SelfSimilarFamily("sierpinski-carpet", 3)
    check = submultiplicativity(carpet, 2.0, 1, 1)
    # L_* = 8 and C_h(2, 8^2) = 64
    assert check.constant == 512
    assert check.combined > 0
    assert check.rebuilt > 0 and check.plain > 0


# -- invariants of the boundary value problem ------------------------------------------------
@pytest.fixture
def ladder():
    graph = nx.grid_2d_graph(3, 4)
    return graph, {(i, 0) for i in range(3)}, {(i, 3) for i in range(3)}


def _energy(graph, U1, U2, p=2.0):
    return solve_energy(BoundaryValueProblem(graph, U1, U2, p)).value


def test_energy_ignores_vertex_names(ladder):
    graph, U1, U2 = ladder
    names = {v: f"v{v[0]}{v[1]}" for v in graph.nodes}
    renamed = nx.relabel_nodes(graph, names)
    expected = _energy(graph, U1, U2, 3.0)
    assert _energy(renamed, {names[v] for v in U1}, {names[v] for v in U2}, 3.0) == pytest.approx(expected, rel=1e-7)


def test_energy_is_symmetric_in_the_boundary_sets(ladder):
    graph, U1, U2 = ladder
    for p in (1.5, 2.0, 3.0):
        assert _energy(graph, U2, U1, p) == pytest.approx(_energy(graph, U1, U2, p), rel=1e-7)


def test_energy_grows_with_edges_and_with_the_outer_set(ladder):
    graph, U1, U2 = ladder
    base = _energy(graph, U1, U2)
    denser = graph.copy()
    denser.add_edge((0, 1), (2, 2))
    assert _energy(denser, U1, U2) >= base - 1e-9
    assert _energy(graph, U1, U2 | {(1, 2)}) >= base - 1e-9


def test_energy_does_not_increase_with_p(ladder):
    graph, U1, U2 = ladder
    values = [_energy(graph, U1, U2, p) for p in (1.5, 2.0, 3.0, 4.0)]
    assert all(b <= a + 1e-7 for a, b in zip(values, values[1:]))


# -- brute force on small graphs -------------------------------------------------------------
FOUR_VERTEX_GRAPHS = [
    nx.path_graph(4),
    nx.cycle_graph(4),
    nx.Graph([(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]),
    nx.Graph([(0, 1), (1, 2), (2, 3), (0, 2)]),
    nx.Graph([(0, 1), (0, 2), (1, 3)]),
]


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("graph", FOUR_VERTEX_GRAPHS)
def test_energy_matches_a_grid_search(graph, p):
    grid = np.linspace(0.0, 1.0, 1001)
    f1, f2 = np.meshgrid(grid, grid, indexing="ij")
    values = {0: np.ones_like(f1), 1: f1, 2: f2, 3: np.zeros_like(f1)}
    brute = sum(np.abs(values[a] - values[b]) ** p for a, b in graph.edges).min()
    assert _energy(graph, {0}, {3}, p) == pytest.approx(float(brute), abs=1e-3)


def _enumerated_modulus(graph, U1, U2, p):
    """Mod_p as a convex program over every curve vertex set."""
    starts = {v for u in U1 for v in graph.neighbors(u)}
    ends = {v for u in U2 for v in graph.neighbors(u)}
    curves = set()
    for s in starts:
        for t in ends:
            if s == t:
                curves.add(frozenset([s]))
            else:
                curves.update(frozenset(path) for path in nx.all_simple_paths(graph, s, t))
    nodes = sorted(graph.nodes)
    column = {v: i for i, v in enumerate(nodes)}
    A = np.zeros((len(curves), len(nodes)))
    for i, curve in enumerate(curves):
        A[i, [column[v] for v in curve]] = 1.0
    res = minimize(lambda r: float(np.sum(np.abs(r) ** p)), np.ones(len(nodes)),
                   jac=lambda r: p * np.abs(r) ** (p - 1) * np.sign(r), method="SLSQP",
                   bounds=[(0.0, None)] * len(nodes),
                   constraints=[{"type": "ineq", "fun": lambda r: A @ r - 1.0, "jac": lambda r: A}],
                   options={"ftol": 1e-12, "maxiter": 1000})
    return float(res.fun)


SMALL_INSTANCES = [
    (nx.house_graph(), {0}, {4}),
    (nx.cycle_graph(6), {0}, {3}),
    (nx.wheel_graph(7), {1}, {4}),
    (nx.grid_2d_graph(2, 4), {(0, 0), (1, 0)}, {(0, 3), (1, 3)}),
    (nx.path_graph(5), {0}, {4}),
]


@pytest.mark.parametrize("p", [2.0, 3.0])
@pytest.mark.parametrize("graph, U1, U2", SMALL_INSTANCES)
def test_modulus_matches_the_enumerated_curve_program(graph, U1, U2, p):
    expected = _enumerated_modulus(graph, U1, U2, p)
    assert solve_modulus(graph, U1, U2, p).value == pytest.approx(expected, rel=1e-6, abs=1e-6)


def _random_instances(count, seed):
    out = []
    for i in range(count):
        n = 10 + (i * 7) % 21
        graph = nx.connected_watts_strogatz_graph(n, 4, 0.3, seed=seed + i)
        hops = nx.single_source_shortest_path_length(graph, 0)
        far = max(hops, key=lambda v: (hops[v], v))
        out.append((graph, {0}, {far}))
    return out


def _check_duality(instances):
    for graph, U1, U2 in instances:
        for p in (1.5, 2.0, 3.0):
            energy = _energy(graph, U1, U2, p)
            modulus = solve_modulus(graph, U1, U2, p).value
            check = duality_check(graph, p, energy, modulus)
            assert check.holds(1e-6), (sorted(graph.edges), p, check)


def test_duality_on_random_graphs():
    _check_duality(_random_instances(3, seed=40))


@pytest.mark.slow
def test_duality_on_many_random_graphs_and_a_carpet_sweep():
    _check_duality(_random_instances(20, seed=100))
    carpet = SelfSimilarFamily("sierpinski-carpet", 3)
    sweep = modulus_sweep(CellSystem(1), carpet, 0, 1, [1.5, 2.0, 3.0], [1, 2], "symmetry", base_level=1)
    checked = [c for c in sweep.cells if c.energy_slack is not None]
    assert checked
    assert all(c.energy_slack >= -1e-6 and c.modulus_slack >= -1e-6 for c in checked)
