# main.py

import argparse
import math
import sys
from itertools import product
from pathlib import Path
from typing import Callable, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from energy.sweep import EnergySweep, energy_sweep, modulus_sweep, submultiplicativity
from fractal.geometry import dist_sq, format_point
from fractal.holes import sq4_classify
from fractal.tree import ROOT, format_address
from fractal.weight import cell_diameter_sq, check_weight, thickness_th1_bound
from metric.visual_metric import adaptedness_report, chain_distance, delta, sample_pairs, separation_witnesses
from network.analysis import balanced_check_bounded, growth_rates, validate_proper_system
from network.systems import build_network
from orchestrator import ConsoleDomainPrinter, DimensionOrchestrator, DomainInfoPrinter, SilentDomainPrinter
from protocol import (
    ErrorReport,
    FamilySpec,
    GrowthRecord,
    LevelRecord,
    MetricReport,
    MinimalityRecord,
    NetworkReport,
    OutputHeader,
    PartitionReport,
    RectangleRecord,
    ResolutionReport,
    RunConfig,
    SeparationRecord,
    SubmultiplicativityRecord,
    SweepReport,
    ThicknessRecord,
    ValidateReport,
    WeightCheckRecord,
    config_hash,
)
from resolution.graph import (
    build_resolution,
    bridge_violations,
    format_vertex,
    gromov_eta,
    horizontally_minimal_scan,
    rearranged_resolution,
    root_geodesics_vertical,
    sample_level_pairs,
)
from tools import (
    OutputWriter,
    apply_overrides,
    build_family,
    build_system,
    build_weight,
    exact_text,
    load_config,
    load_pairs,
    resolve_threads,
)
from utils.errors import ConfdimError, ConfigError, Unresolved
from utils.log import setup_logger

COMMANDS = ("partition", "metric", "resolution", "network", "energy", "modulus", "dimension", "validate")


def _addr(w) -> str:
    return format_address(w) or "root"


# -- partition -------------------------------------------------------------------------------
def cmd_partition(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    family = build_family(config.family)
    H = family.max_depth
    rows = []
    for w in family.level_cells(H):
        b = family.box(w)
        row = {"address": _addr(w), "level": H}
        for axis in range(b.dim):
            row[f"lo{axis}"] = exact_text(b.lo[axis])
            row[f"hi{axis}"] = exact_text(b.hi[axis])
        row["side"] = float(max(b.sides))
        rows.append(row)
    writer.write_table("cells.csv", pd.DataFrame(rows))

    adjacency = [f"{H}:{_addr(w)} {H}:{_addr(v)} h" for w in family.level_cells(H)
                 for v in family.neighbors(w) if w < v]
    writer.write_lines("adjacency.txt", adjacency)

    minimality = family.minimality_check(H)
    pruned: List[str] = []
    if not minimality.all_minimal:
        pruned = sorted(_addr(w) for w in family.minimize(H).pruned)
    p1 = family.check_p1(H)
    g = build_weight(config.weight, family)
    wc = check_weight(g, family, H)
    th = thickness_th1_bound(family)
    report = PartitionReport(
        family=family.describe(),
        kind=family.kind,
        max_depth=H,
        cells_per_level={m: len(family.level_cells(m)) for m in range(H + 1)},
        minimality=MinimalityRecord(depth=minimality.depth, all_minimal=minimality.all_minimal,
                                    violating=[_addr(w) for w in minimality.violating]),
        pruned=pruned,
        p1_holds=p1.holds,
        p1_violating=[_addr(w) for w in p1.violating],
        weight_check=WeightCheckRecord(weight=g.describe(), holds=wc.holds,
                                       level_maxima=[str(x) for x in wc.level_maxima], violations=wc.violations),
        thickness=ThicknessRecord(bound=th.bound, per_level=th.per_level, unbounded=th.unbounded,
                                  worst=None if th.worst is None else _addr(th.worst)),
    )
    if config.kappa is not None:
        report.kappa = str(config.kappa)
        report.sq4 = [RectangleRecord(index=v.index, rectangle=v.rectangle.describe(), kappa_rect=str(v.kappa_rect),
                                      verdict=v.verdict, witness=None if v.witness is None else _addr(v.witness),
                                      witness_kappa=exact_text(v.witness_kappa) or None)
                      for v in sq4_classify(family, config.kappa)]
    writer.write_json("partition.json", report)


# -- metric ----------------------------------------------------------------------------------
def cmd_metric(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    family = build_family(config.family)
    g = build_weight(config.weight, family)
    M = config.M
    if config.pairs_path:
        pairs = load_pairs(config.pairs_path)
    else:
        pairs = sample_pairs(family, config.pair_count, config.seed, min(2, family.max_depth))
    diam_sq = cell_diameter_sq(family, ROOT)
    rows, unresolved = [], 0
    for x, y in pairs:
        row = {"x": format_point(x), "y": format_point(y), "M": M}
        try:
            d = delta(g, family, x, y, M)
            D = chain_distance(g, family, x, y, M)
        except Unresolved:
            unresolved += 1
            row.update({"delta": "", "delta_float": None, "D": "", "D_float": None, "status": "unresolved"})
        else:
            row.update({"delta": exact_text(d.value), "delta_float": float(d.value),
                        "D": exact_text(D.value), "D_float": float(D.value), "status": "ok"})
        row["d_euclid_sq"] = exact_text(dist_sq(x, y) / diam_sq)
        row["d_euclid"] = math.sqrt(dist_sq(x, y) / diam_sq)
        rows.append(row)
    writer.write_table("metric.csv", pd.DataFrame(rows))

    report = MetricReport(weight=g.describe(), M=M, pairs=len(pairs), unresolved=unresolved)
    resolved = [pair for pair, row in zip(pairs, rows) if row["status"] == "ok"]
    depth = config.metric_depth if config.metric_depth is not None else family.max_depth
    if resolved:
        ada = adaptedness_report(g, family, M, resolved, depth)
        report.c_ada, report.adapted = str(ada.c_ada), ada.satisfied
        report.c_adb = None if ada.c_adb is None else str(ada.c_adb)
    if config.metric_depth is not None:
        sep = separation_witnesses(g, family, M, config.metric_depth)
        report.separation = SeparationRecord(M=sep.M, violated=sep.violated, witnesses=len(sep.witnesses),
                                             trace=[[str(s), exact_text(gm) or None] for s, gm in sep.trace])
    writer.write_json("metric.json", report)


# -- resolution ------------------------------------------------------------------------------
def cmd_resolution(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    family = build_family(config.family)
    L = config.resolution_levels or family.max_depth
    G = build_resolution(family, L)
    writer.write_lines("resolution_edges.txt", G.edge_lines())
    if config.rearranged:
        g = build_weight(config.weight, family)
        R = rearranged_resolution(family, g, family.contraction or "1/2", L)
        writer.write_lines("rearranged_edges.txt", R.edge_lines())
    scan = horizontally_minimal_scan(G, cutoff=config.scan_cutoff)
    eta = gromov_eta(G, config.samples, config.seed)
    pairs = sample_level_pairs(G, config.samples, config.seed)
    report = ResolutionReport(
        levels=G.levels,
        vertices=G.graph.number_of_nodes(),
        horizontal_edges=len(G.horizontal_edges()),
        vertical_edges=len(G.vertical_edges()),
        max_bound=scan.max_bound,
        per_level=scan.per_level,
        truncated=scan.truncated,
        witnesses=[f"{format_vertex(a)} {format_vertex(b)} {d}" for a, b, d in scan.witnesses],
        eta=str(eta.eta),
        eta_samples=eta.samples,
        vertical_violations=[format_vertex(v) for v in root_geodesics_vertical(G)],
        bridge_checked=len(pairs),
        bridge_violations=[f"{format_vertex(a)} {format_vertex(b)}" for a, b in bridge_violations(G, pairs)],
    )
    writer.write_json("resolution.json", report)


# -- network ---------------------------------------------------------------------------------
def _growth_record(growth) -> GrowthRecord:
    return GrowthRecord(L_star=growth.L_star, N_star=growth.N_star, volume_counts=growth.volume_counts,
                        cell_counts=growth.cell_counts, N_upper=growth.N_upper, N_lower=growth.N_lower,
                        volume_bound_upper=growth.volume_bound_upper, volume_bound_lower=growth.volume_bound_lower,
                        reduction_consistent=growth.reduction_consistent)


def cmd_network(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    family = build_family(config.family)
    system = build_system(config)
    system.require(family)
    levels = config.levels()
    for m in levels:
        net = build_network(system, family, m)
        writer.write_lines(f"network_level{m}.txt", net.edge_lines())
        writer.write_lines(f"ownership_level{m}.txt", net.ownership_lines())
    validation = validate_proper_system(system, family, levels, config.samples, config.seed)
    depths = config.growth_depths or list(range(1, min(3, family.max_depth) + 1))
    report = NetworkReport(
        system=system.name,
        indices=list(system.indices),
        holds=validation.holds,
        observed_l0=validation.observed_l0,
        levels=[LevelRecord(level=c.level, vertices=c.vertices, edges=c.edges, n1=c.n1, n2=c.n2, n3=c.n3,
                            n3_max=c.n3_max, n4=c.n4, n5=c.n5, n5_checked=c.n5_checked,
                            n5_failures=[f"{_addr(u)} {_addr(v)}" for u, v in c.n5_failures])
                for c in validation.levels],
        growth=_growth_record(growth_rates(family, config.N2, depths)) if depths else None,
    )
    writer.write_json("network.json", report)


# -- energy / modulus ------------------------------------------------------------------------
def sweep_frame(sweeps: List[EnergySweep]) -> pd.DataFrame:
    rows = {}
    for sweep in sweeps:
        for r in sweep.rows:
            rows[(r.p, r.k)] = {"p": r.p, "k": r.k, "witness": _addr(r.witness), "energy": r.energy,
                                "modulus": r.modulus, "residual": r.residual}
    return pd.DataFrame([rows[key] for key in sorted(rows)], columns=["p", "k", "witness", "energy", "modulus", "residual"])


def cells_frame(sweep: EnergySweep) -> pd.DataFrame:
    rows = [{"p": c.p, "k": c.k, "w": _addr(c.w), "vertices": c.vertices, "energy": c.energy, "modulus": c.modulus,
             "residual": c.residual, "converged": c.converged, "exact_zero": c.exact_zero,
             "energy_slack": c.energy_slack, "modulus_slack": c.modulus_slack, "error": c.error or ""}
            for c in sorted(sweep.cells, key=lambda c: (c.p, c.k, c.w))]
    return pd.DataFrame(rows)


def _sweep_report(measure: str, sweep: EnergySweep) -> SweepReport:
    e_slacks = [c.energy_slack for c in sweep.cells if c.energy_slack is not None]
    m_slacks = [c.modulus_slack for c in sweep.cells if c.modulus_slack is not None]
    return SweepReport(
        measure=measure, system=sweep.system, indices=list(sweep.indices), N1=sweep.N1, N2=sweep.N2,
        base_level=sweep.base_level, p_grid=sweep.p_grid, k_list=sweep.k_list,
        candidates=[_addr(w) for w in sweep.candidates], cells=len(sweep.cells),
        failures=[f"p={c.p:g} k={c.k} w={_addr(c.w)}: {c.error}" for c in sweep.errors],
        unconverged=sum(1 for c in sweep.cells if not c.converged),
        min_energy_slack=min(e_slacks, default=None),
        min_modulus_slack=min(m_slacks, default=None),
        duality_holds=(min(e_slacks + m_slacks) >= -1e-6) if e_slacks else None,
    )


def _run_sweep(measure: str, config: RunConfig, writer: OutputWriter, threads: int) -> None:
    family = build_family(config.family)
    system = build_system(config)
    ks = config.depths()
    if measure == "energy":
        sweep = energy_sweep(system, family, config.N1, config.N2, config.p_grid, ks, config.w_policy,
                             config.base_level, threads, with_modulus=config.with_modulus)
    else:
        sweep = modulus_sweep(system, family, config.N1, config.N2, config.p_grid, ks, config.w_policy,
                              config.base_level, threads, with_energy=True)
    writer.write_table(f"{measure}_sweep.csv", sweep_frame([sweep]))
    writer.write_table(f"{measure}_cells.csv", cells_frame(sweep))
    report = _sweep_report(measure, sweep)
    if config.submultiplicativity:
        for p in config.p_grid:
            for k, l in product(ks, ks):
                if config.base_level + k + l > family.max_depth:
                    continue
                check = submultiplicativity(family, p, k, l, M=1, J=config.N, base=system,
                                            base_level=config.base_level, w_policy=config.w_policy, threads=threads)
                report.submultiplicativity.append(SubmultiplicativityRecord(
                    p=p, k=k, l=l, combined=check.combined, rebuilt=check.rebuilt, plain=check.plain,
                    constant=check.constant, bound=check.bound, holds=check.holds()))
    writer.write_json(f"{measure}.json", report)


def cmd_energy(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    _run_sweep("energy", config, writer, threads)


def cmd_modulus(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    _run_sweep("modulus", config, writer, threads)


# -- dimension -------------------------------------------------------------------------------
def cmd_dimension(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    orchestrator = DimensionOrchestrator(config, threads=threads, log_level=config.log_level,
                                         verbosity=config.verbosity)
    report = orchestrator.run()
    sweeps = sweep_frame(orchestrator.sweeps())
    writer.write_table("dimension_sweep.csv", sweeps)
    positive = sweeps[sweeps["energy"].fillna(0) > 0]
    plot = pd.DataFrame({"p": positive["p"], "k": positive["k"], "log_energy": positive["energy"].map(math.log)})
    writer.write_table("dimension_plot.csv", plot)
    writer.write_json("dimension.json", report)


# -- validate --------------------------------------------------------------------------------
def cmd_validate(config: RunConfig, writer: OutputWriter, threads: int) -> None:
    family = build_family(config.family)
    H = family.max_depth
    g = build_weight(config.weight, family)
    checks: Dict[str, bool] = {}
    details: Dict[str, str] = {}

    p1 = family.check_p1(H)
    checks["partition_p1"] = p1.holds
    minimality = family.minimality_check(H)
    checks["minimal"] = minimality.all_minimal
    wc = check_weight(g, family, H)
    checks["weight_g1_g3"] = wc.holds
    if wc.violations:
        details["weight_g1_g3"] = "; ".join(wc.violations[:5])
    th = thickness_th1_bound(family)
    checks["thickness_bounded"] = not th.unbounded
    details["thickness_bounded"] = f"bound={th.bound} per_level={th.per_level}"

    G = build_resolution(family, min(H, config.resolution_levels or 3))
    vertical = root_geodesics_vertical(G)
    checks["root_geodesics_vertical"] = not vertical

    system = build_system(config)
    if system.supports(family):
        validation = validate_proper_system(system, family, config.levels(), config.samples, config.seed)
        checks["proper_system"] = validation.holds
        details["proper_system"] = f"{system.describe()} observed L0={validation.observed_l0}"

    if g.rational and H >= 2:
        verdicts = [balanced_check_bounded(family, g, config.M, w) for w in family.level_cells(1)
                    if len(w) + 1 <= H]
        checks["balanced"] = all(v.balanced for v in verdicts)
        slacks = [v.min_slack for v in verdicts if v.min_slack is not None]
        details["balanced"] = f"{len(verdicts)} cells, min slack {min(slacks) if slacks else 'n/a'}"
    writer.write_json("validate.json", ValidateReport(family=family.describe(), checks=checks, details=details))


HANDLERS: Dict[str, Callable[[RunConfig, OutputWriter, int], None]] = {
    "partition": cmd_partition,
    "metric": cmd_metric,
    "resolution": cmd_resolution,
    "network": cmd_network,
    "energy": cmd_energy,
    "modulus": cmd_modulus,
    "dimension": cmd_dimension,
    "validate": cmd_validate,
}


# -- command line ----------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to a JSON run configuration")
    common.add_argument("--family", type=str, help="Family kind (overrides the config file)")
    common.add_argument("--max-depth", type=int, help="Depth cap H")
    common.add_argument("--system", type=str, choices=["cell", "edge", "corner"], help="Proper system")
    common.add_argument("--N", type=int, help="Neighbourhood index of the cell system")
    common.add_argument("--N1", type=int, help="Inner neighbourhood index")
    common.add_argument("--N2", type=int, help="Outer neighbourhood index")
    common.add_argument("--base-level", type=int, help="Level of the candidate cells w")
    common.add_argument("--p", type=float, nargs="+", help="Exponent grid")
    common.add_argument("--k", type=int, nargs="+", help="Refinement depths")
    common.add_argument("--k-window", type=int, nargs="+", help="Depths used for the rate fit")
    common.add_argument("--p-bracket", type=float, nargs=2, help="Bisection bracket")
    common.add_argument("--tol", type=float, help="Bisection tolerance")
    common.add_argument("--w-policy", type=str, choices=["all", "symmetry"], help="Candidate cell policy")
    common.add_argument("--M", type=int, help="Chain index for the metric command")
    common.add_argument("--pairs", type=str, help="CSV of point pairs (columns x, y)")
    common.add_argument("--kappa", type=str, help="Distortion bound for the removed-rectangle classes")
    common.add_argument("--levels", type=int, nargs="+", help="Network levels to build and validate")
    common.add_argument("--with-modulus", action="store_true", default=None, help="Also solve the modulus")
    common.add_argument("--submultiplicativity", action="store_true", default=None,
                        help="Check modulus submultiplicativity after the sweep")
    common.add_argument("--seed", type=int, help="Seed for every sampled check")
    common.add_argument("--samples", type=int, help="Sample count for sampled checks")
    common.add_argument("--threads", type=int, help="Worker cap (default: CONFDIM_THREADS or 1)")
    common.add_argument("--output-dir", type=str, help="Directory for every output file")
    common.add_argument("--log-level", type=str, choices=["info", "debug"], help="Logging level")
    common.add_argument("--verbosity", type=int, choices=[0, 1, 2],
                        help="Verbosity level: 0=silent, 1=step summaries, 2=summaries + per-row detail")

    parser = argparse.ArgumentParser(prog="confdim",
                                     description="Partitions, visual metrics and conformal dimension estimates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} analysis")
    return parser


def _overrides(args: argparse.Namespace) -> Dict:
    return {
        "family.max_depth": args.max_depth,
        "system": args.system,
        "N": args.N,
        "N1": args.N1,
        "N2": args.N2,
        "base_level": args.base_level,
        "p_grid": args.p,
        "k_list": args.k,
        "k_window": args.k_window,
        "p_bracket": args.p_bracket,
        "tol": args.tol,
        "w_policy": args.w_policy,
        "M": args.M,
        "pairs_path": args.pairs,
        "kappa": args.kappa,
        "network_levels": args.levels,
        "with_modulus": args.with_modulus,
        "submultiplicativity": args.submultiplicativity,
        "seed": args.seed,
        "samples": args.samples,
        "threads": args.threads,
        "output_dir": args.output_dir,
        "log_level": args.log_level,
        "verbosity": args.verbosity,
    }


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        config = load_config(args.config)
        if args.family:
            config = apply_overrides(config, {"family": FamilySpec(kind=args.family).model_dump()})
    elif args.family:
        config = RunConfig(family=FamilySpec(kind=args.family))
    else:
        raise ConfigError("give --config or --family")
    return apply_overrides(config, _overrides(args))


def _printer(verbosity: int) -> DomainInfoPrinter:
    return SilentDomainPrinter() if verbosity == 0 else ConsoleDomainPrinter(verbosity)


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger = setup_logger("confdim", args.log_level or "info")
    output_dir = Path(args.output_dir or "out")
    config: Optional[RunConfig] = None
    try:
        config = resolve_config(args)
        output_dir = Path(config.output_dir)
        setup_logger("confdim", config.log_level)
        threads = resolve_threads(config)
        header = OutputHeader(config_hash=config_hash(config), caps=config.caps())
        writer = OutputWriter(output_dir, header)
        HANDLERS[args.command](config, writer, threads)
        _printer(config.verbosity).print_outputs(args.command, writer.written)
        return 0
    except (ValidationError, ConfigError) as exc:
        error = ErrorReport(kind=type(exc).__name__, message=str(exc), exit_code=2)
    except (ConfdimError, ValueError) as exc:
        error = ErrorReport(kind=type(exc).__name__, message=str(exc), exit_code=3)
    logger.error("%s: %s", error.kind, error.message)
    OutputWriter(output_dir).write_error(error)
    print(error.model_dump_json(indent=2), file=sys.stderr)
    return error.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
