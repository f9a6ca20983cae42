# orchestrator/domain_info_printer.py

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Iterable

from fractal.tree import format_address


def _addr(w) -> str:
    return format_address(w) or "root"


class DomainInfoPrinter(ABC):
    """Human-readable step summaries on stdout; logging carries the diagnostics."""

    @abstractmethod
    def print_step_info(self, step_name: str, state: Dict[str, Any], result: Dict = None):
        pass

    @abstractmethod
    def print_outputs(self, command: str, paths: Iterable[Path]):
        pass


class SilentDomainPrinter(DomainInfoPrinter):
    def print_step_info(self, step_name, state, result=None):
        pass

    def print_outputs(self, command, paths):
        pass


class ConsoleDomainPrinter(DomainInfoPrinter):
    """Verbosity 1 prints one block per step; 2 adds per-(p, k) rows and witnesses."""

    def __init__(self, verbosity: int = 1):
        self.verbosity = verbosity

    def print_step_info(self, step_name: str, state: Dict[str, Any], result: Dict = None):
        if self.verbosity == 0:
            return

        print(f"\n{'=' * 60}")
        print(f"📋 STEP: {step_name.upper()}")
        print(f"{'=' * 60}")

        printer_method = getattr(self, f"_print_{step_name}_info", None)
        if printer_method:
            printer_method(state, result)
        else:
            self._print_generic_info(step_name, state, result)

    def print_outputs(self, command: str, paths: Iterable[Path]):
        if self.verbosity == 0:
            return
        paths = list(paths)
        print(f"\n✅ {command}: {len(paths)} file(s) written")
        for path in paths:
            print(f"   • {path}")

    def _print_build_info(self, state, result):
        print(f"🧩 Family: {result['family'].describe()}")
        print(f"🕸️ System: {result['system'].describe()}  (N, L0, L1, L2)")

    def _print_validate_info(self, state, result):
        validation, growth = result["validation"], result["growth"]
        status = "proper" if validation.holds else "NOT proper"
        print(f"🔎 System is {status} on levels {[c.level for c in validation.levels]}"
              f" (observed L0 = {validation.observed_l0})")
        for c in validation.levels:
            if self.verbosity >= 2 or not c.holds:
                print(f"   • level {c.level}: {c.vertices} vertices, {c.edges} edges, "
                      f"N1..N5 = {c.n1} {c.n2} {c.n3} {c.n4} {c.n5}")
        print(f"📈 L_* = {growth.L_star}, N̄_* ≈ {growth.N_upper:.6g}, N̲_* ≈ {growth.N_lower:.6g}")
        if growth.volume_bound_upper is not None:
            print(f"   Volume bound −log N̄_*/log r ≈ {growth.volume_bound_upper:.6g}")

    def _print_sweep_info(self, state, result):
        sweep = result["sweep"]
        print(f"⚙️ {len(sweep.cells)} local problems over {len(sweep.candidates)} candidate cell(s)"
              f" at base level {sweep.base_level}")
        if sweep.errors:
            print(f"⚠️ {len(sweep.errors)} problem(s) failed")
        if self.verbosity >= 2:
            for row in sweep.rows:
                print(f"   • p={row.p:g} k={row.k}: E={row.energy:.6g} (witness {_addr(row.witness)})")

    def _print_rates_info(self, state, result):
        for p, r in sorted(result["rates"].items()):
            if r.all_zero:
                print(f"   • p={p:g}: all energies vanish")
            else:
                print(f"   • p={p:g}: R_p ≈ {r.rate:.6g} (fit residual {r.residual:.2g})")
        if result["degenerate"]:
            print("ℹ️ Degenerate family: the dimension report carries no crossing")

    def _print_bisection_info(self, state, result):
        estimate = result["estimate"]
        if estimate.p_star is None:
            print("ℹ️ No crossing inside the bracket")
            return
        print(f"🎯 p_* ≈ {estimate.p_star:.4f} in [{estimate.p_low:.4f}, {estimate.p_high:.4f}]"
              f" after {len(estimate.trace)} evaluations")
        if self.verbosity >= 2:
            for t in estimate.trace:
                print(f"   • p={t.p:.6g}: R={t.rate:.6g} bracket [{t.low:.6g}, {t.high:.6g}]")

    def _print_spectral_info(self, state, result):
        for p, s in sorted(result["spectral"].items()):
            print(f"   • d_{p:g} ≈ {s.d:.6g}")
        for d in result["dichotomy"]:
            print(f"   • p={d.p:g}: {d.branch} branch" + ("" if d.consistent else " (inconsistent)"))

    def _print_positivity_info(self, state, result):
        pos = result["positivity"]
        floor = "n/a" if pos.energy_floor is None else f"{pos.energy_floor:.6g}"
        print(f"🔋 min_k E_{{{pos.p:g},k}} = {floor}; positive: {pos.positive}")

    def _print_report_info(self, state, result):
        report = result["report"]
        if report.degenerate:
            print("🧾 Degenerate report")
        elif report.p_star is not None:
            print(f"🧾 p_* ≈ {report.p_star:.4f}, volume bound ≈ {report.volume_bound}")

    def _print_generic_info(self, step_name, state, result):
        print(f"Step {step_name} produced: {sorted(result or {})}")
