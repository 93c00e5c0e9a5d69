"""Causal-stroke checks on an already-assigned bond graph.

On a 1-junction exactly one bond carries its stroke away from the junction:
that bond imposes the common flow.  On a 0-junction exactly one bond carries
its stroke at the junction and imposes the common effort.  That bond is the
junction's *strong bond*.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .core import BondGraphModel, ElementType, Junction, is_differential_storage
from .parser import Diagnostic

__all__ = [
    "CausalityError",
    "CausalityReport",
    "strong_bond",
    "strong_index",
    "check_causal_completeness",
]


class CausalityError(ValueError):
    def __init__(self, report: "CausalityReport"):
        msgs = "; ".join(d.message for d in report.violations)
        super().__init__(f"causality check failed: {msgs}")
        self.report = report


def strong_bond(junction: Junction, toward: bool) -> Optional[int]:
    """Highest 0-based position whose stroke orientation equals ``toward``."""
    for k in range(len(junction.bonds) - 1, -1, -1):
        if junction.bonds[k].causality == toward:
            return k
    return None


def strong_index(junction: Junction) -> Optional[int]:
    """Position of the bond that imposes the junction's common variable."""
    return strong_bond(junction, not junction.kind)


@dataclass
class CausalityReport:
    complete: bool
    strong_bonds: Dict[Tuple[int, int], int] = field(default_factory=dict)
    differential_storage_bonds: List[int] = field(default_factory=list)
    violations: List[Diagnostic] = field(default_factory=list)


def _pair_ok(a, b) -> bool:
    # A gyrator keeps the stroke on the same side of both ports; a plain bond
    # or a transformer passes it through.
    if a.element == ElementType.GYRATOR:
        return a.causality == b.causality
    return a.causality != b.causality


def check_causal_completeness(model: BondGraphModel) -> CausalityReport:
    report = CausalityReport(complete=True)

    def fail(loc: str, msg: str):
        report.violations.append(Diagnostic("error", loc, msg, 3))

    for br in model.branches:
        for i, j in enumerate(br.junctions):
            loc = f"branch {br.id} junction {j.number}"
            want = not j.kind
            candidates = [b.label for b in j.bonds if b.causality == want]
            if len(candidates) != 1:
                side = "away from" if j.kind else "at"
                what = "flow" if j.kind else "effort"
                fail(
                    loc,
                    f"{len(candidates)} bonds {candidates} have their stroke {side} the "
                    f"junction; exactly one must set the common {what}",
                )
            else:
                report.strong_bonds[(br.id, j.number)] = candidates[0]
            for b in j.bonds:
                if is_differential_storage(b):
                    report.differential_storage_bonds.append(b.label)
            if i + 1 < len(br.junctions):
                a, b = j.bonds[-1], br.junctions[i + 1].bonds[-2]
                if not _pair_ok(a, b):
                    fail(loc, f"strokes of linked bonds {a.label}/{b.label} are inconsistent")

    pairs: Dict[int, list] = {}
    for _, _, b in model.bonds():
        if b.branch.present:
            pairs.setdefault(b.branch.common, []).append(b)
    for common, members in pairs.items():
        if len(members) == 2 and not _pair_ok(*members):
            fail(f"branch reference {common}", f"strokes of {members[0].label}/{members[1].label} are inconsistent")

    report.complete = not report.violations
    return report
