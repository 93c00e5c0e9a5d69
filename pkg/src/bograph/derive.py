"""Junction-structure equations by causal path traversal.

Within a branch the junctions form a chain.  The last bond of a junction
links it to the next junction and the second-last bond links it to the
previous one; the first junction has no previous link and the last junction
has no next link.  Every link is a plain bond, a transformer or a gyrator,
represented by one bond on each side.

Whenever a junction needs the variable that enters through a link, the
traversal walks along the chain until it reaches the bond that actually
imposes that variable.  The result is expressed in element signals only, so
each derived equation is already free of link variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .causality import CausalityError, check_causal_completeness, strong_index
from .core import (
    Bond,
    BondGraphModel,
    Branch,
    ElementType,
    Equation,
    Junction,
    LinearForm,
    Provenance,
    SignalVar,
    constitutive_equation,
    modulus_select,
)
from .parser import Diagnostic

__all__ = [
    "DeriveError",
    "EmptyModel",
    "EquationSystem",
    "equality_law",
    "summation_core",
    "jun_match",
    "backward_path",
    "forward_path",
    "causal_paths",
    "search_path",
    "jun_sum",
    "jun_sum_final",
    "jun_sum_der",
    "path_select",
    "path_selection",
    "path_selection_der",
    "res_path_selection",
    "coupling_equations",
    "branch_coupling",
    "causal_loop",
    "case_selection",
    "derive_system",
]


class DeriveError(ValueError):
    pass


class EmptyModel(DeriveError):
    pass


def _sig(bond: Bond, kind: str) -> SignalVar:
    return SignalVar(kind, bond.label)


def _site(br: Branch, i: int) -> Tuple[int, int]:
    return (br.id, br.junctions[i].number)


# -- single-junction laws -----------------------------------------------------


def equality_law(junction: Junction, k: int) -> List[Equation]:
    """Common variable of bond ``k`` equals that of every other bond."""
    kind = junction.common_kind
    me = junction.bonds[k]
    return [
        Equation(
            LinearForm.var(_sig(me, kind)),
            LinearForm.var(_sig(b, kind)),
            Provenance.EQUALITY,
            defines=_sig(me, kind),
            bond=me.label,
        )
        for n, b in enumerate(junction.bonds)
        if n != k
    ]


def summation_core(junction: Junction) -> LinearForm:
    """Signed sum of the summed variable over all bonds but the last two."""
    if len(junction.bonds) < 3:
        raise DeriveError(f"junction {junction.number} has fewer than 3 bonds")
    kind = junction.summed_kind
    out = LinearForm()
    for b in junction.bonds[:-2]:
        out = out + LinearForm.var(_sig(b, kind), b.sign)
    return out


# -- chain traversal ----------------------------------------------------------


@dataclass(frozen=True)
class _View:
    """A branch's junction list in walk order.

    ``prev`` and ``next`` give the bond offset (-2 or -1) that links a
    junction to its predecessor and successor in this order.  Walking
    forward is a backward walk over the reversed list with roles swapped.
    """

    junctions: Tuple[Junction, ...]
    prev: int
    next: int

    @staticmethod
    def of(br: Branch, reverse: bool = False) -> "_View":
        if reverse:
            return _View(tuple(reversed(br.junctions)), -1, -2)
        return _View(br.junctions, -2, -1)


def _entering_kind(bond: Bond) -> str:
    # A stroke at the junction end means the junction receives effort.
    return "e" if bond.causality else "f"


def _walk_back(view: _View, i: int) -> LinearForm:
    """Value entering junction ``i`` through its link to junction ``i-1``."""
    if i == 0:
        return LinearForm()
    near = view.junctions[i].bonds[view.prev]
    far_j = view.junctions[i - 1]
    far = far_j.bonds[view.next]
    kind = _entering_kind(near)
    if near.element == ElementType.GYRATOR:
        kind = "f" if kind == "e" else "e"
    provided = "f" if far.causality else "e"
    if kind != provided:
        raise DeriveError(
            f"link {far.label}/{near.label}: {kind} is needed but {provided} is provided"
        )
    return _provided(view, i - 1, kind).scale(modulus_select(far))


def _provided(view: _View, i: int, kind: str) -> LinearForm:
    """Value of ``kind`` that junction ``i`` hands out through its next link."""
    j = view.junctions[i]
    n = len(j.bonds)
    entry = n + view.next
    prev_pos = n + view.prev
    s = strong_index(j)
    if s is None:
        raise DeriveError(f"junction {j.number} has no strong bond")
    if kind == j.common_kind:
        if s == entry:
            raise DeriveError(f"junction {j.number}: link bond {j.bonds[s].label} both sets and receives {kind}")
        if s == prev_pos and i > 0:
            return _walk_back(view, i)
        return LinearForm.var(_sig(j.bonds[s], kind))
    if s != entry:
        raise DeriveError(
            f"junction {j.number}: {kind} of link bond {j.bonds[entry].label} is not determined here"
        )
    total = summation_core(j)
    pb = j.bonds[prev_pos]
    if i == 0:
        total = total + LinearForm.var(_sig(pb, kind), pb.sign)
    else:
        total = total + _walk_back(view, i).scale(pb.sign)
    return total.scale(-j.bonds[entry].sign)


def jun_match(br: Branch, number: int, reverse: bool = False) -> int:
    """Index of the junction numbered ``number`` in (optionally reversed) order."""
    seq = list(reversed(br.junctions)) if reverse else list(br.junctions)
    for idx, j in enumerate(seq):
        if j.number == number:
            return idx
    raise DeriveError(f"branch {br.id} has no junction {number}")


def backward_path(br: Branch, i: int) -> LinearForm:
    """Value entering junction ``i`` through its second-last bond."""
    return _walk_back(_View.of(br), i)


def forward_path(br: Branch, i: int) -> LinearForm:
    """Value entering junction ``i`` through its last bond."""
    r = jun_match(br, br.junctions[i].number, reverse=True)
    return _walk_back(_View.of(br, reverse=True), r)


def _last(br: Branch, i: int) -> bool:
    return i == len(br.junctions) - 1


def _slot_value(br: Branch, i: int, pos: int, kind: str) -> LinearForm:
    """Value of ``kind`` on the bond at offset ``pos`` (-1 or -2) of junction i."""
    j = br.junctions[i]
    bond = j.bonds[pos]
    if pos == -1 and not _last(br, i):
        return forward_path(br, i)
    if pos == -2 and i > 0:
        return backward_path(br, i)
    return LinearForm.var(_sig(bond, kind))


def causal_paths(br: Branch, i: int) -> LinearForm:
    j = br.junctions[i]
    return forward_path(br, i).scale(j.bonds[-1].sign) + backward_path(br, i).scale(j.bonds[-2].sign)


def search_path(br: Branch, i: int) -> LinearForm:
    """Contribution of the last two bonds of a first or last junction."""
    j = br.junctions[i]
    kind = j.summed_kind
    if i == 0 or _last(br, i):
        return _slot_value(br, i, -2, kind).scale(j.bonds[-2].sign) + _slot_value(
            br, i, -1, kind
        ).scale(j.bonds[-1].sign)
    return LinearForm()


def jun_sum(br: Branch, i: int) -> LinearForm:
    j = br.junctions[i]
    if i == 0 or _last(br, i):
        return summation_core(j) + search_path(br, i)
    return summation_core(j) + causal_paths(br, i)


def _strong(br: Branch, i: int) -> Bond:
    j = br.junctions[i]
    s = strong_index(j)
    if s is None:
        raise DeriveError(f"junction {j.number} has no strong bond")
    return j.bonds[s]


def jun_sum_final(br: Branch, i: int) -> Equation:
    j = br.junctions[i]
    return Equation(
        jun_sum(br, i), LinearForm(), Provenance.SUMMATION,
        defines=_sig(_strong(br, i), j.summed_kind), site=_site(br, i),
    )


def jun_sum_der(br: Branch, i: int) -> Equation:
    j = br.junctions[i]
    return Equation(
        jun_sum(br, i), LinearForm(), Provenance.DERIVATIVE,
        lhs_derivative=True, defines=_sig(_strong(br, i), j.summed_kind), site=_site(br, i),
    )


def path_select(br: Branch, i: int) -> LinearForm:
    """The junction's common variable traced to the bond that imposes it."""
    j = br.junctions[i]
    n = len(j.bonds)
    s = strong_index(j)
    if s is None:
        raise DeriveError(f"junction {j.number} has no strong bond")
    if s == n - 1 and not _last(br, i):
        return forward_path(br, i)
    if s == n - 2 and i > 0:
        return backward_path(br, i)
    return LinearForm.var(_sig(j.bonds[s], j.common_kind))


def path_selection(br: Branch, i: int, k: int) -> Equation:
    j = br.junctions[i]
    v = _sig(j.bonds[k], j.common_kind)
    return Equation(
        LinearForm.var(v), path_select(br, i), Provenance.EQUALITY,
        defines=v, site=_site(br, i), bond=j.bonds[k].label,
    )


def path_selection_der(br: Branch, i: int, k: int) -> Equation:
    j = br.junctions[i]
    v = _sig(j.bonds[k], j.common_kind)
    return Equation(
        LinearForm.var(v), path_select(br, i), Provenance.DERIVATIVE,
        lhs_derivative=True, rhs_derivative=True, defines=v,
        site=_site(br, i), bond=j.bonds[k].label,
    )


def res_path_selection(br: Branch, i: int, k: int) -> Equation:
    j = br.junctions[i]
    b = j.bonds[k]
    if not b.causality:
        return path_selection(br, i, k) if not j.kind else jun_sum_final(br, i)
    return jun_sum_final(br, i) if not j.kind else path_selection(br, i, k)


# -- branch couplings ---------------------------------------------------------


def coupling_equations(a: Bond, b: Bond) -> List[Equation]:
    """Equations joining the two ends of a bond shared between junctions.

    Each equation defines the variable that its own end receives.
    """

    def eq(lhs_bond, lhs_kind, rhs_bond, rhs_kind, factor):
        v = _sig(lhs_bond, lhs_kind)
        return Equation(
            LinearForm.var(v), LinearForm.var(_sig(rhs_bond, rhs_kind), factor),
            Provenance.BRANCH_COUPLING, defines=v, bond=lhs_bond.label,
        )

    if a.element == ElementType.GYRATOR:
        if a.causality:
            return [eq(a, "e", b, "f", b.modulus.flow), eq(b, "e", a, "f", a.modulus.flow)]
        return [eq(a, "f", b, "e", b.modulus.effort), eq(b, "f", a, "e", a.modulus.effort)]
    r, o = (a, b) if a.causality else (b, a)
    return [eq(r, "e", o, "e", o.modulus.effort), eq(o, "f", r, "f", r.modulus.flow)]


def _pairs(bonds: Sequence[Bond]) -> List[Tuple[Bond, Bond]]:
    groups: Dict[int, List[Bond]] = {}
    for b in bonds:
        if b.branch.present:
            groups.setdefault(b.branch.common, []).append(b)
    return [(g[0], g[1]) for g in groups.values() if len(g) == 2]


def branch_coupling(model: BondGraphModel) -> List[Equation]:
    out: List[Equation] = []
    for a, b in _pairs([b for _, _, b in model.bonds()]):
        out.extend(coupling_equations(a, b))
    return out


def causal_loop(br: Branch, i: int, k: int) -> List[Equation]:
    """Couplings between bond ``k`` of junction ``i`` and a partner in the same branch."""
    me = br.junctions[i].bonds[k]
    if not me.branch.present or me.branch.common == 0:
        return []
    for n, j in enumerate(br.junctions):
        for m, b in enumerate(j.bonds):
            if (n, m) == (i, k):
                continue
            if b.branch.present and b.branch.common == me.branch.common:
                return coupling_equations(me, b)
    return []


# -- dispatch -----------------------------------------------------------------


def _is_link(br: Branch, i: int, k: int) -> bool:
    n = len(br.junctions[i].bonds)
    return (k == n - 1 and not _last(br, i)) or (k == n - 2 and i > 0)


def case_selection(br: Branch, i: int, k: int) -> Tuple[List[Equation], Optional[Diagnostic]]:
    j = br.junctions[i]
    b = j.bonds[k]
    one, el, toward = j.kind, b.element, b.causality
    strong = strong_index(j) == k
    I, C, R = ElementType.INERTANCE, ElementType.COMPLIANCE, ElementType.RESISTOR

    if (one and el == I and not toward) or (not one and el == C and toward):
        return [jun_sum_final(br, i)], None
    if (one and el == C and toward) or (not one and el == I and not toward):
        return [path_selection(br, i, k)], None
    if (one and el == I and toward) or (not one and el == C and not toward):
        return [path_selection_der(br, i, k)], None
    if el == R:
        return [res_path_selection(br, i, k)], None
    if (one and el == C and not toward) or (not one and el == I and toward):
        return [jun_sum_der(br, i)], None
    if el in (ElementType.CONNECTING_BOND, ElementType.TRANSFORMER, ElementType.GYRATOR) and b.branch.present:
        if strong:
            return [jun_sum_final(br, i)] + causal_loop(br, i, k), None
        return [path_selection(br, i, k)] + causal_loop(br, i, k), None
    if el == ElementType.SOURCE:
        return ([] if strong else [path_selection(br, i, k)]), None
    if el in (ElementType.CONNECTING_BOND, ElementType.TRANSFORMER, ElementType.GYRATOR):
        if _is_link(br, i, k):
            return [], None
    return [], Diagnostic(
        "error", f"branch {br.id} junction {j.number} bond {b.label}",
        f"no derivation case for {el.name.lower()} with this causality", 7,
    )


@dataclass
class EquationSystem:
    equations: List[Equation] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def by_provenance(self, prov: Provenance) -> List[Equation]:
        return [e for e in self.equations if e.provenance == prov]

    def dump(self) -> str:
        """Human-readable listing; equalities sharing a right side form one chain."""
        lines = []
        for e in sorted(self.by_provenance(Provenance.CONSTITUTIVE), key=lambda e: e.bond):
            lines.append(f"const({e.bond}): {e}")
        for e in self.by_provenance(Provenance.SUMMATION):
            lines.append(f"sum(j={e.site[0]}{e.site[1]}): {e}")
        chains: Dict[Tuple, List[Equation]] = {}
        for e in self.by_provenance(Provenance.EQUALITY):
            chains.setdefault((e.site, e.rhs), []).append(e)
        for (site, rhs), eqs in chains.items():
            lhs = " = ".join(str(e.lhs) for e in sorted(eqs, key=lambda e: e.bond))
            lines.append(f"eq(j={site[0]}{site[1]}): {rhs} = {lhs}")
        for e in self.by_provenance(Provenance.BRANCH_COUPLING):
            lines.append(f"couple({e.bond}): {e}")
        for e in self.by_provenance(Provenance.DERIVATIVE):
            where = f"j={e.site[0]}{e.site[1]}" if e.bond is None else str(e.bond)
            lines.append(f"der({where}): {e}")
        return "\n".join(lines)


def derive_system(model: BondGraphModel) -> EquationSystem:
    """All junction, element and coupling equations of a model."""
    if not model.branches or not any(br.junctions for br in model.branches):
        raise EmptyModel("model has no junctions")
    report = check_causal_completeness(model)
    if not report.complete:
        raise CausalityError(report)

    system = EquationSystem()
    seen = set()

    def put(eq: Equation):
        if eq not in seen:
            seen.add(eq)
            system.equations.append(eq)

    for br in model.branches:
        for i, j in enumerate(br.junctions):
            for k, b in enumerate(j.bonds):
                eqs, diag = case_selection(br, i, k)
                if diag is not None:
                    system.diagnostics.append(diag)
                for eq in eqs:
                    put(eq)
                if b.element in (ElementType.SOURCE, ElementType.INERTANCE, ElementType.COMPLIANCE, ElementType.RESISTOR):
                    put(constitutive_equation(b))
    for eq in branch_coupling(model):
        put(eq)
    return system
