"""Bond-graph model types, linear forms and element laws."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

from .expr import ONE, ZERO, Param, ParamExpr, as_expr, canonical_str, is_literal_zero


class IllegalCausality(ValueError):
    """An element/stroke pairing that has no constitutive law."""


class ElementType(IntEnum):
    CONNECTING_BOND = 0
    SOURCE = 1
    INERTANCE = 2
    COMPLIANCE = 3
    RESISTOR = 4
    TRANSFORMER = 5
    GYRATOR = 6


ONE_PORTS = frozenset(
    {ElementType.SOURCE, ElementType.INERTANCE, ElementType.COMPLIANCE, ElementType.RESISTOR}
)
CONNECTORS = frozenset(
    {ElementType.CONNECTING_BOND, ElementType.TRANSFORMER, ElementType.GYRATOR}
)


@dataclass(frozen=True)
class BranchRef:
    present: bool = False
    common: int = 0

    def __post_init__(self):
        if not self.present and self.common != 0:
            raise ValueError("absent branch reference must carry label 0")


NO_BRANCH = BranchRef()


@dataclass(frozen=True)
class Modulus:
    """Scale factors applied to effort (index 0) and flow (index 1)."""

    effort: ParamExpr = ONE
    flow: ParamExpr = ONE

    def __getitem__(self, i: int) -> ParamExpr:
        return (self.effort, self.flow)[i]

    def swapped(self) -> "Modulus":
        return Modulus(self.flow, self.effort)


UNIT_MODULUS = Modulus()


@dataclass(frozen=True)
class SignalVar:
    """A power or energy variable tied to one bond.

    ``kind`` is one of ``e`` (effort), ``f`` (flow), ``p`` (momentum),
    ``q`` (displacement) or ``u`` (source input).
    """

    kind: str
    label: int

    _ORDER = {"e": 0, "f": 1, "p": 2, "q": 3, "u": 4}

    def __post_init__(self):
        if self.kind not in self._ORDER:
            raise ValueError(f"unknown signal kind {self.kind!r}")

    def sort_key(self):
        return (self.label, self._ORDER[self.kind])

    def __str__(self) -> str:
        return f"{self.kind}({self.label})"


def effort(label: int) -> SignalVar:
    return SignalVar("e", label)


def flow(label: int) -> SignalVar:
    return SignalVar("f", label)


@dataclass(frozen=True)
class Bond:
    label: int
    causality: bool  # stroke at the junction end
    direction: bool  # half-arrow points into the junction
    element: ElementType
    branch: BranchRef = NO_BRANCH
    modulus: Modulus = UNIT_MODULUS
    param: Optional[str] = None
    p0: Fraction = Fraction(0)
    q0: Fraction = Fraction(0)

    @property
    def e(self) -> SignalVar:
        return effort(self.label)

    @property
    def f(self) -> SignalVar:
        return flow(self.label)

    @property
    def sign(self) -> int:
        return 1 if self.direction else -1

    @property
    def is_connector(self) -> bool:
        return self.element in CONNECTORS


@dataclass(frozen=True)
class Junction:
    number: int
    kind: bool  # True: 1-junction (common flow), False: 0-junction (common effort)
    bonds: Tuple[Bond, ...]

    @property
    def common_kind(self) -> str:
        return "f" if self.kind else "e"

    @property
    def summed_kind(self) -> str:
        return "e" if self.kind else "f"


@dataclass(frozen=True)
class Branch:
    id: int
    junctions: Tuple[Junction, ...]


@dataclass(frozen=True)
class BondGraphModel:
    name: str
    parameters: Tuple[Tuple[str, Optional[Fraction]], ...]
    branches: Tuple[Branch, ...]

    @property
    def parameter_defaults(self) -> Dict[str, Optional[Fraction]]:
        return dict(self.parameters)

    def bonds(self) -> Iterator[Tuple[Branch, int, Bond]]:
        """Every bond with its branch and junction index."""
        for br in self.branches:
            for i, j in enumerate(br.junctions):
                for b in j.bonds:
                    yield br, i, b

    def bond(self, label: int) -> Bond:
        for _, _, b in self.bonds():
            if b.label == label:
                return b
        raise KeyError(label)


# -- linear forms -------------------------------------------------------------


class LinearForm:
    """sum(coeff * var) + constant with exact ParamExpr coefficients."""

    __slots__ = ("_terms", "constant")

    def __init__(self, terms: Optional[Mapping[SignalVar, ParamExpr]] = None, constant=ZERO):
        clean: Dict[SignalVar, ParamExpr] = {}
        for v, c in (terms or {}).items():
            c = as_expr(c)
            if not is_literal_zero(c):
                clean[v] = c
        self._terms = clean
        self.constant = as_expr(constant)

    @classmethod
    def var(cls, v: SignalVar, coeff=ONE) -> "LinearForm":
        return cls({v: coeff})

    @property
    def terms(self) -> Mapping[SignalVar, ParamExpr]:
        return dict(self._terms)

    def variables(self) -> Iterable[SignalVar]:
        return self._terms.keys()

    def coeff(self, v: SignalVar) -> ParamExpr:
        return self._terms.get(v, ZERO)

    def is_zero(self) -> bool:
        return not self._terms and is_literal_zero(self.constant)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return linform_add(self, other)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return linform_add(self, linform_scale(other, -ONE))

    def __neg__(self) -> "LinearForm":
        return linform_scale(self, -ONE)

    def scale(self, c) -> "LinearForm":
        return linform_scale(self, c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self._terms == other._terms and self.constant == other.constant

    def __hash__(self) -> int:
        return hash((frozenset(self._terms.items()), self.constant))

    def __repr__(self) -> str:
        return f"LinearForm({format_linform(self)})"

    def __str__(self) -> str:
        return format_linform(self)


def linform_add(a: LinearForm, b: LinearForm) -> LinearForm:
    terms = dict(a._terms)
    for v, c in b._terms.items():
        terms[v] = terms[v] + c if v in terms else c
    return LinearForm(terms, a.constant + b.constant)


def linform_scale(a: LinearForm, c) -> LinearForm:
    c = as_expr(c)
    return LinearForm({v: c * k for v, k in a._terms.items()}, c * a.constant)


def _coeff_text(c: ParamExpr) -> Tuple[bool, str]:
    """Sign and magnitude text of a coefficient in canonical form."""
    s = canonical_str(c)
    negative = s.startswith("-")
    if negative:
        s = s[1:]
    if s == "1":
        return negative, ""
    if " " in s:
        s = f"({s})"
    return negative, s + "*"


def format_linform(form: LinearForm) -> str:
    parts = []
    for v in sorted(form.variables(), key=SignalVar.sort_key):
        negative, mag = _coeff_text(form.coeff(v))
        if canonical_str(form.coeff(v)) == "0":
            continue
        parts.append((negative, f"{mag}{v}"))
    if canonical_str(form.constant) != "0":
        negative, mag = _coeff_text(form.constant)
        parts.append((negative, mag[:-1] if mag else "1"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for negative, txt in parts[1:]:
        out += (" - " if negative else " + ") + txt
    return out


# -- equations ----------------------------------------------------------------


class Provenance(str, Enum):
    CONSTITUTIVE = "Constitutive"
    SUMMATION = "SummationLaw"
    EQUALITY = "EqualityLaw"
    BRANCH_COUPLING = "BranchCoupling"
    DERIVATIVE = "DerivativeLaw"


@dataclass(frozen=True)
class Equation:
    """lhs = rhs, either side optionally differentiated in time.

    ``defines`` names the variable the equation is solved for when the
    system is reduced; ``site`` is ``(branch id, junction number)`` when the
    equation belongs to a junction.
    """

    lhs: LinearForm
    rhs: LinearForm
    provenance: Provenance
    lhs_derivative: bool = False
    rhs_derivative: bool = False
    defines: Optional[SignalVar] = None
    site: Optional[Tuple[int, int]] = None
    bond: Optional[int] = None

    def __str__(self) -> str:
        lhs = format_linform(self.lhs)
        rhs = format_linform(self.rhs)
        if self.lhs_derivative:
            lhs = f"d/dt[{lhs}]"
        if self.rhs_derivative:
            rhs = f"d/dt[{rhs}]"
        return f"{lhs} = {rhs}"

    def residual(self) -> LinearForm:
        return self.lhs - self.rhs


# -- constitutive laws --------------------------------------------------------


def _param(bond: Bond) -> ParamExpr:
    if bond.param is None:
        raise ValueError(f"bond {bond.label} needs a parameter")
    return Param(bond.param)


def constitutive_equation(bond: Bond) -> Equation:
    """Element law oriented by the causal stroke.

    Integral storage relates the co-energy variable to the state; differential
    storage yields a law with a differentiated right-hand side.
    """
    el, toward, lab = bond.element, bond.causality, bond.label
    e, f = LinearForm.var(bond.e), LinearForm.var(bond.f)

    def eq(lhs_var, rhs, rhs_der=False):
        return Equation(
            LinearForm.var(lhs_var), rhs, Provenance.CONSTITUTIVE,
            rhs_derivative=rhs_der, defines=lhs_var, bond=lab,
        )

    if el == ElementType.SOURCE:
        u = LinearForm.var(SignalVar("u", lab))
        return eq(bond.e, u) if toward else eq(bond.f, u)
    if el == ElementType.RESISTOR:
        r = _param(bond)
        return eq(bond.e, f.scale(r)) if toward else eq(bond.f, e.scale(ONE / r))
    if el == ElementType.COMPLIANCE:
        c = _param(bond)
        if toward:
            return eq(bond.e, LinearForm.var(SignalVar("q", lab), ONE / c))
        return eq(bond.f, e.scale(c), rhs_der=True)
    if el == ElementType.INERTANCE:
        m = _param(bond)
        if not toward:
            return eq(bond.f, LinearForm.var(SignalVar("p", lab), ONE / m))
        return eq(bond.e, f.scale(m), rhs_der=True)
    raise IllegalCausality(
        f"bond {lab}: {el.name.lower()} has no one-port law for stroke "
        f"{'toward' if toward else 'away from'} the junction"
    )


def is_integral_storage(bond: Bond) -> bool:
    return (bond.element == ElementType.INERTANCE and not bond.causality) or (
        bond.element == ElementType.COMPLIANCE and bond.causality
    )


def is_differential_storage(bond: Bond) -> bool:
    return (bond.element == ElementType.INERTANCE and bond.causality) or (
        bond.element == ElementType.COMPLIANCE and not bond.causality
    )


def state_of(bond: Bond) -> SignalVar:
    return SignalVar("p" if bond.element == ElementType.INERTANCE else "q", bond.label)


def modulus_select(bond: Bond) -> ParamExpr:
    """Flow modulus when the stroke sits at the junction, else effort modulus."""
    return bond.modulus.flow if bond.causality else bond.modulus.effort
