"""Text and JSON front ends for bond-graph models.

DSL example::

    graph "rlc"
    param R
    branch 1
      junction 1 kind=1
        bond 111 element=se stroke=junction power=in param=V
        bond 112 element=i stroke=element power=out param=L
      end
    end

Diagnostics carry a rule number that names the structural convention that
was broken:

1 junction shape, 2 label encoding, 3 causal strokes, 4 power direction,
5 branch references, 6 moduli, 7 element codes, 8 numbering, 9 parameters.
``syntax`` marks lexical problems in the DSL and ``schema`` marks JSON
documents of the wrong shape.
"""

from __future__ import annotations

import json
import re
import shlex
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import jsonschema

from .core import (
    NO_BRANCH,
    UNIT_MODULUS,
    Bond,
    BondGraphModel,
    Branch,
    BranchRef,
    ElementType,
    Junction,
    Modulus,
)
from .expr import ExprSyntaxError, canonical, format_expr, parameters_of, parse_expr

__all__ = [
    "Diagnostic",
    "ParseReport",
    "parse",
    "parse_file",
    "format_model",
    "to_json",
    "from_json",
    "validate_labels",
    "validate_model",
    "link_slots",
]


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    location: str
    message: str
    rule: Union[int, str]

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message} [rule {self.rule}]"


@dataclass
class ParseReport:
    model: Optional[BondGraphModel]
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None and not any(d.severity == "error" for d in self.diagnostics)


_ELEMENT_WORDS = {
    "bond": ElementType.CONNECTING_BOND,
    "se": ElementType.SOURCE,
    "sf": ElementType.SOURCE,
    "i": ElementType.INERTANCE,
    "c": ElementType.COMPLIANCE,
    "r": ElementType.RESISTOR,
    "tf": ElementType.TRANSFORMER,
    "gy": ElementType.GYRATOR,
}
_ELEMENT_NAMES = {
    ElementType.CONNECTING_BOND: "bond",
    ElementType.INERTANCE: "i",
    ElementType.COMPLIANCE: "c",
    ElementType.RESISTOR: "r",
    ElementType.TRANSFORMER: "tf",
    ElementType.GYRATOR: "gy",
}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _err(loc: str, msg: str, rule) -> Diagnostic:
    return Diagnostic("error", loc, msg, rule)


# -- DSL ----------------------------------------------------------------------


class _DslError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(str(diag))
        self.diag = diag


def _rational(text: str, loc: str, rule) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise _DslError(_err(loc, f"not a rational number: {text!r}", rule))


def _parse_int(text: str, loc: str, what: str, rule) -> int:
    if not re.fullmatch(r"\d+", text):
        raise _DslError(_err(loc, f"{what} must be a nonnegative integer, got {text!r}", rule))
    return int(text)


def _parse_bond(words: List[str], loc: str, diags: List[Diagnostic]) -> Optional[Bond]:
    label = _parse_int(words[1], loc, "bond label", "syntax") if len(words) > 1 else None
    if label is None:
        raise _DslError(_err(loc, "bond needs a label", "syntax"))
    attrs: Dict[str, str] = {}
    for w in words[2:]:
        if "=" not in w:
            raise _DslError(_err(loc, f"expected key=value, got {w!r}", "syntax"))
        k, v = w.split("=", 1)
        if k in attrs:
            raise _DslError(_err(loc, f"attribute {k!r} given twice", "syntax"))
        attrs[k] = v
    known = {"element", "stroke", "power", "branch", "modulus", "param", "p0", "q0"}
    for k in attrs:
        if k not in known:
            raise _DslError(_err(loc, f"unknown attribute {k!r}", "syntax"))
    for k in ("element", "stroke", "power"):
        if k not in attrs:
            raise _DslError(_err(loc, f"bond {label} is missing {k}=", "syntax"))

    word = attrs["element"].lower()
    if word not in _ELEMENT_WORDS:
        diags.append(_err(loc, f"unknown element keyword {attrs['element']!r}", 7))
        return None
    element = _ELEMENT_WORDS[word]

    stroke = attrs["stroke"]
    if stroke not in ("junction", "element"):
        raise _DslError(_err(loc, f"stroke must be junction or element, got {stroke!r}", 3))
    causality = stroke == "junction"
    if word == "se" and not causality:
        diags.append(_err(loc, f"bond {label}: an effort source needs stroke=junction", 3))
    if word == "sf" and causality:
        diags.append(_err(loc, f"bond {label}: a flow source needs stroke=element", 3))

    power = attrs["power"]
    if power not in ("in", "out"):
        raise _DslError(_err(loc, f"power must be in or out, got {power!r}", 4))

    branch = NO_BRANCH
    if "branch" in attrs:
        branch = BranchRef(True, _parse_int(attrs["branch"], loc, "branch reference", 5))

    modulus = UNIT_MODULUS
    if "modulus" in attrs:
        parts = attrs["modulus"].split(",")
        if len(parts) != 2:
            diags.append(
                _err(loc, f"bond {label}: modulus needs 2 entries, got {len(parts)}", 6)
            )
            return None
        try:
            modulus = Modulus(parse_expr(parts[0]), parse_expr(parts[1]))
        except ExprSyntaxError as exc:
            raise _DslError(_err(loc, f"bad modulus expression: {exc}", 6))

    param = attrs.get("param")
    if param is not None and not _IDENT.match(param):
        raise _DslError(_err(loc, f"bad parameter name {param!r}", 9))

    return Bond(
        label=label,
        causality=causality,
        direction=power == "in",
        element=element,
        branch=branch,
        modulus=modulus,
        param=param,
        p0=_rational(attrs["p0"], loc, 9) if "p0" in attrs else Fraction(0),
        q0=_rational(attrs["q0"], loc, 9) if "q0" in attrs else Fraction(0),
    )


def _parse_dsl(text: str) -> ParseReport:
    diags: List[Diagnostic] = []
    name: Optional[str] = None
    params: List[Tuple[str, Optional[Fraction]]] = []
    branches: List[Branch] = []
    cur_branch: Optional[Tuple[int, List[Junction]]] = None
    cur_junction: Optional[Tuple[int, bool, List[Bond]]] = None
    broken = False

    try:
        for lineno, raw in enumerate(text.splitlines(), 1):
            loc = f"line {lineno}"
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                words = shlex.split(line)
            except ValueError as exc:
                raise _DslError(_err(loc, f"cannot split line: {exc}", "syntax"))
            head = words[0]

            if head == "graph":
                if len(words) != 2:
                    raise _DslError(_err(loc, 'expected graph "<name>"', "syntax"))
                name = words[1]
            elif head == "param":
                m = re.fullmatch(r"param\s+([A-Za-z_][A-Za-z0-9_]*)\s*(?:=\s*(\S+))?", line)
                if not m:
                    raise _DslError(_err(loc, "expected param <ident> [= <rational>]", "syntax"))
                pname, default = m.group(1), m.group(2)
                if any(p == pname for p, _ in params):
                    diags.append(_err(loc, f"parameter {pname!r} declared twice", 9))
                params.append((pname, _rational(default, loc, 9) if default else None))
            elif head == "branch":
                if cur_branch is not None:
                    raise _DslError(_err(loc, "branch opened before previous end", "syntax"))
                if len(words) != 2:
                    raise _DslError(_err(loc, "expected branch <p>", "syntax"))
                cur_branch = (_parse_int(words[1], loc, "branch id", "syntax"), [])
            elif head == "junction":
                if cur_branch is None or cur_junction is not None:
                    raise _DslError(_err(loc, "junction outside a branch", "syntax"))
                if len(words) != 3 or not words[2].startswith("kind="):
                    raise _DslError(_err(loc, "expected junction <q> kind=<0|1>", "syntax"))
                kind = words[2][5:]
                if kind not in ("0", "1"):
                    raise _DslError(_err(loc, f"junction kind must be 0 or 1, got {kind!r}", 1))
                number = _parse_int(words[1], loc, "junction number", "syntax")
                cur_junction = (number, kind == "1", [])
            elif head == "bond":
                if cur_junction is None:
                    raise _DslError(_err(loc, "bond outside a junction", "syntax"))
                bond = _parse_bond(words, loc, diags)
                if bond is None:
                    broken = True
                else:
                    cur_junction[2].append(bond)
            elif head == "end":
                if cur_junction is not None:
                    number, kind, bonds = cur_junction
                    cur_branch[1].append(Junction(number, kind, tuple(bonds)))
                    cur_junction = None
                elif cur_branch is not None:
                    branches.append(Branch(cur_branch[0], tuple(cur_branch[1])))
                    cur_branch = None
                else:
                    raise _DslError(_err(loc, "unmatched end", "syntax"))
            else:
                raise _DslError(_err(loc, f"unknown directive {head!r}", "syntax"))
        if cur_junction is not None or cur_branch is not None:
            raise _DslError(_err("end of input", "missing end", "syntax"))
        if name is None:
            raise _DslError(_err("line 1", 'missing graph "<name>" header', "syntax"))
    except _DslError as exc:
        diags.append(exc.diag)
        return ParseReport(None, diags)

    if broken or any(d.severity == "error" for d in diags):
        return ParseReport(None, diags)
    model = BondGraphModel(name, tuple(params), tuple(branches))
    diags.extend(validate_model(model))
    return ParseReport(None if diags else model, diags)


def parse(text: str) -> ParseReport:
    """Parse DSL or JSON text; JSON is recognised by a leading brace."""
    if text.lstrip().startswith("{"):
        return from_json(text)
    return _parse_dsl(text)


def parse_file(path) -> ParseReport:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def format_model(model: BondGraphModel) -> str:
    """Canonical DSL text; ``parse(format_model(m)).model == m``."""
    out = [f"graph {json.dumps(model.name)}"]
    for pname, default in model.parameters:
        out.append(f"param {pname}" + ("" if default is None else f" = {default}"))
    for br in model.branches:
        out.append(f"branch {br.id}")
        for j in br.junctions:
            out.append(f"  junction {j.number} kind={1 if j.kind else 0}")
            for b in j.bonds:
                if b.element == ElementType.SOURCE:
                    word = "se" if b.causality else "sf"
                else:
                    word = _ELEMENT_NAMES[b.element]
                parts = [
                    f"bond {b.label}",
                    f"element={word}",
                    f"stroke={'junction' if b.causality else 'element'}",
                    f"power={'in' if b.direction else 'out'}",
                ]
                if b.branch.present:
                    parts.append(f"branch={b.branch.common}")
                if b.modulus != UNIT_MODULUS:
                    parts.append(
                        f"modulus={format_expr(b.modulus.effort)},{format_expr(b.modulus.flow)}"
                    )
                if b.param is not None:
                    parts.append(f"param={b.param}")
                if b.p0:
                    parts.append(f"p0={b.p0}")
                if b.q0:
                    parts.append(f"q0={b.q0}")
                out.append("    " + " ".join(parts))
            out.append("  end")
        out.append("end")
    return "\n".join(out) + "\n"


# -- JSON ---------------------------------------------------------------------

_RATIONAL = {"type": "string", "pattern": r"^-?\d+(\.\d+|/\d+)?$"}
_SCHEMA = {
    "type": "object",
    "required": ["name", "parameters", "branches"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "parameters": {
            "type": "object",
            "additionalProperties": {"anyOf": [_RATIONAL, {"type": "null"}]},
        },
        "branches": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "junctions"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "junctions": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["number", "kind", "bonds"],
                            "additionalProperties": False,
                            "properties": {
                                "number": {"type": "integer", "minimum": 0},
                                "kind": {"type": "boolean"},
                                "bonds": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": [
                                            "label", "causality", "direction", "element",
                                        ],
                                        "additionalProperties": False,
                                        "properties": {
                                            "label": {"type": "integer", "minimum": 0},
                                            "causality": {"type": "boolean"},
                                            "direction": {"type": "boolean"},
                                            "branch": {
                                                "type": "object",
                                                "required": ["present", "common"],
                                                "additionalProperties": False,
                                                "properties": {
                                                    "present": {"type": "boolean"},
                                                    "common": {"type": "integer", "minimum": 0},
                                                },
                                            },
                                            "element": {"type": "integer", "minimum": 0, "maximum": 6},
                                            "modulus": {
                                                "type": "array",
                                                "items": {"type": "string"},
                                            },
                                            "param": {"type": ["string", "null"]},
                                            "p0": _RATIONAL,
                                            "q0": _RATIONAL,
                                        },
                                    },
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}


def to_json(model: BondGraphModel) -> str:
    doc = {
        "name": model.name,
        "parameters": {
            n: (None if d is None else str(d)) for n, d in model.parameters
        },
        "branches": [
            {
                "id": br.id,
                "junctions": [
                    {
                        "number": j.number,
                        "kind": j.kind,
                        "bonds": [
                            {
                                "label": b.label,
                                "causality": b.causality,
                                "direction": b.direction,
                                "branch": {"present": b.branch.present, "common": b.branch.common},
                                "element": int(b.element),
                                "modulus": [format_expr(b.modulus.effort), format_expr(b.modulus.flow)],
                                "param": b.param,
                                "p0": str(b.p0),
                                "q0": str(b.q0),
                            }
                            for b in j.bonds
                        ],
                    }
                    for j in br.junctions
                ],
            }
            for br in model.branches
        ],
    }
    return json.dumps(doc, indent=2)


def from_json(text: str) -> ParseReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return ParseReport(None, [_err(f"line {exc.lineno}", f"invalid JSON: {exc.msg}", "schema")])
    try:
        jsonschema.validate(doc, _SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "document"
        return ParseReport(None, [_err(where, exc.message, "schema")])

    diags: List[Diagnostic] = []
    branches = []
    for bi, br in enumerate(doc["branches"]):
        junctions = []
        for ji, j in enumerate(br["junctions"]):
            bonds = []
            for k, b in enumerate(j["bonds"]):
                where = f"branches/{bi}/junctions/{ji}/bonds/{k}"
                ref = b.get("branch", {"present": False, "common": 0})
                if not ref["present"] and ref["common"] != 0:
                    diags.append(_err(where, "absent branch reference must carry 0", 5))
                    continue
                mod = b.get("modulus", ["1", "1"])
                if len(mod) != 2:
                    diags.append(_err(where, f"modulus needs 2 entries, got {len(mod)}", 6))
                    continue
                try:
                    modulus = Modulus(parse_expr(mod[0]), parse_expr(mod[1]))
                except ExprSyntaxError as exc:
                    diags.append(_err(where, f"bad modulus expression: {exc}", 6))
                    continue
                bonds.append(
                    Bond(
                        label=b["label"],
                        causality=b["causality"],
                        direction=b["direction"],
                        element=ElementType(b["element"]),
                        branch=BranchRef(ref["present"], ref["common"]),
                        modulus=modulus,
                        param=b.get("param"),
                        p0=Fraction(b.get("p0", "0")),
                        q0=Fraction(b.get("q0", "0")),
                    )
                )
            junctions.append(Junction(j["number"], j["kind"], tuple(bonds)))
        branches.append(Branch(br["id"], tuple(junctions)))
    if diags:
        return ParseReport(None, diags)
    params = tuple(
        (n, None if v is None else Fraction(v)) for n, v in doc["parameters"].items()
    )
    model = BondGraphModel(doc["name"], params, tuple(branches))
    diags = validate_model(model)
    return ParseReport(None if diags else model, diags)


# -- validation ---------------------------------------------------------------


def link_slots(n_junctions: int, index: int, n_bonds: int) -> Tuple[Optional[int], Optional[int]]:
    """Positions (0-based) of the bonds linking to the previous and next junction."""
    prev_slot = n_bonds - 2 if index > 0 else None
    next_slot = n_bonds - 1 if index < n_junctions - 1 else None
    return prev_slot, next_slot


def validate_labels(model: BondGraphModel) -> List[Diagnostic]:
    diags: List[Diagnostic] = []
    seen: Dict[int, str] = {}
    branch_ids = set()
    refs: Dict[int, List[Bond]] = {}

    for br in model.branches:
        bloc = f"branch {br.id}"
        if br.id in branch_ids:
            diags.append(_err(bloc, f"duplicate branch id {br.id}", 8))
        branch_ids.add(br.id)
        numbers = set()
        for i, j in enumerate(br.junctions):
            jloc = f"{bloc} junction {j.number}"
            if j.number in numbers:
                diags.append(_err(jloc, f"duplicate junction number {j.number}", 8))
            numbers.add(j.number)
            prev_slot, next_slot = link_slots(len(br.junctions), i, len(j.bonds))
            for k, b in enumerate(j.bonds):
                loc = f"{jloc} bond {b.label}"
                expected = f"{br.id}{j.number}{k + 1}"
                if str(b.label) != expected:
                    diags.append(
                        _err(loc, f"label {b.label} does not match position (expected {expected})", 2)
                    )
                if b.label > 9999:
                    diags.append(_err(loc, f"label {b.label} has more than 4 digits", 2))
                if b.label in seen:
                    diags.append(_err(loc, f"duplicate label {b.label} (also at {seen[b.label]})", 2))
                seen.setdefault(b.label, loc)
                if b.branch.present:
                    refs.setdefault(b.branch.common, []).append(b)
                    if not b.is_connector:
                        diags.append(_err(loc, "only connectors may reference a branch", 5))
                    if k in (prev_slot, next_slot):
                        diags.append(_err(loc, "branch connector occupies a junction link slot", 5))
                elif k in (prev_slot, next_slot):
                    if not b.is_connector:
                        which = "last" if k == next_slot else "second-last"
                        diags.append(
                            _err(loc, f"the {which} bond must link to the neighbouring junction", 1)
                        )
                elif b.is_connector:
                    diags.append(
                        _err(loc, "connector is not in a link slot and has no branch reference", 1)
                    )

    for common, members in refs.items():
        loc = f"branch reference {common}"
        if common not in seen:
            diags.append(_err(loc, f"dangling branch reference {common}", 5))
        elif len(members) != 2:
            diags.append(_err(loc, f"expected 2 bonds sharing {common}, found {len(members)}", 5))
    return diags


def _same(a, b) -> bool:
    return canonical(a) == canonical(b)


def validate_model(model: BondGraphModel) -> List[Diagnostic]:
    """Label checks plus junction shape, link pairing, moduli and parameters."""
    diags = validate_labels(model)
    declared = {n for n, _ in model.parameters}

    def check_pair(a: Bond, b: Bond, loc: str):
        if a.element != b.element:
            diags.append(_err(loc, f"bonds {a.label} and {b.label} have different connector types", 7))
            return
        if a.direction == b.direction:
            diags.append(_err(loc, f"power through {a.label}/{b.label} must enter one side and leave the other", 4))
        if a.element == ElementType.TRANSFORMER:
            if not (_same(a.modulus.effort, b.modulus.flow) and _same(a.modulus.flow, b.modulus.effort)):
                diags.append(_err(loc, f"transformer moduli of {a.label}/{b.label} are not mirrored", 6))
        elif a.element == ElementType.GYRATOR:
            if not (_same(a.modulus.effort, b.modulus.effort) and _same(a.modulus.flow, b.modulus.flow)):
                diags.append(_err(loc, f"gyrator moduli of {a.label}/{b.label} differ", 6))

    for br in model.branches:
        for i, j in enumerate(br.junctions):
            jloc = f"branch {br.id} junction {j.number}"
            if len(j.bonds) < 3:
                diags.append(_err(jloc, f"a junction needs at least 3 bonds, has {len(j.bonds)}", 1))
                continue
            for b in j.bonds:
                loc = f"{jloc} bond {b.label}"
                if b.element in (ElementType.TRANSFORMER, ElementType.GYRATOR):
                    try:
                        unit = canonical(b.modulus.effort * b.modulus.flow)
                    except ArithmeticError:
                        unit = None
                    if unit is None or str(unit) != "1":
                        diags.append(_err(loc, "two-port moduli must be reciprocal", 6))
                elif b.modulus != UNIT_MODULUS:
                    diags.append(_err(loc, "only transformers and gyrators carry a modulus", 6))
                if b.element in (ElementType.INERTANCE, ElementType.COMPLIANCE, ElementType.RESISTOR) and b.param is None:
                    diags.append(_err(loc, "storage and resistive elements need param=", 9))
                used = set(parameters_of(b.modulus.effort) | parameters_of(b.modulus.flow))
                if b.param is not None:
                    used.add(b.param)
                for p in sorted(used - declared):
                    diags.append(_err(loc, f"undeclared parameter {p!r}", 9))
            if i + 1 < len(br.junctions) and len(br.junctions[i + 1].bonds) >= 3:
                check_pair(j.bonds[-1], br.junctions[i + 1].bonds[-2], jloc)

    pairs: Dict[int, List[Bond]] = {}
    for _, _, b in model.bonds():
        if b.branch.present:
            pairs.setdefault(b.branch.common, []).append(b)
    for common, members in pairs.items():
        if len(members) == 2:
            check_pair(members[0], members[1], f"branch reference {common}")
    return diags
