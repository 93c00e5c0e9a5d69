"""Reduction of a derived equation system to x' = A x + B u."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from .core import (
    BondGraphModel,
    ElementType,
    Equation,
    LinearForm,
    Provenance,
    SignalVar,
    is_differential_storage,
    is_integral_storage,
    state_of,
)
from .derive import EquationSystem, derive_system
from .expr import ONE, ParamExpr, canonical_str, evaluate, parse_expr

__all__ = [
    "DAEError",
    "AlgebraicLoop",
    "Underdetermined",
    "StateSpaceModel",
    "NumericStateSpace",
    "state_variables",
    "input_variables",
    "reduce_to_state_form",
    "assemble",
    "instantiate",
    "state_space",
]


class DAEError(ValueError):
    """Differential causality leaves an implicit system."""

    def __init__(self, labels: Sequence[int]):
        super().__init__(
            "differential causality on bond(s) " + ", ".join(map(str, labels))
            + "; the model is a DAE and has no explicit state form"
        )
        self.labels = list(labels)


class AlgebraicLoop(ValueError):
    def __init__(self, cycle: Sequence[SignalVar]):
        super().__init__("algebraic loop through " + " -> ".join(map(str, cycle)))
        self.cycle = list(cycle)


class Underdetermined(ValueError):
    def __init__(self, var: SignalVar):
        super().__init__(f"no equation determines {var}")
        self.var = var


def state_variables(model: BondGraphModel) -> List[SignalVar]:
    """Momenta and displacements of integral storage, in branch/junction/bond order."""
    diff = [b.label for _, _, b in model.bonds() if is_differential_storage(b)]
    if diff:
        raise DAEError(diff)
    return [state_of(b) for _, _, b in model.bonds() if is_integral_storage(b)]


def input_variables(model: BondGraphModel) -> List[SignalVar]:
    return [SignalVar("u", b.label) for _, _, b in model.bonds() if b.element == ElementType.SOURCE]


def _solve_for(eq: Equation, v: SignalVar) -> LinearForm:
    res = eq.residual()
    c = res.coeff(v)
    rest = res - LinearForm.var(v, c)
    return rest.scale(-ONE / c)


def reduce_to_state_form(
    system: EquationSystem,
    states: Sequence[SignalVar],
    inputs: Sequence[SignalVar],
    max_passes: Optional[int] = None,
) -> Dict[SignalVar, LinearForm]:
    """Express each state derivative over states and inputs by substitution.

    Every equation is solved for the variable it defines; variables are then
    replaced recursively.  A variable met again while its own definition is
    being expanded is an algebraic loop.  ``max_passes`` bounds the nesting
    depth and defaults to the number of equations.
    """
    known = set(states) | set(inputs)
    defs: Dict[SignalVar, LinearForm] = {}
    for eq in system.equations:
        if eq.lhs_derivative or eq.rhs_derivative:
            raise DAEError([eq.bond] if eq.bond is not None else [])
        v = eq.defines
        if v is None:
            v = next((x for x in eq.residual().variables() if x not in known and x not in defs), None)
            if v is None:
                continue
        if v in defs or v in known:
            continue
        defs[v] = _solve_for(eq, v)

    limit = max_passes if max_passes is not None else len(defs) + 1
    done: Dict[SignalVar, LinearForm] = {}
    stack: List[SignalVar] = []

    def resolve(v: SignalVar) -> LinearForm:
        if v in known:
            return LinearForm.var(v)
        if v in done:
            return done[v]
        if v in stack:
            raise AlgebraicLoop(stack[stack.index(v):] + [v])
        if len(stack) >= limit:
            raise AlgebraicLoop(stack)
        if v not in defs:
            raise Underdetermined(v)
        stack.append(v)
        out = LinearForm(constant=defs[v].constant)
        for x, c in defs[v].terms.items():
            out = out + resolve(x).scale(c)
        stack.pop()
        done[v] = out
        return out

    result = {}
    for s in states:
        rate = SignalVar("e" if s.kind == "p" else "f", s.label)
        result[s] = resolve(rate)
    return result


@dataclass(frozen=True)
class StateSpaceModel:
    states: tuple
    inputs: tuple
    A: tuple  # rows of canonical ParamExpr
    B: tuple

    def A_text(self) -> List[List[str]]:
        return [[canonical_str(c) for c in row] for row in self.A]

    def B_text(self) -> List[List[str]]:
        return [[canonical_str(c) for c in row] for row in self.B]


@dataclass(frozen=True)
class NumericStateSpace:
    states: tuple
    inputs: tuple
    A: np.ndarray
    B: np.ndarray


def _canon(e: ParamExpr) -> ParamExpr:
    return parse_expr(canonical_str(e))


def assemble(
    state_eqs: Mapping[SignalVar, LinearForm],
    states: Sequence[SignalVar],
    inputs: Sequence[SignalVar],
) -> StateSpaceModel:
    A, B = [], []
    for s in states:
        form = state_eqs[s]
        stray = [v for v in form.variables() if v not in states and v not in inputs]
        if stray:
            raise Underdetermined(stray[0])
        A.append(tuple(_canon(form.coeff(x)) for x in states))
        B.append(tuple(_canon(form.coeff(u)) for u in inputs))
    return StateSpaceModel(tuple(states), tuple(inputs), tuple(A), tuple(B))


def instantiate(ssm: StateSpaceModel, bindings: Mapping[str, Fraction]) -> NumericStateSpace:
    """Evaluate every entry exactly, then convert to floats."""

    def num(rows, width):
        out = np.zeros((len(rows), width))
        for i, row in enumerate(rows):
            for j, c in enumerate(row):
                out[i, j] = float(evaluate(c, bindings))
        return out

    return NumericStateSpace(
        ssm.states, ssm.inputs, num(ssm.A, len(ssm.states)), num(ssm.B, len(ssm.inputs))
    )


def state_space(model: BondGraphModel) -> StateSpaceModel:
    """Derive, reduce and assemble in one step."""
    states = state_variables(model)
    inputs = input_variables(model)
    system = derive_system(model)
    return assemble(reduce_to_state_form(system, states, inputs), states, inputs)
