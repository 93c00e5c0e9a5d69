"""Bond-graph modelling: causal derivation, state space and stability."""

from .causality import CausalityError, CausalityReport, check_causal_completeness, strong_bond
from .core import (
    Bond,
    BondGraphModel,
    Branch,
    BranchRef,
    ElementType,
    Equation,
    IllegalCausality,
    Junction,
    LinearForm,
    Modulus,
    Provenance,
    SignalVar,
    constitutive_equation,
)
from .derive import EmptyModel, EquationSystem, derive_system
from .expr import ParamExpr, canonical_str, parse_expr
from .parser import ParseReport, format_model, from_json, parse, parse_file, to_json
from .stability import Classification, Semantics, classify, char_poly, eigenvalues
from .statespace import (
    AlgebraicLoop,
    DAEError,
    StateSpaceModel,
    assemble,
    instantiate,
    reduce_to_state_form,
    state_space,
    state_variables,
)

__version__ = "0.1.0"
