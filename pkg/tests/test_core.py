from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bograph.core import (
    Bond,
    BranchRef,
    ElementType as ET,
    IllegalCausality,
    LinearForm,
    Modulus,
    SignalVar,
    constitutive_equation,
    format_linform,
    is_differential_storage,
    is_integral_storage,
    linform_add,
    linform_scale,
    modulus_select,
)
from bograph.expr import Param, evaluate, parse_expr

LAWS = {
    (ET.SOURCE, True): "e(111) = u(111)",
    (ET.SOURCE, False): "f(111) = u(111)",
    (ET.RESISTOR, True): "e(111) = X*f(111)",
    (ET.RESISTOR, False): "f(111) = 1/X*e(111)",
    (ET.COMPLIANCE, True): "e(111) = 1/X*q(111)",
    (ET.COMPLIANCE, False): "f(111) = d/dt[X*e(111)]",
    (ET.INERTANCE, False): "f(111) = 1/X*p(111)",
    (ET.INERTANCE, True): "e(111) = d/dt[X*f(111)]",
}


@pytest.mark.parametrize("element", list(ET))
@pytest.mark.parametrize("stroke", [True, False])
def test_constitutive_table(element, stroke):
    bond = Bond(111, stroke, True, element, param="X")
    expected = LAWS.get((element, stroke))
    if expected is None:
        with pytest.raises(IllegalCausality):
            constitutive_equation(bond)
    else:
        assert str(constitutive_equation(bond)) == expected


def test_storage_causality():
    assert is_integral_storage(Bond(1, False, True, ET.INERTANCE, param="L"))
    assert is_differential_storage(Bond(1, True, True, ET.INERTANCE, param="L"))
    assert is_integral_storage(Bond(1, True, True, ET.COMPLIANCE, param="C"))
    assert not is_integral_storage(Bond(1, True, True, ET.RESISTOR, param="R"))


def test_branch_ref_absent_means_zero():
    with pytest.raises(ValueError):
        BranchRef(False, 131)


def test_modulus_select():
    b = Bond(1, True, True, ET.TRANSFORMER, modulus=Modulus(Param("a"), Param("b")))
    assert modulus_select(b) == Param("b")
    assert modulus_select(Bond(1, False, True, ET.TRANSFORMER, modulus=Modulus(Param("a"), Param("b")))) == Param("a")


def test_linear_form_printing():
    f = LinearForm({SignalVar("e", 112): -1, SignalVar("e", 111): 1, SignalVar("f", 114): parse_expr("-R")})
    assert format_linform(f) == "e(111) - e(112) - R*f(114)"
    assert format_linform(LinearForm()) == "0"


var_st = st.builds(SignalVar, st.sampled_from("efpqu"), st.integers(100, 120))
coef_st = st.fractions(min_value=-5, max_value=5, max_denominator=4)
forms = st.dictionaries(var_st, coef_st, max_size=5).map(LinearForm)


def _at(form, point):
    return sum(evaluate(c, {}) * point[v] for v, c in form.terms.items())


@given(forms, forms, coef_st, st.randoms(use_true_random=False))
def test_linear_form_algebra(a, b, k, rnd):
    point = {v: Fraction(rnd.randint(-9, 9)) for v in set(a.variables()) | set(b.variables())}
    assert _at(linform_add(a, b), point) == _at(a, point) + _at(b, point)
    assert _at(linform_scale(a, k), point) == k * _at(a, point)
    assert _at(a - a, point) == 0
