import random

import pytest
from hypothesis import given, settings, strategies as st

from bograph.causality import check_causal_completeness, strong_bond, strong_index
from bograph.cli import load_example, load_example_text
from bograph.core import Bond, ElementType as ET, Junction
from bograph.parser import parse
from modelgen import random_chain


def test_rlc_strong_bond_is_the_inductor():
    report = check_causal_completeness(load_example("rlc"))
    assert report.complete
    assert report.strong_bonds == {(1, 1): 112}


def test_hand_index_strong_bonds():
    report = check_causal_completeness(load_example("hand-index"))
    assert report.complete
    assert report.strong_bonds == {(4, 1): 411, (4, 2): 421, (4, 3): 433, (4, 4): 442}


def test_two_candidates_fail():
    text = load_example_text("rlc").replace("element=c stroke=junction", "element=c stroke=element")
    report = check_causal_completeness(parse(text).model)
    assert not report.complete
    assert report.violations[0].rule == 3
    assert report.differential_storage_bonds == [113]


def test_no_candidate_fails():
    text = load_example_text("rlc").replace("element=i stroke=element", "element=i stroke=junction")
    assert not check_causal_completeness(parse(text).model).complete


def test_strong_bond_takes_the_highest_position():
    j = Junction(1, True, tuple(Bond(110 + k, c, True, ET.RESISTOR, param="R") for k, c in
                                enumerate([False, True, False, True], 1)))
    assert strong_bond(j, False) == 2
    assert strong_bond(j, True) == 3
    assert strong_index(Junction(1, True, j.bonds[1::2])) is None


@settings(max_examples=100, deadline=None, derandomize=True)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_chains_are_complete(seed):
    model = random_chain(random.Random(seed))
    report = check_causal_completeness(model)
    assert report.complete, report.violations
    assert len(report.strong_bonds) == len(model.branches[0].junctions)
