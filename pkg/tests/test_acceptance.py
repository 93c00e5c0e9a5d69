"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import random
import sys
import tempfile
import time
import xml.etree.ElementTree as ElementTree
from contextlib import redirect_stdout
from io import StringIO
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bograph.cli import load_example, load_example_text, main  # noqa: E402
from bograph.core import Bond, ElementType, Junction, SignalVar  # noqa: E402
from bograph.derive import derive_system, summation_core  # noqa: E402
from bograph.expr import canonical, evaluate, parse_expr  # noqa: E402
from bograph.parser import format_model, parse, to_json  # noqa: E402
from bograph.stability import (  # noqa: E402
    Classification,
    Semantics,
    char_poly,
    classify,
    eigenvalues,
    factored_cubic_criterion,
    match_cubic_factorization,
    routh_hurwitz,
)
from bograph.statespace import instantiate, state_space  # noqa: E402
from modelgen import random_bindings, random_chain  # noqa: E402
from oracle import oracle_eliminate, oracle_junction_equations, oracle_poly_roots  # noqa: E402

# pinned tolerances and budgets
RUNTIME_BUDGET_S = 1.0
CHAR_POLY_TOL = 1e-9
EIGEN_TOL = 1e-7
CUBIC_TOL = 1e-7

RLC_LINES = [
    "const(111): e(111) = u(111)",
    "const(112): f(112) = 1/L*p(112)",
    "const(113): e(113) = 1/C*q(113)",
    "const(114): e(114) = R*f(114)",
    "sum(j=11): e(111) - e(112) - e(113) - e(114) = 0",
    "eq(j=11): f(112) = f(111) = f(113) = f(114)",
]

FINGER_A = [
    ["-Dm_4/Jm_4 - Geer_4^2*D_4/Jm_4 - Motor_4^2/(Jm_4*Ra_4)", "Geer_4*D_4/J_4", "-Geer_4/K_2"],
    ["Geer_4*D_4/Jm_4", "-D_4/J_4", "1/K_2"],
    ["Geer_4/Jm_4", "-1/J_4", "0"],
]


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    system, dt = _timed(lambda: derive_system(load_example("rlc")))
    lines = system.dump().splitlines()
    ok = lines == RLC_LINES and dt < RUNTIME_BUDGET_S
    return ok, f"{len(lines)} equations, {dt:.3f} s"


def criterion_2():
    ssm, dt = _timed(lambda: state_space(load_example("rlc")))
    ok = (
        ssm.A_text() == [["-R/L", "-1/C"], ["1/L", "0"]]
        and ssm.B_text() == [["1"], ["0"]]
        and dt < RUNTIME_BUDGET_S
    )
    return ok, f"A={ssm.A_text()} B={ssm.B_text()}, {dt:.3f} s"


def criterion_3():
    ssm, dt = _timed(lambda: state_space(load_example("hand-index")))
    matches = sum(
        canonical(ssm.A[i][j]) == canonical(parse_expr(FINGER_A[i][j])) for i in range(3) for j in range(3)
    )
    asymmetric = "J_4" in ssm.A_text()[0][1] and "Jm_4" in ssm.A_text()[1][0]
    ok = matches == 9 and asymmetric and dt < RUNTIME_BUDGET_S
    return ok, f"{matches}/9 entries, J_4/Jm_4 asymmetry {'kept' if asymmetric else 'lost'}, {dt:.3f} s"


def criterion_4():
    def run():
        model = load_example("hand-index")
        A = instantiate(state_space(model), {n: 1 for n, _ in model.parameters}).A
        return A, char_poly(A), classify(A)

    (A, p, verdict), dt = _timed(run)
    poly_ok = all(abs(a - b) <= CHAR_POLY_TOL for a, b in zip(p, [1, 4, 4, 2]))
    cubic = factored_cubic_criterion(*match_cubic_factorization(A, CUBIC_TOL), Semantics.STANDARD)
    rh = routh_hurwitz(p)
    roots_lhp = all(z.real < 0 for z in oracle_poly_roots(p))
    ok = poly_ok and verdict.classification == Classification.STABLE and cubic and rh and roots_lhp
    ok = ok and dt < RUNTIME_BUDGET_S
    return ok, f"p={p}, {verdict.classification.value}, cubic={cubic}, routh={rh}, {dt:.3f} s"


def criterion_5():
    A = instantiate(state_space(load_example("rlc")), {"R": 1, "L": 1, "C": 1}).A
    verdict = classify(A)
    want = [complex(-0.5, -0.8660254), complex(-0.5, 0.8660254)]
    err = max(abs(a - b) for a, b in zip(verdict.eigenvalues, want))
    ok = err <= EIGEN_TOL and verdict.classification == Classification.STABLE
    return ok, f"max error {err:.2e}, {verdict.classification.value}"


def criterion_6a():
    rng = random.Random(6001)
    passed = 0
    for _ in range(500):
        n = rng.randint(3, 8)
        bonds = tuple(
            Bond(100 + k, rng.random() < 0.5, rng.random() < 0.5, ElementType(rng.randint(0, 6)))
            for k in range(1, n + 1)
        )
        j = Junction(1, rng.random() < 0.5, bonds)
        kind = "e" if j.kind else "f"
        want = {SignalVar(kind, b.label): b.sign for b in bonds[:-2]}
        got = {v: int(str(c)) for v, c in summation_core(j).terms.items()}
        passed += got == want
    return passed == 500, f"{passed}/500"


def criterion_6b():
    rng = random.Random(6002)
    passed = 0
    for _ in range(200):
        model = random_chain(rng)
        b = random_bindings(rng, model)
        ssm = state_space(model)
        states = [(s.kind, s.label) for s in ssm.states]
        inputs = [(u.kind, u.label) for u in ssm.inputs]
        ref = oracle_eliminate(oracle_junction_equations(model, b), states, inputs)
        same = all(
            evaluate(ssm.A[i][j], b) == ref[s].get(x, 0)
            for i, s in enumerate(states) for j, x in enumerate(states)
        ) and all(
            evaluate(ssm.B[i][j], b) == ref[s].get(u, 0)
            for i, s in enumerate(states) for j, u in enumerate(inputs)
        )
        passed += same
    return passed == 200, f"{passed}/200"


def criterion_6c():
    rng = random.Random(6003)
    passed = total = 0
    while total < 1000:
        A = np.array([[round(rng.uniform(-4, 4), 3) for _ in range(3)] for _ in range(3)])
        eigs = eigenvalues(A)
        if min(abs(z.real) for z in eigs) <= CUBIC_TOL:
            continue
        total += 1
        stable = classify(A).classification == Classification.STABLE
        cubic = factored_cubic_criterion(*match_cubic_factorization(A, CUBIC_TOL))
        passed += cubic == routh_hurwitz(char_poly(A)) == stable
    return passed == 1000, f"{passed}/1000"


def criterion_6d():
    rng = random.Random(6004)
    passed = 0
    for _ in range(500):
        n = rng.randint(1, 6)
        A = np.diag([rng.choice([-3.0, -1.5, -0.25, 0.0, 0.5, 2.0]) for _ in range(n)])
        for i in range(n):
            for j in range(i + 1, n):
                A[i, j] = rng.choice([0.0, 1.0, -2.5, 0.75])
        if rng.random() < 0.5:
            A = A.T
        passed += classify(A).classification == classify(A, shortcut=False).classification
    return passed == 500, f"{passed}/500"


def criterion_6e():
    flags = classify(np.diag([1.0, -1.0]), Semantics.LITERAL).flags
    ok = flags["stable_sys"] and flags["unstable_sys"]
    return ok, f"stable_sys={flags['stable_sys']} unstable_sys={flags['unstable_sys']}"


def criterion_7():
    models = [parse(load_example_text(n)).model for n in ("rlc", "fig6", "hand-index")]
    rng = random.Random(7007)
    models += [random_chain(rng) for _ in range(100)]
    passed = sum(
        parse(format_model(m)).model == m and parse(to_json(m)).model == m for m in models
    )
    return passed == len(models), f"{passed}/{len(models)}"


def criterion_8():
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for k in range(2):
            prefix = Path(tmp) / f"run{k}"
            with redirect_stdout(StringIO()):
                code = main(["eigenplot", "--example", "hand-index", "--params", "all=1", "--out", str(prefix)])
            if code != 0:
                return False, f"exit {code}"
            blobs.append((prefix.with_suffix(".csv").read_bytes(), prefix.with_suffix(".svg").read_bytes()))
    rows = blobs[0][0].decode().splitlines()[1:]
    left = all(float(r.split(",")[0]) < 0 for r in rows)
    try:
        svg_ok = ElementTree.fromstring(blobs[0][1]).tag == "{http://www.w3.org/2000/svg}svg"
    except ElementTree.ParseError:
        svg_ok = False
    same = blobs[0] == blobs[1]
    ok = len(rows) == 3 and left and svg_ok and same
    return ok, f"{len(rows)} rows, all re<0={left}, svg={svg_ok}, identical={same}"


CRITERIA = [
    ("1", "RLC derivation", criterion_1),
    ("2", "RLC state space", criterion_2),
    ("3", "index-finger system matrix", criterion_3),
    ("4", "index-finger stability", criterion_4),
    ("5", "RLC numeric eigenvalues", criterion_5),
    ("6a", "skip-last-two summation support", criterion_6a),
    ("6b", "derive+reduce vs oracle", criterion_6b),
    ("6c", "factored cubic = Routh-Hurwitz = eigenvalues", criterion_6c),
    ("6d", "triangular shortcut = general", criterion_6d),
    ("6e", "literal-semantics saddle flags", criterion_6e),
    ("7", "parser round trip", criterion_7),
    ("8", "eigenplot", criterion_8),
]


def _line(key, title, ok, detail):
    return f"{'PASS' if ok else 'FAIL'}  criterion {key:<3} {title}: {detail}"


@pytest.mark.parametrize("key,title,check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(key, title, check, acceptance_line):
    ok, detail = check()
    acceptance_line(_line(key, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for key, title, check in CRITERIA:
        ok, detail = check()
        failures += not ok
        print(_line(key, title, ok, detail))
    sys.exit(1 if failures else 0)
