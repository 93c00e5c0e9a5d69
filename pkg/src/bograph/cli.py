"""Command-line front end.

Exit codes: 0 success, 2 parse error or missing file, 3 causality failure,
4 derivation diagnostics, 5 DAE or algebraic loop, 6 missing or bad
parameter bindings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .causality import CausalityError, check_causal_completeness
from .core import BondGraphModel
from .derive import DeriveError, derive_system
from .expr import DivisionByZero, MissingBinding
from .parser import parse, parse_file
from .plot import eigen_csv, eigen_svg
from .stability import Semantics, classify
from .statespace import AlgebraicLoop, DAEError, Underdetermined, instantiate, state_space

EXAMPLES = ("rlc", "fig6", "hand-index")

EXIT_PARSE, EXIT_CAUSALITY, EXIT_DERIVE, EXIT_DAE, EXIT_BINDING = 2, 3, 4, 5, 6


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def load_example_text(name: str) -> str:
    override = os.environ.get("BOGRAPH_CORPUS_DIR")
    if override:
        path = Path(override) / f"{name}.bg"
        if not path.is_file():
            raise CliError(EXIT_PARSE, f"example {name!r} not found in {override}")
        return path.read_text(encoding="utf-8")
    return resources.files("bograph").joinpath("corpus", f"{name}.bg").read_text(encoding="utf-8")


def load_example(name: str) -> BondGraphModel:
    report = parse(load_example_text(name))
    if not report.ok:
        raise CliError(EXIT_PARSE, "\n".join(map(str, report.diagnostics)))
    return report.model


def _load(args) -> BondGraphModel:
    if args.example:
        return load_example(args.example)
    if not args.input:
        raise CliError(EXIT_PARSE, "one of --example or --input is required")
    try:
        report = parse_file(args.input)
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {args.input}: {exc.strerror}")
    if not report.ok:
        raise CliError(EXIT_PARSE, "\n".join(map(str, report.diagnostics)))
    return report.model


def parse_bindings(text: Optional[str], model: Optional[BondGraphModel] = None) -> Dict[str, Fraction]:
    """``k=v,...`` with ``all=v`` binding every declared parameter first."""
    out: Dict[str, Fraction] = {}
    if model is not None:
        out.update({n: d for n, d in model.parameters if d is not None})
    if not text:
        return out
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise CliError(EXIT_BINDING, f"bad binding {item!r}; expected name=value")
        k, v = item.split("=", 1)
        try:
            pairs.append((k.strip(), Fraction(v.strip())))
        except (ValueError, ZeroDivisionError):
            raise CliError(EXIT_BINDING, f"bad value for {k.strip()!r}: {v!r}")
    for k, v in pairs:
        if k == "all":
            if model is not None:
                out.update({n: v for n, _ in model.parameters})
    for k, v in pairs:
        if k != "all":
            out[k] = v
    return out


def _emit(args, text: str):
    if getattr(args, "out", None) and args.command not in ("eigenplot",):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _state_space(model):
    try:
        return state_space(model)
    except CausalityError as exc:
        raise CliError(EXIT_CAUSALITY, str(exc))
    except (DAEError, AlgebraicLoop, Underdetermined) as exc:
        raise CliError(EXIT_DAE, str(exc))
    except DeriveError as exc:
        raise CliError(EXIT_DERIVE, str(exc))


def _numeric_A(args, model):
    ssm = _state_space(model)
    bindings = parse_bindings(args.params, model)
    try:
        return ssm, instantiate(ssm, bindings)
    except MissingBinding as exc:
        raise CliError(EXIT_BINDING, str(exc))
    except DivisionByZero as exc:
        raise CliError(EXIT_BINDING, str(exc))


# -- subcommands --------------------------------------------------------------


def cmd_validate(args) -> int:
    model = _load(args)
    report = check_causal_completeness(model)
    if not report.complete:
        raise CliError(EXIT_CAUSALITY, "\n".join(map(str, report.violations)))
    lines = [f"{model.name}: valid and causally complete"]
    for (br, jn), label in sorted(report.strong_bonds.items()):
        lines.append(f"  junction {br}{jn}: strong bond {label}")
    if report.differential_storage_bonds:
        lines.append("  differential causality on: " + ", ".join(map(str, report.differential_storage_bonds)))
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_derive(args) -> int:
    model = _load(args)
    try:
        system = derive_system(model)
    except CausalityError as exc:
        raise CliError(EXIT_CAUSALITY, str(exc))
    except DeriveError as exc:
        raise CliError(EXIT_DERIVE, str(exc))
    if system.diagnostics:
        raise CliError(EXIT_DERIVE, "\n".join(map(str, system.diagnostics)))
    if args.format == "json":
        doc = [
            {"provenance": e.provenance.value, "bond": e.bond,
             "site": list(e.site) if e.site else None, "equation": str(e)}
            for e in system.equations
        ]
        _emit(args, json.dumps(doc, indent=2) + "\n")
    else:
        _emit(args, system.dump() + "\n")
    return 0


def _matrix_text(rows):
    return "\n".join("  [" + ", ".join(r) + "]" for r in rows)


def cmd_statespace(args) -> int:
    model = _load(args)
    ssm = _state_space(model)
    doc = {
        "states": [str(s) for s in ssm.states],
        "inputs": [str(u) for u in ssm.inputs],
        "A": ssm.A_text(),
        "B": ssm.B_text(),
    }
    if args.params:
        _, num = _numeric_A(args, model)
        doc["A_numeric"] = num.A.tolist()
        doc["B_numeric"] = num.B.tolist()
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2) + "\n")
        return 0
    lines = [
        "states: " + ", ".join(doc["states"]),
        "inputs: " + ", ".join(doc["inputs"]),
        "A =", _matrix_text(doc["A"]),
        "B =", _matrix_text(doc["B"]),
    ]
    if args.params:
        lines += ["A (numeric) =", _matrix_text([[f"{x:.12g}" for x in r] for r in doc["A_numeric"]])]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _matrix_arg(text: str) -> np.ndarray:
    try:
        A = np.array(json.loads(text), dtype=float)
    except (ValueError, TypeError) as exc:
        raise CliError(EXIT_PARSE, f"bad --matrix: {exc}")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise CliError(EXIT_PARSE, "--matrix must be a square JSON array")
    return A


def _sweep(args, model):
    name, _, rng = args.sweep.partition("=")
    try:
        a, b, n = rng.split(":")
        values = [Fraction(x) for x in np.linspace(float(a), float(b), int(n)).tolist()]
    except ValueError:
        raise CliError(EXIT_BINDING, f"bad --sweep {args.sweep!r}; expected name=a:b:n")
    ssm = _state_space(model)
    base = parse_bindings(args.params, model)

    def one(v):
        bindings = dict(base, **{name: v})
        try:
            A = instantiate(ssm, bindings).A
        except (MissingBinding, DivisionByZero) as exc:
            raise CliError(EXIT_BINDING, str(exc))
        d = classify(A, args.semantics, args.tol).to_dict()
        d["value"] = float(v)
        return d

    with ThreadPoolExecutor() as pool:
        return list(pool.map(one, values))


def cmd_stability(args) -> int:
    if args.sweep:
        results = _sweep(args, _load(args))
        if args.format == "json":
            _emit(args, json.dumps(results, indent=2) + "\n")
        else:
            _emit(args, "".join(f"{r['value']:.12g}: {r['classification']}\n" for r in results))
        return 0
    if args.matrix:
        A = _matrix_arg(args.matrix)
    else:
        _, num = _numeric_A(args, _load(args))
        A = num.A
    verdict = classify(A, args.semantics, args.tol)
    if args.format == "json":
        _emit(args, json.dumps(verdict.to_dict(), indent=2) + "\n")
        return 0
    lines = [f"classification: {verdict.classification.value}", f"method: {verdict.method.value}"]
    for z in verdict.eigenvalues:
        lines.append(f"  {z.real + 0.0:.12g} {'+' if z.imag >= 0 else '-'} {abs(z.imag):.12g}i")
    if verdict.flags:
        lines += [f"{k}: {str(v).lower()}" for k, v in verdict.flags.items()]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_eigenplot(args) -> int:
    if args.matrix:
        A, title = _matrix_arg(args.matrix), "matrix"
    else:
        model = _load(args)
        _, num = _numeric_A(args, model)
        A, title = num.A, model.name
    eigs = classify(A, args.semantics, args.tol).eigenvalues
    prefix = Path(args.out or "eigenplot")
    csv_path, svg_path = prefix.with_suffix(".csv"), prefix.with_suffix(".svg")
    csv_path.write_text(eigen_csv(eigs), encoding="utf-8")
    svg_path.write_text(eigen_svg(eigs, f"eigenvalues: {title}"), encoding="utf-8")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bograph", description="Bond-graph state-space and stability tool")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            src = sp.add_mutually_exclusive_group()
            src.add_argument("--example", choices=EXAMPLES)
            src.add_argument("--input", metavar="PATH")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", metavar="PATH")

    common(sub.add_parser("validate", help="check labels and causal strokes"))
    common(sub.add_parser("derive", help="print junction and element equations"))
    ss = sub.add_parser("statespace", help="print symbolic A and B")
    common(ss)
    ss.add_argument("--params", metavar="k=v,...")
    for name in ("stability", "eigenplot"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--params", metavar="k=v,...")
        sp.add_argument("--semantics", choices=[s.value for s in Semantics], default="standard")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--matrix", metavar="JSON")
        if name == "stability":
            sp.add_argument("--sweep", metavar="param=a:b:n")
    return p


COMMANDS = {
    "validate": cmd_validate,
    "derive": cmd_derive,
    "statespace": cmd_statespace,
    "stability": cmd_stability,
    "eigenplot": cmd_eigenplot,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
