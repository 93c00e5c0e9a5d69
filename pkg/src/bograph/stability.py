"""Characteristic polynomials, eigenvalues and stability verdicts."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "Semantics",
    "Classification",
    "Method",
    "StabilityVerdict",
    "NonConvergence",
    "char_poly",
    "eigenvalues",
    "classify",
    "literal_flags",
    "triangular_shortcut",
    "routh_hurwitz",
    "factored_cubic_criterion",
    "match_cubic_factorization",
    "MAX_ORDER",
]

MAX_ORDER = 12


class NonConvergence(ArithmeticError):
    pass


class Semantics(str, Enum):
    STANDARD = "standard"
    LITERAL = "paper-literal"


class Classification(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "MarginallyStable"


class Method(str, Enum):
    GENERAL = "GeneralEigen"
    TRIANGULAR = "TriangularShortcut"
    FACTORED_CUBIC = "FactoredCubic"


@dataclass
class StabilityVerdict:
    classification: Classification
    eigenvalues: List[complex]
    semantics: Semantics
    method: Method
    flags: Optional[Dict[str, bool]] = None

    def to_dict(self) -> dict:
        d = {
            "classification": self.classification.value,
            "eigenvalues": [{"re": z.real, "im": z.imag} for z in self.eigenvalues],
            "semantics": self.semantics.value,
            "method": self.method.value,
        }
        if self.flags is not None:
            d["flags"] = dict(self.flags)
        return d


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_ORDER:
        raise ValueError(f"order {A.shape[0]} exceeds the supported maximum {MAX_ORDER}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _char_poly_exact(A: np.ndarray) -> List[Fraction]:
    # Every float is dyadic, so A = M / 2^K with M integral.  Faddeev-LeVerrier
    # on M stays in the integers (each division by k is exact) and the
    # coefficients of A follow by rescaling.
    n = A.shape[0]
    fr = [[Fraction(float(x)) for x in row] for row in A]
    K = max(f.denominator for row in fr for f in row).bit_length() - 1
    M = [[(f.numerator << K) // f.denominator for f in row] for row in fr]
    coeffs = [Fraction(1)]
    Mk = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        # Mk = M @ (M_{k-1} + c_{k-1} I)
        for i in range(n):
            Mk[i][i] += c
        cols = list(zip(*Mk))
        Mk = [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in M]
        c = -sum(Mk[i][i] for i in range(n)) // k
        coeffs.append(Fraction(c, 1 << (K * k)))
    return coeffs


def char_poly(A) -> List[float]:
    """Monic coefficients of det(sI - A), highest power first.

    Computed exactly, so the only rounding is the final conversion to floats.
    """
    A = _square(A)
    return [float(x) for x in _char_poly_exact(A)]


# -- exact polynomial helpers (highest power first) ---------------------------


def _trim(p: List[Fraction]) -> List[Fraction]:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _deriv(p: List[Fraction]) -> List[Fraction]:
    n = len(p) - 1
    return _trim([c * (n - i) for i, c in enumerate(p[:-1])]) if n > 0 else [Fraction(0)]


def _divmod(a: List[Fraction], b: List[Fraction]) -> Tuple[List[Fraction], List[Fraction]]:
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        f = a[0] / b[0]
        q[len(q) - (len(a) - len(b)) - 1] = f
        for i in range(len(b)):
            a[i] -= f * b[i]
        a = a[1:] if len(a) > 1 else [Fraction(0)]
    return _trim(q), _trim(a)


def _monic(p: List[Fraction]) -> List[Fraction]:
    return [c / p[0] for c in p]


def _gcd(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    while any(b):
        a, b = b, _divmod(a, b)[1]
    return _monic(a)


def _sub(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    w = max(len(a), len(b))
    a = [Fraction(0)] * (w - len(a)) + list(a)
    b = [Fraction(0)] * (w - len(b)) + list(b)
    return _trim([x - y for x, y in zip(a, b)])


def _squarefree(p: List[Fraction]) -> List[Tuple[List[Fraction], int]]:
    """Yun's decomposition: p = prod f_i^i with each f_i square-free and monic."""
    out = []
    d = _deriv(p)
    a = _gcd(p, d)
    b = _divmod(p, a)[0]
    e = _sub(_divmod(d, a)[0], _deriv(b))
    i = 1
    while len(b) > 1:
        a = _gcd(b, e)
        if len(a) > 1:
            out.append((a, i))
        b = _divmod(b, a)[0]
        e = _sub(_divmod(e, a)[0], _deriv(b))
        i += 1
    return out


def _poly_norm(p: Sequence[float], z: complex) -> float:
    r = max(1.0, abs(z))
    n = len(p) - 1
    return sum(abs(a) * r ** (n - i) for i, a in enumerate(p))


def _residual_ok(p, z, rel=1e-9) -> bool:
    return abs(np.polyval(p, z)) <= rel * max(1.0, _poly_norm(p, z))


def _quadratic(b: float, c: float) -> List[complex]:
    disc = b * b - 4 * c
    if disc >= 0:
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        if q == 0:
            return [0j, 0j]
        return sorted([complex(q), complex(c / q)], key=lambda z: z.real)
    s = math.sqrt(-disc) / 2
    return [complex(-b / 2, -s), complex(-b / 2, s)]


def _aberth(p: np.ndarray, max_iter: int = 500) -> np.ndarray:
    n = len(p) - 1
    radius = 1 + max(abs(a) for a in p[1:])
    z = np.array([radius * cmath.exp(1j * (2 * math.pi * k / n + 0.4)) for k in range(n)])
    dp = np.polyder(p)
    for _ in range(max_iter):
        pv = np.polyval(p, z)
        dv = np.polyval(dp, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dv != 0, pv / dv, pv)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1)
            inv = 1 / diff
            np.fill_diagonal(inv, 0)
            w = ratio / (1 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0)
        z = z - w
        if np.all(np.abs(w) <= 1e-15 * (1 + np.abs(z))):
            break
    for _ in range(3):
        pv = np.polyval(p, z)
        dv = np.polyval(dp, z)
        cand = np.where(dv != 0, z - pv / np.where(dv != 0, dv, 1), z)
        better = np.abs(np.polyval(p, cand)) < np.abs(pv)
        z = np.where(better, cand, z)
    return z


def _simple_roots(p: List[float]) -> List[complex]:
    n = len(p) - 1
    if n == 1:
        return [complex(-p[1] / p[0])]
    if n == 2:
        return _quadratic(p[1] / p[0], p[2] / p[0])
    roots = [complex(z) for z in _aberth(np.array(p, dtype=complex))]
    for z in roots:
        if not _residual_ok(p, z):
            raise NonConvergence(f"root {z} has residual {abs(np.polyval(p, z)):.3g}")
    # Conjugate pairs come out slightly unequal; symmetrise near-real roots.
    return [complex(z.real, 0.0) if abs(z.imag) <= 1e-12 * (1 + abs(z)) else z for z in roots]


def eigenvalues(A) -> List[complex]:
    """All eigenvalues as roots of the characteristic polynomial.

    The exact polynomial is split into square-free factors, so repeated
    eigenvalues are found as simple roots.  Closed forms handle factors up to
    degree 2 and Aberth iteration the rest.  Each root satisfies
    |p(z)| <= 1e-9 * sum_i |a_i| max(1,|z|)^i.
    """
    A = _square(A)
    if A.shape[0] == 0:
        return []
    exact = _char_poly_exact(A)
    p = [float(x) for x in exact]
    roots: List[complex] = []
    for factor, mult in _squarefree(exact):
        roots.extend(_simple_roots([float(x) for x in factor]) * mult)
    for z in roots:
        if not _residual_ok(p, z):
            raise NonConvergence(f"root {z} has residual {abs(np.polyval(p, z)):.3g}")
    return sorted(roots, key=lambda z: (z.real, z.imag))


def _band(eigs: Sequence[complex], tol: Optional[float]) -> float:
    scale = max((abs(z) for z in eigs), default=0.0)
    return (1e-9 if tol is None else tol) * (1 + scale)


def literal_flags(eigs: Sequence[complex], tol: Optional[float] = None) -> Dict[str, bool]:
    """Existential flags: some eigenvalue left of, right of, or on the axis."""
    band = _band(eigs, tol)
    return {
        "stable_sys": any(z.real < -band for z in eigs),
        "unstable_sys": any(z.real > band for z in eigs),
        "marginally_stable_sys": any(abs(z.real) <= band for z in eigs),
    }


def _standard(eigs: Sequence[complex], tol: Optional[float]) -> Classification:
    band = _band(eigs, tol)
    if any(z.real > band for z in eigs):
        return Classification.UNSTABLE
    if all(z.real < -band for z in eigs):
        return Classification.STABLE
    return Classification.MARGINAL


def triangular_shortcut(A, tol: float = 0.0) -> Optional[List[complex]]:
    """Diagonal entries when A is triangular (off-triangle entries within tol)."""
    A = _square(A)
    lower = np.tril(A, -1)
    upper = np.triu(A, 1)
    if np.all(np.abs(lower) <= tol) or np.all(np.abs(upper) <= tol):
        return sorted((complex(x) for x in np.diag(A)), key=lambda z: (z.real, z.imag))
    return None


def classify(
    A,
    semantics: Semantics = Semantics.STANDARD,
    tol: Optional[float] = None,
    shortcut: bool = True,
) -> StabilityVerdict:
    """Stability verdict for x' = A x.

    The classification is always the standard one; literal semantics add
    the three existential flags alongside it.  ``shortcut=False`` skips the
    triangular fast path.
    """
    semantics = Semantics(semantics)
    eigs = triangular_shortcut(A) if shortcut else None
    method = Method.TRIANGULAR
    if eigs is None:
        eigs = eigenvalues(A)
        method = Method.GENERAL
    flags = literal_flags(eigs, tol) if semantics == Semantics.LITERAL else None
    return StabilityVerdict(_standard(eigs, tol), eigs, semantics, method, flags)


def routh_hurwitz(coeffs: Sequence[float], eps: float = 1e-12) -> bool:
    """True iff every root of the polynomial has negative real part.

    A first-column entry that vanishes (relative to ``eps``) is replaced by a
    small positive number to finish the array; any such replacement means a
    root on or right of the imaginary axis, so the result is False.
    """
    c = [float(x) for x in coeffs]
    while c and c[0] == 0:
        c.pop(0)
    if not c:
        raise ValueError("zero polynomial")
    if c[0] < 0:
        c = [-x for x in c]
    n = len(c) - 1
    if n == 0:
        return True
    scale = max(abs(x) for x in c)
    tiny = eps * scale
    rows = [c[0::2], c[1::2]]
    width = len(rows[0])
    rows = [r + [0.0] * (width - len(r)) for r in rows]
    perturbed = False
    for _ in range(n - 1):
        a, b = rows[-2], rows[-1]
        if all(abs(x) <= tiny for x in b):
            return False
        if abs(b[0]) <= tiny:
            b = [tiny] + b[1:]
            rows[-1] = b
            perturbed = True
        new = [(b[0] * a[k + 1] - a[0] * b[k + 1]) / b[0] for k in range(width - 1)] + [0.0]
        rows.append(new)
    first = [r[0] for r in rows[: n + 1]]
    if any(abs(x) <= tiny for x in first):
        return False
    return not perturbed and all(x > 0 for x in first)


def factored_cubic_criterion(r: float, b1: float, c1: float, semantics: Semantics = Semantics.STANDARD) -> bool:
    """Stability test for (s + r)(s^2 + b1 s + c1).

    Standard semantics require r, b1 and c1 all positive.  Literal
    semantics evaluate the original disjunctive condition unchanged:
    0<r or (0<b1 and disc<=0) or (0<disc and (disc<b1 or -b1<sqrt(disc))).
    """
    semantics = Semantics(semantics)
    if semantics == Semantics.STANDARD:
        return r > 0 and b1 > 0 and c1 > 0
    disc = b1 * b1 - 4 * c1
    return (
        0 < r
        or (0 < b1 and (disc < 0 or disc == 0))
        or (0 < disc and (disc < b1 or -b1 < math.sqrt(disc)))
    )


def match_cubic_factorization(A, tol: float = 1e-7) -> Tuple[float, float, float]:
    """(r, b1, c1) with det(sI - A) = (s + r)(s^2 + b1 s + c1), r from the most negative real root."""
    A = _square(A)
    if A.shape[0] != 3:
        raise ValueError("cubic factorisation needs a 3x3 matrix")
    p = char_poly(A)
    eigs = eigenvalues(A)
    real = [z.real for z in eigs if abs(z.imag) <= 1e-7 * (1 + abs(z))]
    if not real:
        real = [min(eigs, key=lambda z: abs(z.imag)).real]
    x = min(real)
    for _ in range(5):
        d = 3 * x * x + 2 * p[1] * x + p[2]
        if d == 0:
            break
        step = np.polyval(p, x) / d
        if not abs(np.polyval(p, x - step)) < abs(np.polyval(p, x)):
            break
        x -= step
    r = -x
    b1 = p[1] - r
    c1 = p[2] - b1 * r
    if abs(c1 * r - p[3]) > tol * (1 + abs(p[3]) + abs(c1 * r)):
        raise NonConvergence(f"deflation residual {abs(c1 * r - p[3]):.3g} exceeds {tol}")
    return r, b1, c1
