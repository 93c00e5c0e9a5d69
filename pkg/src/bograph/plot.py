"""Eigenvalue tables and a dependency-free SVG scatter plot."""

from __future__ import annotations

import csv
import io
from typing import Sequence

WIDTH, HEIGHT = 800, 600
_MARGIN = 70


def _num(x: float) -> str:
    x = 0.0 if x == 0 else x  # no "-0"
    return f"{x:.12g}"


def eigen_csv(eigs: Sequence[complex]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im"])
    for z in eigs:
        w.writerow([_num(z.real), _num(z.imag)])
    return buf.getvalue()


def _nice_step(span: float) -> float:
    raw = span / 6
    mag = 10 ** int(f"{raw:e}".split("e")[1])
    for m in (1, 2, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _ticks(lo: float, hi: float):
    step = _nice_step(hi - lo)
    k = int(lo // step)
    out = []
    while k * step <= hi + 1e-12 * step:
        if k * step >= lo - 1e-12 * step:
            out.append(k * step)
        k += 1
    return out


def eigen_svg(eigs: Sequence[complex], title: str = "eigenvalues") -> str:
    """Complex-plane scatter, 800x600, with the imaginary axis drawn."""
    res = [z.real for z in eigs] + [0.0]
    ims = [z.imag for z in eigs] + [0.0]
    rx = max(max(abs(x) for x in res), 1e-3) * 1.25
    iy = max(max(abs(y) for y in ims), 1e-3) * 1.25
    x0, x1 = min(min(res) * 1.25, -0.1 * rx), max(max(res) * 1.25, 0.1 * rx)
    y0, y1 = -iy, iy
    pw, ph = WIDTH - 2 * _MARGIN, HEIGHT - 2 * _MARGIN

    def px(x):
        return _MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - _MARGIN - (y - y0) / (y1 - y0) * ph

    f = lambda v: f"{v:.2f}"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="30" text-anchor="middle" font-family="sans-serif" '
        f'font-size="18">{_escape(title)}</text>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{f(px(t))}" y1="{HEIGHT - _MARGIN}" x2="{f(px(t))}" y2="{HEIGHT - _MARGIN + 5}" stroke="#888"/>')
        out.append(
            f'<text x="{f(px(t))}" y="{HEIGHT - _MARGIN + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{_num(round(t, 10))}</text>'
        )
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{_MARGIN - 5}" y1="{f(py(t))}" x2="{_MARGIN}" y2="{f(py(t))}" stroke="#888"/>')
        out.append(
            f'<text x="{_MARGIN - 8}" y="{f(py(t) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{_num(round(t, 10))}</text>'
        )
    out.append(
        f'<line x1="{_MARGIN}" y1="{f(py(0))}" x2="{WIDTH - _MARGIN}" y2="{f(py(0))}" stroke="#444"/>'
    )
    out.append(
        f'<line id="imaginary-axis" x1="{f(px(0))}" y1="{_MARGIN}" x2="{f(px(0))}" '
        f'y2="{HEIGHT - _MARGIN}" stroke="#c00" stroke-dasharray="6 4"/>'
    )
    out.append(
        f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 20}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">Re</text>'
    )
    out.append(
        f'<text x="20" y="{HEIGHT / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 20 {HEIGHT / 2:.0f})">Im</text>'
    )
    for z in eigs:
        out.append(
            f'<circle cx="{f(px(z.real))}" cy="{f(py(z.imag))}" r="5" fill="#1f77b4">'
            f"<title>{_num(z.real)} {'+' if z.imag >= 0 else '-'} {_num(abs(z.imag))}i</title></circle>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
