"""Figure data as CSV tables plus dependency-free SVG line plots.

Every table has the header ``param1,...,value,method,residual``; floats are
written with 17 significant digits so identical inputs give byte-identical
files.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import closed_forms as cf
from . import genfun as gf
from .hadamard import handle_probability
from .parallel import pmap
from .walk import CoinSpec, DirectionSet, WalkState, AbsorberSet, run_absorbing

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")


@dataclass
class Table:
    name: str
    params: Tuple[str, ...]
    rows: List[tuple]  # params..., value, method, residual
    x: str
    series: Tuple[str, ...] = ()
    title: str = ""

    @property
    def header(self) -> Tuple[str, ...]:
        return self.params + ("value", "method", "residual")


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def to_csv(table: Table) -> str:
    lines = [",".join(table.header)]
    for row in table.rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def to_svg(table: Table, width: int = 640, height: int = 400) -> str:
    """Line plot of ``value`` against ``table.x``, one polyline per series."""
    xi = table.params.index(table.x)
    vi = len(table.params)
    sidx = [table.params.index(s) for s in table.series]
    groups: Dict[tuple, List[Tuple[float, float]]] = {}
    for row in table.rows:
        key = tuple(row[i] for i in sidx)
        groups.setdefault(key, []).append((float(row[xi]), float(row[vi])))
    xs = [p[0] for g in groups.values() for p in g]
    ys = [p[1] for g in groups.values() for p in g]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    ml, mr, mt, mb = 60, 150, 30, 40
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1 - (y - y0) / (y1 - y0)) * ph

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{ml}" y="18" font-size="13">{table.title or table.name}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for k in range(5):
        yv = y0 + (y1 - y0) * k / 4
        xv = x0 + (x1 - x0) * k / 4
        out.append(f'<text x="{ml - 5}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
        out.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 15}" text-anchor="middle">{xv:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 5}" text-anchor="middle">{table.x}</text>')
    for i, (key, pts) in enumerate(groups.items()):
        col = palette[i % len(palette)]
        pts = sorted(pts)
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{path}"/>')
        label = ", ".join(f"{s}={fmt(v)}" for s, v in zip(table.series, key)) or table.name
        ly = mt + 14 * (i + 1)
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 25}" y2="{ly - 4}" stroke="{col}"/>')
        out.append(f'<text x="{ml + pw + 30}" y="{ly}">{label[:22]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------- #


def fig1(n: int = 100, ps: Sequence[float] = (0.45, 0.5, 0.55)) -> Table:
    """Classical left absorption against start position on ``{0..n}``."""
    rows = []
    for p in ps:
        for m in range(1, n):
            rows.append((p, m, cf.classical_closed(p, 1 - p, m, n), "closed-form", 0.0))
    return Table("fig1", ("p", "m"), rows, "m", ("p",), f"classical P_n^(m), n={n}")


def fig2(n: int = 50, weights: Sequence[float] = (0.2, 0.35, 0.5, 0.65, 0.8)) -> Table:
    """Two-state ``P_n^(m)(1,0)`` against ``m``."""
    rows = []
    for w in weights:
        coin = CoinSpec.from_weight(w)
        for m in range(1, n):
            rows.append((w, m, cf.two_state_finite_components(coin, m, n).p10, "closed-form", 0.0))
    return Table("fig2", ("a_sq", "m"), rows, "m", ("a_sq",), f"two-state P_n^(m)(1,0), n={n}")


def fig3(points: int = 21, n: int = 100, steps: int = 200) -> Table:
    """Left panel: ``P_inf^(1)(1,0)`` and ``lim_n P_n^(m)(1,0)`` (m = 1, 2)
    against ``|a|``.  Right panel: cumulative absorbed probability against
    time for the Hadamard walk, semi-infinite and ``n = 100``."""
    rows = []
    for k in range(points):
        amod = 0.02 + 0.96 * k / (points - 1)
        coin = CoinSpec.from_weight(amod * amod)
        rows.append(("limits", "semi-infinite", amod, cf.two_state_semi_closed(coin).value, "closed-form", 0.0))
        for m in (1, 2):
            rows.append(("limits", f"finite m={m}", amod, cf.two_state_limits(coin, m), "closed-form", 0.0))
    h = CoinSpec.hadamard()
    for label, absorbers in (("semi-infinite", AbsorberSet.points(0)), (f"n={n}", AbsorberSet.interval(n))):
        rep = run_absorbing(WalkState.basis(1, 0), h, DirectionSet.line(), absorbers, tracked=[0],
                            max_steps=steps, residual_tol=1e-300)
        for t, c in enumerate(rep.cumulative(), start=1):
            rows.append(("cdf", label, t, float(c), "simulation", rep.residual_mass))
    return Table("fig3", ("panel", "series", "x"), rows, "x", ("panel", "series"),
                 "semi-infinite vs finite limits; Hadamard CDF")


def fig4(n: int = 50) -> Table:
    """Grover3 ``P_n^(m)(1,0,0) + P_n^(n-m)(0,0,1)`` against ``m``; the second
    term is the Hadamard product of the finite ``l`` generating function."""

    def point(m):
        left = cf.grover3_finite_closed(m, n)
        right = handle_probability(gf.GenFunHandle("grover3-finite", "l", n - m, n))
        return (m, left + right.value, "closed-form+hadamard", right.error)

    rows = pmap(point, range(1, n))
    return Table("fig4", ("m",), rows, "m", (), f"Grover3 left + right absorption, n={n}")


def fig5(n_max: int = 10) -> Table:
    """Tables of ``P_n^(m)`` for the Hadamard two-state walk and the Grover3 walk."""
    rows = []
    h = CoinSpec.hadamard()
    for n in range(2, n_max + 1):
        for m in range(1, n):
            rows.append(("hadamard", n, m, cf.two_state_finite_components(h, m, n).p10, "closed-form", 0.0))
    for n in range(2, n_max + 1):
        for m in range(1, n):
            rows.append(("grover3", n, m, cf.grover3_finite_closed(m, n), "closed-form", 0.0))
    return Table("fig5", ("walk", "n", "m"), rows, "m", ("walk", "n"), "P_n^(m) tables")


BUILDERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}


def write_figure(name: str, outdir: str) -> List[str]:
    """Write ``<name>.csv`` and ``<name>.svg`` into ``outdir``; returns paths."""
    table = BUILDERS[name]()
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for ext, text in (("csv", to_csv(table)), ("svg", to_svg(table))):
        path = os.path.join(outdir, f"{name}.{ext}")
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        paths.append(path)
    return paths
