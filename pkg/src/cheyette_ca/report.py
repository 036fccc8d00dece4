"""Comparison rows, CSV/SVG rendering and atomic artifact writes."""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

CSV_COLUMNS = ("expiry", "ca_analytic", "ca_variant", "ca_mc", "mc_se", "abs_diff", "within_3se")
REL_TOL = 0.05
# round-off of deterministic (zero-volatility) paths, where the SE is exactly 0
ABS_FLOOR = 1e-14


@dataclass(frozen=True)
class ComparisonRow:
    expiry: float
    ca_analytic: float
    ca_mc: float
    mc_std_error: float
    ca_analytic_variant: float | None = None

    @property
    def abs_diff(self) -> float:
        return abs(self.ca_analytic - self.ca_mc)

    @property
    def within_3se(self) -> bool:
        return self.abs_diff <= 3.0 * self.mc_std_error + ABS_FLOOR

    @staticmethod
    def _close(analytic: float, mc: float, se: float) -> bool:
        diff = abs(analytic - mc)
        return diff <= 3.0 * se + ABS_FLOOR or diff <= REL_TOL * abs(mc)

    @property
    def within_tolerance(self) -> bool:
        """Within 3 SE or 5% relative, for the main value or the variant."""
        ok = self._close(self.ca_analytic, self.ca_mc, self.mc_std_error)
        if self.ca_analytic_variant is not None:
            ok = ok or self._close(self.ca_analytic_variant, self.ca_mc, self.mc_std_error)
        return ok


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def rows_to_csv(rows: Sequence[ComparisonRow], meta: dict) -> str:
    """CSV text; the first line is a ``#`` comment with ``key=value`` provenance."""
    lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items()), ",".join(CSV_COLUMNS)]
    for r in rows:
        fields = (r.expiry, r.ca_analytic, r.ca_analytic_variant, r.ca_mc, r.mc_std_error, r.abs_diff)
        lines.append(",".join(_fmt(f) for f in fields) + f",{str(r.within_3se).lower()}")
    return "\n".join(lines) + "\n"


def table_to_csv(columns: Sequence[str], records: Sequence[Sequence], meta: dict) -> str:
    lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items()), ",".join(columns)]
    for rec in records:
        lines.append(",".join(str(v).lower() if isinstance(v, bool) else (repr(v) if isinstance(v, float) else str(v)) for v in rec))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- SVG

WIDTH, HEIGHT = 900, 540
MARGIN = {"left": 90, "right": 30, "top": 50, "bottom": 60}
COLORS = {"analytic": "#1f77b4", "variant": "#2ca02c", "mc": "#d62728"}


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    return [start + i * step for i in range(int(math.ceil((hi - start) / step)) + 1)]


def rows_to_svg(rows: Sequence[ComparisonRow], title: str) -> str:
    """Line chart of the analytic adjustment(s) against MC with 3 SE error bars."""
    xs = [r.expiry for r in rows]
    ys = [r.ca_analytic for r in rows] + [r.ca_mc + s * 3 * r.mc_std_error for r in rows for s in (-1, 1)]
    ys += [r.ca_analytic_variant for r in rows if r.ca_analytic_variant is not None]
    x_ticks = _nice_ticks(min(xs + [0.0]), max(xs))
    y_ticks = _nice_ticks(min(ys + [0.0]), max(ys + [0.0]))
    x0, x1 = x_ticks[0], x_ticks[-1]
    y0, y1 = y_ticks[0], y_ticks[-1]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]
    for t in x_ticks:
        out.append(f'<line x1="{px(t):.2f}" y1="{MARGIN["top"]}" x2="{px(t):.2f}" y2="{MARGIN["top"] + ph}" stroke="#eee"/>')
        out.append(f'<text x="{px(t):.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in y_ticks:
        out.append(f'<line x1="{MARGIN["left"]}" y1="{py(t):.2f}" x2="{MARGIN["left"] + pw}" y2="{py(t):.2f}" stroke="#eee"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">expiry (years)</text>')
    out.append(
        f'<text x="20" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 20 {HEIGHT / 2})">convexity adjustment</text>'
    )

    def polyline(vals, color, name):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, vals))
        return f'<polyline class="{name}" points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'

    out.append(polyline([r.ca_analytic for r in rows], COLORS["analytic"], "analytic"))
    legend = [("analytic", COLORS["analytic"])]
    if all(r.ca_analytic_variant is not None for r in rows):
        out.append(polyline([r.ca_analytic_variant for r in rows], COLORS["variant"], "variant"))
        legend.append(("analytic variant", COLORS["variant"]))
    for r in rows:
        lo, hi = py(r.ca_mc - 3 * r.mc_std_error), py(r.ca_mc + 3 * r.mc_std_error)
        x = px(r.expiry)
        out.append(f'<line class="errorbar" x1="{x:.2f}" y1="{lo:.2f}" x2="{x:.2f}" y2="{hi:.2f}" stroke="{COLORS["mc"]}"/>')
        out.append(f'<circle class="mc" cx="{x:.2f}" cy="{py(r.ca_mc):.2f}" r="3.5" fill="{COLORS["mc"]}"/>')
    legend.append(("Monte Carlo (3 SE)", COLORS["mc"]))
    for i, (name, color) in enumerate(legend):
        y = MARGIN["top"] + 18 + 18 * i
        out.append(f'<rect x="{MARGIN["left"] + 12}" y="{y - 9}" width="14" height="4" fill="{color}"/>')
        out.append(f'<text x="{MARGIN["left"] + 32}" y="{y - 3}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------- atomic writes


def write_atomically(files: dict[str | Path, str]) -> None:
    """Write every file to a temporary sibling first, then rename them all into place."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
