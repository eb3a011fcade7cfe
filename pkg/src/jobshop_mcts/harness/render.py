"""Hand-built SVG figures: Gantt charts and search-tree density plots."""

from __future__ import annotations

import math
from html import escape
from typing import Optional, Sequence

import numpy as np

from ..core import JobSet, Schedule

PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
           "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


def _ticks(hi: float, n: int = 8) -> list:
    if hi <= 0:
        return [0]
    raw = hi / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag * 10)
    return [i * step for i in range(int(hi // step) + 1)]


def render_gantt(schedule: Schedule, jobs: JobSet, deadlines: bool = False, bound: Optional[float] = None,
                 title: str = "", width: int = 900, row_height: int = 22) -> str:
    """One row per machine, one bar per interval, coloured by job type.

    ``bound`` draws a black vertical rule (e.g. the trivial lower bound);
    ``deadlines`` draws a thin coloured rule per distinct deadline.
    """
    machines = [m.id for m in jobs.machines]
    row_of = {m: i for i, m in enumerate(machines)}
    end = max((iv.end for _, iv in schedule.intervals()), default=0)
    marks = [bound] if bound is not None else []
    if deadlines and jobs.has_deadlines:
        marks += list(jobs.deadlines)
    span = max([end, 1] + [float(x) for x in marks])
    left, top, right = 60, 30 if title else 12, 20
    plot_w = width - left - right
    height = top + row_height * max(len(machines), 1) + 30
    sx = plot_w / span
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">']
    if title:
        out.append(f'<text x="{left}" y="18" font-size="13">{escape(title)}</text>')
    for m, i in row_of.items():
        y = top + i * row_height
        out.append(f'<g class="row"><text x="{left - 6}" y="{y + row_height * 0.65:.1f}" '
                   f'text-anchor="end">m{m}</text>'
                   f'<line x1="{left}" y1="{y + row_height}" x2="{left + plot_w}" y2="{y + row_height}" '
                   f'stroke="#ddd"/></g>')
    for j, iv in schedule.intervals():
        y = top + row_of[iv.machine] * row_height + 3
        x = left + iv.start * sx
        w = max((iv.end - iv.start) * sx, 0.5)
        color = PALETTE[jobs[j].job_type % len(PALETTE)]
        out.append(f'<rect class="bar" x="{x:.2f}" y="{y}" width="{w:.2f}" height="{row_height - 6}" '
                   f'fill="{color}" stroke="#333" stroke-width="0.3"><title>job {j} '
                   f'[{iv.start},{iv.end})</title></rect>')
    base = top + row_height * max(len(machines), 1)
    out.append(f'<line class="axis" x1="{left}" y1="{base}" x2="{left + plot_w}" y2="{base}" stroke="#000"/>')
    for t in _ticks(span):
        x = left + t * sx
        out.append(f'<text x="{x:.1f}" y="{base + 14}" text-anchor="middle">{t:g}</text>')
    if deadlines and jobs.has_deadlines:
        for k, d in enumerate(sorted(set(int(x) for x in jobs.deadlines))):
            x = left + d * sx
            out.append(f'<line class="deadline" x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{base}" '
                       f'stroke="{PALETTE[k % len(PALETTE)]}" stroke-width="0.6"/>')
    if bound is not None:
        x = left + bound * sx
        out.append(f'<line class="bound" x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{base}" '
                   f'stroke="#000" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out)


def render_tree_density(profile: Sequence[int], title: str = "", width: int = 600,
                        row_height: float = 0.0) -> str:
    """Tree shape plot: one row per depth, bar width proportional to the node count.

    ``profile[d]`` is the number of nodes at depth ``d`` (see
    ``SearchResult.depth_profile``). Bars are centred, so a single path is
    one straight column and flat Monte-Carlo search shows a triangle.
    Colour darkens with the log of the count.
    """
    prof = np.asarray(profile, dtype=float)
    depth = int(np.flatnonzero(prof).max()) + 1 if prof.any() else 1
    prof = prof[:depth] if prof.size else np.zeros(1)
    rh = row_height or max(1.0, min(12.0, 400.0 / depth))
    top = 24 if title else 6
    height = top + rh * depth + 6
    peak = max(prof.max(), 1.0)
    cell = 6.0
    usable = width - 20
    cx = width / 2
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0f}" '
           f'font-family="sans-serif" font-size="11">']
    if title:
        out.append(f'<text x="10" y="16" font-size="13">{escape(title)}</text>')
    for d, c in enumerate(prof):
        if c <= 0:
            continue
        w = max(cell, usable * c / peak) if peak > 1 else cell
        shade = int(200 - 170 * math.log1p(c) / math.log1p(peak)) if peak > 1 else 60
        y = top + d * rh
        out.append(f'<rect class="cell" x="{cx - w / 2:.2f}" y="{y:.2f}" width="{w:.2f}" height="{rh:.2f}" '
                   f'fill="rgb({shade},{shade},{min(255, shade + 40)})"><title>depth {d}: '
                   f'{int(c)} nodes</title></rect>')
    out.append("</svg>")
    return "\n".join(out)
