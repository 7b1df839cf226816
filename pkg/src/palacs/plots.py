"""Learning-curve rendering as self-contained SVG 1.1.

The file is assembled from explicit <polyline> (mean curves) and <polygon>
(standard-deviation bands) elements with fixed-precision coordinates, so a
given report always serializes to the same bytes.
"""

from __future__ import annotations

import math

import numpy as np

from .harness import ExperimentReport

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#7f7f7f", "#9467bd", "#8c564b")

_WIDTH, _HEIGHT = 720, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 190, 42, 56


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def build_learning_curve_svg(report: ExperimentReport) -> str:
    """Render one panel: one mean polyline and one std-band polygon per strategy."""
    budget = report.budget
    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _HEIGHT - _TOP - _BOTTOM

    y_max = max(
        float((report.curve_mean[s] + report.curve_std[s]).max())
        for s in report.strategies
    )
    y_max = max(0.05, math.ceil(y_max * 20) / 20)  # round up to a 0.05 grid

    def sx(step: float) -> float:
        return _LEFT + (step - 1) / max(budget - 1, 1) * plot_w

    def sy(err: float) -> float:
        return _TOP + (1.0 - err / y_max) * plot_h

    steps = np.arange(1, budget + 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_WIDTH}" height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_LEFT}" y="24" font-family="sans-serif" font-size="15" '
        f'font-weight="bold">{report.dataset}: mean test error over '
        f"{report.trials} trials</text>",
    ]

    # std bands first so curves draw on top
    for i, name in enumerate(report.strategies):
        color = PALETTE[i % len(PALETTE)]
        mean, std = report.curve_mean[name], report.curve_std[name]
        upper = np.minimum(mean + std, y_max)
        lower = np.maximum(mean - std, 0.0)
        pts = [f"{_fmt(sx(t))},{_fmt(sy(u))}" for t, u in zip(steps, upper)]
        pts += [
            f"{_fmt(sx(t))},{_fmt(sy(l))}"
            for t, l in zip(steps[::-1], lower[::-1])
        ]
        parts.append(
            f'<polygon points="{" ".join(pts)}" fill="{color}" '
            f'fill-opacity="0.15" stroke="none"/>'
        )
    for i, name in enumerate(report.strategies):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(sx(t))},{_fmt(sy(e))}"
            for t, e in zip(steps, report.curve_mean[name])
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.6"/>'
        )

    # axes
    x0, y0 = _LEFT, _TOP + plot_h
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{_TOP}" x2="{x0}" y2="{y0}" '
        f'stroke="black" stroke-width="1"/>'
    )
    x_ticks = sorted({1, round(budget / 4), round(budget / 2), round(3 * budget / 4), budget})
    for t in x_ticks:
        px = sx(t)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" '
            f'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{y0 + 20}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{t}</text>'
        )
    for j in range(6):
        err = y_max * j / 5
        py = sy(err)
        parts.append(
            f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" '
            f'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 - 9}" y="{_fmt(py + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{err:.3f}</text>'
        )
    parts.append(
        f'<text x="{_LEFT + plot_w / 2:.1f}" y="{_HEIGHT - 14}" '
        f'font-family="sans-serif" font-size="12" text-anchor="middle">'
        f"acquired instances</text>"
    )
    parts.append(
        f'<text x="18" y="{_TOP + plot_h / 2:.1f}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 18 {_TOP + plot_h / 2:.1f})">test error</text>'
    )

    # legend
    lx = _LEFT + plot_w + 18
    for i, name in enumerate(report.strategies):
        color = PALETTE[i % len(PALETTE)]
        ly = _TOP + 14 + i * 20
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 30}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{name}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
