"""Figures for the counterexample report path (matplotlib, Agg backend)."""

from __future__ import annotations

import os
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .counterexample import (  # noqa: E402
    CounterexampleReport,
    SegmentPlan,
    block_size,
    choose_istar,
    p_points,
    segment_plan,
    universe_size,
)

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "fmt-workbench",
}

_STAY = "#7f7f7f"
_MOVE = "#1f77b4"
_P = "#d62728"


def _save(fig, path: str) -> str:
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def example_plan(n: int, k: int) -> SegmentPlan:
    """A plan with every kind of segment, used for the strategy figure.

    Witnesses sit on the ``P``-points of blocks ``1..k`` so block ``0`` is
    the free one; ``e`` starts right above the removed point and ends with
    (for ``n >= 2``) an element next to ``c``.
    """
    ps = p_points(n, k)
    witnesses = ps[1 : k + 1]
    removed = ps[0]
    e = [removed + 2 + 2 * j for j in range(max(n - 1, 1))]
    if n >= 2:
        e.append(2)
    return segment_plan(tuple(e), n, k, 0, witnesses)


def plot_segment_plan(plan: SegmentPlan, path: str, title: Optional[str] = None) -> str:
    """Draw ``e`` in B (top row) and the answer in A (bottom row) for block ``istar``."""
    n, k = plan.n, plan.k
    size = block_size(n)
    lo = plan.block_start
    top = universe_size(n, k)
    pad = 2
    xs = range(max(1, lo - pad), min(top, plan.block_end + pad) + 1)
    ps = set(p_points(n, k))
    removed = lo - 1 + 4 * n + 1
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(6.0, 0.28 * len(xs)), 2.6))
        for row, y in (("B", 1.0), ("A", 0.0)):
            ax.plot([xs[0], xs[-1]], [y, y], color="#cccccc", lw=1, zorder=0)
            ax.scatter(list(xs), [y] * len(xs), s=6, color="#999999", zorder=1)
            for p in sorted(ps & set(xs)):
                hollow = row == "B" and p == removed
                ax.scatter([p], [y], s=50, zorder=2, edgecolors=_P,
                           facecolors="none" if hollow else _P)
            ax.text(xs[0] - 1.2, y, row, va="center", ha="right", fontsize=10)
        for w in plan.witnesses:
            if w in xs:
                for y in (0.0, 1.0):
                    ax.scatter([w], [y], marker="s", s=40, color="black", zorder=3)
        stay = {x for a, b in plan.cs1 for x in range(a, b + 1)}
        for x, y in zip(plan.e, plan.response):
            colour = _STAY if x in stay else _MOVE
            ax.annotate("", xy=(y, 0.05), xytext=(x, 0.95),
                        arrowprops=dict(arrowstyle="->", color=colour, lw=1.2))
        start = lo - 1 + plan.cs3_start_offset
        ax.axvline(start - 0.5, color=_MOVE, ls=":", lw=0.8)
        ax.axvline(lo - 1 + 3 * n + 1 + 0.5, color="black", ls="--", lw=0.6)
        ax.set_ylim(-0.5, 1.5)
        ax.set_yticks([])
        ax.set_xlabel(f"elements (block {plan.istar}: {lo}..{lo + size - 1})")
        ax.set_title(title or f"answer to e={plan.e} at n={n}, k={k}")
        fig.tight_layout()
        return _save(fig, path)


def plot_check_summary(report: CounterexampleReport, path: str) -> str:
    """Bar chart of the strategy and calibration tallies of a run."""
    labels = ["strategy"] + sorted(report.calibration_failures)
    fails = [report.strategy_failures] + [report.calibration_failures[x] for x in labels[1:]]
    totals = [report.strategy_checks] + [report.calibration_checks] * (len(labels) - 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 2.8))
        ys = range(len(labels))
        ax.barh(list(ys), totals, color="#c7dcef", label="checked")
        ax.barh(list(ys), fails, color=_P, label="failed")
        ax.set_yticks(list(ys))
        ax.set_yticklabels(labels)
        ax.set_xscale("symlog")
        ax.set_xlabel("count")
        ax.set_title(f"n={report.n}, k={report.k}, {report.mode}")
        ax.legend(frameon=False, loc="lower right")
        fig.tight_layout()
        return _save(fig, path)


def render_counterexample_figures(report: CounterexampleReport, directory: str) -> List[str]:
    os.makedirs(directory, exist_ok=True)
    stem = f"n{report.n}_k{report.k}"
    paths = [
        plot_check_summary(report, os.path.join(directory, f"checks_{stem}.png")),
    ]
    plan = example_plan(report.n, report.k)
    paths.append(plot_segment_plan(plan, os.path.join(directory, f"strategy_{stem}.png")))
    if report.first_failure is not None:
        a, e = report.first_failure
        plan = segment_plan(e, report.n, report.k, choose_istar(a, report.n, report.k), a)
        paths.append(plot_segment_plan(plan, os.path.join(directory, f"failure_{stem}.png"),
                                       title=f"first failure: a={a}, e={e}"))
    return paths
