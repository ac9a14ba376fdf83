"""Static SVG figures.

Output is byte-for-byte reproducible: fixed hash salt, no date metadata,
glyphs embedded as paths.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "svg.hashsalt": "elgi",
    "svg.fonttype": "path",
    "path.simplify": False,
    "figure.figsize": (6.4, 4.2),
    "font.size": 10,
}


def line_plot(x, series, *, xlabel: str, ylabel: str, title: str = "", hline: float | None = None,
              points=None) -> str:
    """Render curves (``{label: y}``) and optional marker series (``{label: (x, y, yerr)}``) to SVG text."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for label, y in series.items():
            ax.plot(x, y, label=label, lw=1.4)
        for label, (px, py, perr) in (points or {}).items():
            ax.errorbar(px, py, yerr=perr, fmt="o", ms=3.5, capsize=2, label=label)
        if hline is not None:
            ax.axhline(hline, color="0.3", lw=0.8, ls="--")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return buf.getvalue()
