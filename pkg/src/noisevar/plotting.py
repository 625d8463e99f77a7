"""Static comparison figures rendered with matplotlib.

SVG output is made byte-reproducible: fixed hash salt, no date metadata and
text kept as text.  Every plotted series is tagged with an SVG id
``series-<name>`` so the figure can be checked structurally.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "noisevar",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 0.9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (8.0, 5.5),
}

COLORS = {
    "x": "0.1",
    "y": "tab:gray",
    "true": "black",
    "alg1_mad": "tab:red",
    "alg1_mean": "tab:orange",
    "mehra": "tab:blue",
    "als": "tab:green",
}

LABELS = {
    "alg1_mad": "windowed MAD",
    "alg1_mean": "windowed variance",
    "mehra": "Mehra LS",
    "als": "ALS",
}


def _line(ax, t, values, name, **kw):
    (line,) = ax.plot(t, values, color=COLORS.get(name), **kw)
    line.set_gid(f"series-{name}")
    return line


def comparison_figure(t, y, std_estimates: dict[str, np.ndarray], x=None, true_std=None):
    """Two panels: measurement (and true signal) over noise-std estimates."""
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, constrained_layout=True)
        _line(top, t, y, "y", label="measurement y", alpha=0.8)
        if x is not None:
            _line(top, t, x, "x", label="signal x", linestyle="--")
        top.set_ylabel("signal")
        top.legend(loc="upper left")
        if true_std is not None:
            _line(bottom, t, true_std, "true", label="true noise std", linewidth=1.4)
        for name, est in std_estimates.items():
            _line(bottom, t, est, name, label=LABELS.get(name, name))
        bottom.set_ylabel("noise std")
        bottom.set_xlabel("time [s]")
        bottom.legend(loc="upper left", ncol=2)
    return fig


def render(fig, fmt: str = "svg") -> bytes:
    buf = io.BytesIO()
    with plt.rc_context(STYLE):
        fig.savefig(buf, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    plt.close(fig)
    return buf.getvalue()
