"""Log-log convergence plots (SVG)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GAP_FLOOR = 1e-16

# fixed ids and no date stamp, so reruns write the same file when the data match
matplotlib.rcParams["svg.hashsalt"] = "monofw"


def plot_convergence(traces, f_ref, path, axis="iter", title=None):
    """Primal gap and FW gap of every trace against iteration or wall time; gaps are clamped at 1e-16."""
    fig, (ax_h, ax_g) = plt.subplots(1, 2, figsize=(10, 4))
    for name, tr in traces.items():
        if not tr.records:
            continue
        x = tr.column("iter" if axis == "iter" else "wall_time")
        if axis == "time":
            x = np.maximum(x, 1e-6)
        h = np.maximum(tr.column("f_value") - f_ref, GAP_FLOOR)
        g = np.maximum(tr.column("fw_gap"), GAP_FLOOR)
        ax_h.loglog(x, h, label=name, lw=1)
        ax_g.loglog(x, g, label=name, lw=1)
    xlabel = "iteration" if axis == "iter" else "wall time [s]"
    for ax, yl in ((ax_h, "primal gap"), (ax_g, "FW gap")):
        ax.set_xlabel(xlabel)
        ax.set_ylabel(yl)
        ax.grid(True, which="major", alpha=0.3)
    ax_h.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
