"""Figure rendering for the evaluation report."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["svg.hashsalt"] = "pathhmm"


def save_state_trace_svg(truth, pred, file):
    """Two-band step plot of true vs predicted states over time, saved as SVG."""
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    t = np.arange(1, truth.size + 1)
    fig, (ax_truth, ax_pred) = plt.subplots(
        2, 1, sharex=True, figsize=(8.0, 3.6), constrained_layout=True
    )
    ax_truth.step(t, truth, where="mid", color="#1f6f8b", linewidth=1.2)
    ax_truth.set_ylabel("true state")
    ax_pred.step(t, pred, where="mid", color="#b04a5a", linewidth=1.2)
    ax_pred.set_ylabel("predicted")
    ax_pred.set_xlabel("t")
    upper = int(max(truth.max(), pred.max()))
    for ax in (ax_truth, ax_pred):
        ax.set_yticks(range(1, upper + 1))
        ax.set_ylim(0.5, upper + 0.5)
    fig.savefig(file, format="svg")
    plt.close(fig)
