"""Figure rendering for the CLI report paths.

Figures are saved straight to files next to the CSV output; nothing is
shown interactively, so the Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .engine import TraceRecord
from .protocol import Bit, Verdict


def save_sweep_figure(
    parameter: str,
    values,
    qber,
    ci_low,
    ci_high,
    predicted,
    path: str,
) -> None:
    """QBER vs swept parameter with Wilson error bars and the theory curve."""
    values = np.asarray(values, dtype=float)
    qber = np.asarray(qber, dtype=float)
    yerr = np.vstack(
        [qber - np.asarray(ci_low, float), np.asarray(ci_high, float) - qber]
    )

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.errorbar(
        values, qber, yerr=np.maximum(yerr, 0.0),
        fmt="o", capsize=3, label="simulation (95% CI)",
    )
    pred = np.asarray(predicted, dtype=float)
    if np.isfinite(pred).any():
        order = np.argsort(values)
        ax.plot(values[order], pred[order], "k--", label="theory")
    ax.set_xlabel(parameter)
    ax.set_ylabel("QBER")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trace_figure(records: list[TraceRecord], path: str) -> None:
    """Per-symbol detection picture.

    Homodyne traces reproduce the oscillogram view: signed quadrature
    pulses, sifted symbols colored by Alice's bit, anti-coincidence ones
    greyed out. Photon-counting traces show the decided bit per symbol.
    """
    fig, ax = plt.subplots(figsize=(8, 4))
    has_samples = any(r.homodyne_sample is not None for r in records)
    if has_samples:
        idx = np.array([r.index for r in records])
        samples = np.array([r.homodyne_sample for r in records], dtype=float)
        matched = np.array([r.basis_match for r in records], dtype=bool)
        ones = matched & np.array([r.alice_bit is Bit.ONE for r in records])
        zeros = matched & ~ones
        ax.vlines(idx[~matched], 0, samples[~matched], color="0.8")
        ax.vlines(idx[zeros], 0, samples[zeros], color="tab:blue")
        ax.vlines(idx[ones], 0, samples[ones], color="tab:red")
        ax.scatter(idx[zeros], samples[zeros], s=8, color="tab:blue", label="bit 0")
        ax.scatter(idx[ones], samples[ones], s=8, color="tab:red", label="bit 1")
        ax.scatter(
            idx[~matched], samples[~matched], s=8, color="0.7", label="discarded"
        )
        ax.axhline(0.0, color="k", lw=0.8)
        ax.set_ylabel("balanced output (photoelectrons)")
    else:
        for rec in records:
            if rec.outcome.verdict is not Verdict.BIT:
                continue
            color = "0.7" if not rec.basis_match else (
                "tab:red" if rec.outcome.bit is Bit.ONE else "tab:blue"
            )
            ax.scatter(rec.index, rec.outcome.bit.value, s=10, color=color)
        ax.set_yticks([0, 1])
        ax.set_ylabel("decided bit")
    ax.set_xlabel("symbol index")
    ax.grid(True, alpha=0.3)
    if has_samples:
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
