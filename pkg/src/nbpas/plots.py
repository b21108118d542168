"""Figure rendering for the CLI report paths.

Each renderer takes the rows a subcommand writes to CSV and produces a PNG
next to it.  Batch use only; the Agg backend is forced so no display is
needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_rates(rows, path):
    """Rate curves over SNR: capacity plus the computed metric rates."""
    fig, ax = plt.subplots(figsize=(6, 4))
    snr = [r["snr_db"] for r in rows]
    for key, style in (("capacity", "k--"), ("rate_smd", "C0-"),
                       ("rate_bmd", "C1-")):
        if key in rows[0]:
            ax.plot(snr, [r[key] for r in rows], style, label=key)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("rate [bits/channel use]")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fer(rows, path, threshold_db=None):
    """FER curve with 95% confidence whiskers on a log axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    snr = [r["snr_db"] for r in rows]
    fer = [max(r["fer"], 1e-12) for r in rows]
    lo = [max(r["fer"] - r["ci_low"], 0.0) for r in rows]
    hi = [max(r["ci_high"] - r["fer"], 0.0) for r in rows]
    ax.errorbar(snr, fer, yerr=[lo, hi], fmt="o-", capsize=3)
    if threshold_db is not None:
        ax.axvline(threshold_db, color="gray", linestyle=":",
                   label="DE threshold")
        ax.legend()
    ax.set_yscale("log")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("FER")
    ax.grid(True, which="both", alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
