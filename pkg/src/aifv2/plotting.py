"""Figures written next to the tab-separated report files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PARAMS = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.8, 3.2),
    "savefig.dpi": 150,
}


def plot_envelope(rows, path, x_star=None, title=None):
    """``rows`` are (x, E0, E1, M) tuples of numbers."""
    xs = [float(r[0]) for r in rows]
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        ax.plot(xs, [float(r[1]) for r in rows], label="$E_0$", lw=1.2)
        ax.plot(xs, [float(r[2]) for r in rows], label="$E_1$", lw=1.2)
        ax.fill_between(xs, 0, [float(r[3]) for r in rows], color="0.85", label="$K$", lw=0)
        if x_star is not None:
            ax.axvline(float(x_star), color="k", ls=":", lw=0.8, label="$x^*$")
        ax.set_xlabel("$x$")
        ax.set_ylabel("bits per symbol")
        ax.set_xlim(0, 1)
        if title:
            ax.set_title(title)
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_sweep(rows, path):
    """``rows`` are dicts with entropy, huffman and aifv2 costs."""
    rows = sorted(rows, key=lambda r: r["entropy"])
    h = [r["entropy"] for r in rows]
    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        ax.scatter(h, [float(r["huffman"]) - r["entropy"] for r in rows], s=8, marker="s",
                   label="Huffman", alpha=0.7)
        ax.scatter(h, [float(r["aifv2"]) - r["entropy"] for r in rows], s=8, marker="o",
                   label="AIFV-2", alpha=0.7)
        ax.axhline(0.5, color="k", ls=":", lw=0.8)
        ax.set_xlabel("entropy (bits)")
        ax.set_ylabel("redundancy (bits)")
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
