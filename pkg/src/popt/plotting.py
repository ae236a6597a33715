"""Matplotlib renderers for the experiment tables."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0

params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 150,
    "lines.linewidth": 1.2,
    "lines.markersize": 3,
    "svg.hashsalt": "popt",
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_fig2a(path, rbs, lams, bids, surf):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        styles = ["-", "--", ":", "-."]
        for i, rb in enumerate(rbs):
            for j, lam in enumerate(lams):
                ax.plot(bids, surf[i, j], styles[j % len(styles)], color=f"C{i}",
                        label=f"RB={rb:g}, $\\lambda$={lam:g}")
        ax.axhline(0.0, color="grey", lw=0.6)
        ax.set_xlabel("buyer bid (yuan/kW·h)")
        ax.set_ylabel("PV")
        ax.legend(ncol=2, fontsize=6)
        return _save(fig, path)


def plot_fig2b(path, series):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        for tag in sorted(series):
            ax.plot(series[tag], marker="o", label=f"type {tag}")
        ax.set_xlabel("slot")
        ax.set_ylabel("mean accumulated PV")
        ax.legend()
        return _save(fig, path)


def plot_fig3(path, grid, r_star, mean_w, fixed):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(grid, r_star, "o-", color="C0", label="optimal reward")
        ax.set_xlabel("expected utility $u^0$")
        ax.set_ylabel("optimal reward $R^*$", color="C0")
        ax2 = ax.twinx()
        ax2.plot(grid, mean_w, "s--", color="C1")
        ax2.set_ylabel(f"mean willingness at R={fixed:.3g}", color="C1")
        return _save(fig, path)


def plot_fig4(path, ids, shares, probs):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        x = np.arange(len(ids))
        ax.bar(x - 0.2, shares, 0.4, label="PV share")
        ax.bar(x + 0.2, probs, 0.4, label="probability")
        ax.set_xticks(x, [str(i + 1) for i in x])
        ax.set_xlabel("applicant")
        ax.legend()
        return _save(fig, path)


def plot_fig5a(path, rows, divisions):
    with plt.rc_context(params):
        grid = np.full((divisions + 1, divisions + 1), np.nan)
        for mu1, mu2, o in rows:
            grid[int(round(mu2 * divisions)), int(round(mu1 * divisions))] = o
        fig, ax = plt.subplots()
        im = ax.imshow(grid, origin="lower", extent=(0, 1, 0, 1), cmap="viridis")
        fig.colorbar(im, ax=ax, label="O")
        ax.set_xlabel("$\\mu_1$ (fairness)")
        ax.set_ylabel("$\\mu_2$ (decentralization)")
        return _save(fig, path)


def plot_fig5b(path, rows):
    with plt.rc_context(params):
        done = [r for r in rows if r.get("status") in ("linked", "orphaned")]
        fig, ax = plt.subplots()
        x = [r["round"] for r in done]
        for key, label in (("F", "fairness"), ("D", "decentralization"),
                           ("C", "credibility"), ("O", "comprehensive")):
            ax.plot(x, [r[key] for r in done], label=label)
        ax.set_xlabel("round")
        ax.legend(fontsize=7)
        return _save(fig, path)


def plot_fig6a(path, rows):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        strategies = ["pow", "popt"]
        means = [np.mean([r[2] for r in rows if r[0] == s]) for s in strategies]
        ax.bar(["PoW model", "PoPT"], means, color=["C3", "C0"])
        for i, m in enumerate(means):
            ax.text(i, m, f"{m:.1f} s", ha="center", va="bottom")
        ax.set_ylabel("mean block interval (s)")
        return _save(fig, path)


def plot_fig6b(path, rows):
    with plt.rc_context(params):
        strategies = ["popt", "poa", "pot"]
        names = {"popt": "PoPT", "poa": "PoA", "pot": "PoT"}
        metrics = ["F", "D", "C"]
        means = {s: [np.mean([r[2 + i] for r in rows if r[1] == s]) for i in range(3)]
                 for s in strategies}
        fig, ax = plt.subplots()
        x = np.arange(len(metrics))
        for i, s in enumerate(strategies):
            ax.bar(x + (i - 1) * 0.25, means[s], 0.25, label=names[s])
        ax.set_xticks(x, ["fairness", "decentralization", "credibility"])
        ax.set_yscale("log")
        ax.legend()
        return _save(fig, path)
