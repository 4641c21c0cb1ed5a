"""Renderers: one function per figure id, all pure over their input CSVs.

A pinned matplotlib style plus fixed image metadata makes re-rendering the
same inputs byte-identical.
"""

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .schemas import SchemaError, load_table, numeric

# pinned style so identical inputs give identical images
STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 120,
    "figure.autolayout": True,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.framealpha": 0.9,
    "svg.hashsalt": "parityfigures",
}

# strip creation timestamps and library versions from the PNG chunks
METADATA = {"Software": "parityfigures"}

SUBSPACE_COLORS = {"D": "#444444", "L": "#1f77b4", "H": "#d62728"}


def _save(fig, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    fig.savefig(path, metadata=METADATA)
    plt.close(fig)
    return path


def _require(in_dir, filename):
    path = os.path.join(in_dir, filename)
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file {path}")
    return path


def render_fig3(in_dir, out_dir):
    """Ensemble-averaged subspace populations against time."""
    t = load_table(_require(in_dir, "trajectory.csv"), "trajectory")
    fig, ax = plt.subplots()
    for key, label in (("p_D", "dark D"), ("p_L", "odd parity L"),
                       ("p_H", "even excited H")):
        ax.plot(t["time"], t[key], label=label,
                color=SUBSPACE_COLORS[key[-1]])
    ax.set_xlabel(r"time ($1/\kappa$)")
    ax.set_ylabel("subspace population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="center right")
    return _save(fig, out_dir, "fig3.png")


def render_fig4(in_dir, out_dir):
    """Cumulative detected cavity clicks per trajectory: the slope of each
    staircase exposes which fluorescence level the run sits on."""
    ev = load_table(_require(in_dir, "events.csv"), "events")
    keep = [i for i in range(len(ev["run"]))
            if ev["channel"][i] == "cavity" and ev["detected"][i]]
    fig, ax = plt.subplots()
    for run in np.unique(ev["run"]):
        times = np.sort([ev["time"][i] for i in keep
                         if ev["run"][i] == run])
        if len(times) == 0:
            continue
        ax.step(times, np.arange(1, len(times) + 1), where="post",
                alpha=0.7)
    ax.set_xlabel(r"time ($1/\kappa$)")
    ax.set_ylabel("detected cavity clicks")
    return _save(fig, out_dir, "fig4.png")


def render_fig5(in_dir, out_dir):
    """Histogram of detected clicks per run; the fluorescence levels show
    up as separated count clusters."""
    ev = load_table(_require(in_dir, "events.csv"), "events")
    counts = {}
    for i in range(len(ev["run"])):
        counts.setdefault(int(ev["run"][i]), 0)
        if ev["channel"][i] == "cavity" and ev["detected"][i]:
            counts[int(ev["run"][i])] += 1
    values = np.array(sorted(counts.values()))
    fig, ax = plt.subplots()
    ax.hist(values, bins=np.arange(-0.5, values.max() + 1.5, 1.0),
            color=SUBSPACE_COLORS["L"], edgecolor="white")
    ax.set_xlabel("detected clicks per run")
    ax.set_ylabel("number of runs")
    return _save(fig, out_dir, "fig5.png")


def render_fig6(in_dir, out_dir):
    """Dual-axis chart: mean fidelity and outcome frequency against the
    number of detected clicks, from a protocol ensemble."""
    t = load_table(_require(in_dir, "protocol.csv"), "protocol")
    fid = numeric(t["fidelity"])
    clicks = t["clicks"]
    ks = np.unique(clicks)
    mean_f, freq = [], []
    for k in ks:
        sel = clicks == k
        f = fid[sel]
        f = f[~np.isnan(f)]
        mean_f.append(f.mean() if len(f) else np.nan)
        freq.append(sel.sum() / len(clicks))
    fig, ax = plt.subplots()
    ax.plot(ks, mean_f, "o-", color=SUBSPACE_COLORS["L"])
    ax.set_xlabel("detected clicks")
    ax.set_ylabel("mean fidelity", color=SUBSPACE_COLORS["L"])
    ax.set_ylim(-0.02, 1.02)
    ax2 = ax.twinx()
    ax2.bar(ks, freq, color="#cccccc", zorder=0, width=0.8)
    ax2.set_ylabel("outcome frequency", color="#888888")
    ax.set_zorder(ax2.get_zorder() + 1)
    ax.patch.set_visible(False)
    return _save(fig, out_dir, "fig6.png")


def render_fig8(in_dir, out_dir):
    """Average fidelity against detector efficiency, one curve per
    cooperativity, fidelity axis log-scaled. Monte-Carlo points from
    sweep.csv are overlaid when that file is present."""
    t = load_table(_require(in_dir, "analytics.csv"), "analytics")
    fig, ax = plt.subplots()
    for c in np.unique(t["C"]):
        sel = t["C"] == c
        order = np.argsort(t["eta"][sel])
        ax.plot(t["eta"][sel][order], t["f_av"][sel][order],
                label=f"C = {c:g}")
    sweep_path = os.path.join(in_dir, "sweep.csv")
    if os.path.isfile(sweep_path):
        s = load_table(sweep_path, "sweep")
        mc = numeric(s["f_av_mc"])
        err = numeric(s["f_av_mc_err"], default=0.0)
        keep = ~np.isnan(mc)
        ax.errorbar(s["eta"][keep], mc[keep], yerr=err[keep],
                    fmt="k.", capsize=2, label="trajectory MC")
    ax.set_xlabel(r"detector efficiency $\eta$")
    ax.set_ylabel("average fidelity")
    ax.set_yscale("log")
    ax.legend(loc="lower right")
    return _save(fig, out_dir, "fig8.png")


def render_fig9(in_dir, out_dir):
    """Average fidelity against the coupling asymmetry, with the
    closed-form curve overlaid on the Monte-Carlo points."""
    t = load_table(_require(in_dir, "robustness.csv"), "robustness")
    order = np.argsort(t["epsilon"])
    eps = t["epsilon"][order]
    fig, ax = plt.subplots()
    ax.plot(eps, t["f_av_closed"][order], color=SUBSPACE_COLORS["L"],
            label=r"closed form $1 - \epsilon^2/2$")
    ax.plot(eps, t["f_av_quadrature"][order], "--",
            color=SUBSPACE_COLORS["H"], label="quadrature")
    mc = numeric(t["f_av_mc"])[order]
    err = numeric(t["mc_err"], default=0.0)[order]
    keep = ~np.isnan(mc)
    ax.errorbar(eps[keep], mc[keep], yerr=err[keep],
                fmt="k.", capsize=2, label="trajectory MC")
    ax.set_xlabel(r"coupling asymmetry $\epsilon$")
    ax.set_ylabel("average fidelity")
    ax.set_ylim(0.45, 1.02)
    ax.legend(loc="lower left")
    return _save(fig, out_dir, "fig9.png")


def render_cluster_growth(in_dir, out_dir):
    """Distribution of qubits consumed while growing to the target size."""
    t = load_table(_require(in_dir, "cluster_grow.csv"), "cluster_grow")
    fig, ax = plt.subplots()
    ax.hist(t["qubits_consumed"], bins=20, color=SUBSPACE_COLORS["L"],
            edgecolor="white")
    mean = t["qubits_consumed"].mean()
    ax.axvline(mean, color=SUBSPACE_COLORS["H"],
               label=f"mean = {mean:.1f}")
    ax.set_xlabel("qubits consumed")
    ax.set_ylabel("number of runs")
    ax.legend(loc="upper right")
    return _save(fig, out_dir, "cluster-growth.png")


def render_cluster_fusion(in_dir, out_dir):
    """Fusion outcome frequencies with the post-fusion overlap."""
    t = load_table(_require(in_dir, "cluster_fuse.csv"), "cluster_fuse")
    outcomes = ("D", "L", "H")
    n = len(t["outcome"])
    freqs = [t["outcome"].count(o) / n for o in outcomes]
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(6.4, 3.2))
    ax.bar(outcomes, freqs,
           color=[SUBSPACE_COLORS[o] for o in outcomes])
    ax.set_xlabel("measured subspace")
    ax.set_ylabel("frequency")
    ax.set_ylim(0, 1)
    ov = numeric(t["overlap"])
    ov = ov[~np.isnan(ov)]
    if len(ov):
        ax2.plot(np.arange(len(ov)), ov, ".",
                 color=SUBSPACE_COLORS["L"])
    ax2.set_xlabel("successful fusion index")
    ax2.set_ylabel("overlap with canonical cluster")
    ax2.set_ylim(-0.02, 1.05)
    fig.tight_layout()
    return _save(fig, out_dir, "cluster-fusion.png")


FIGURE_IDS = {
    "fig3": render_fig3,
    "fig4": render_fig4,
    "fig5": render_fig5,
    "fig6": render_fig6,
    "fig8": render_fig8,
    "fig9": render_fig9,
    "cluster-growth": render_cluster_growth,
    "cluster-fusion": render_cluster_fusion,
}


def render(figure_id: str, in_dir: str, out_dir: str) -> str:
    """Render one figure from CSVs in in_dir; returns the image path."""
    if figure_id not in FIGURE_IDS:
        known = ", ".join(sorted(FIGURE_IDS))
        raise SchemaError(f"unknown figure id {figure_id!r}; "
                          f"known ids: {known}")
    with plt.rc_context(STYLE):
        return FIGURE_IDS[figure_id](in_dir, out_dir)
