"""SVG figure writers (fan charts, IRF grids, coherence heatmaps).

matplotlib is imported lazily and configured for byte-reproducible SVG:
a fixed ``svg.hashsalt`` plus a cleared Date metadata field make repeated
runs produce identical bytes.
"""

from __future__ import annotations

import numpy as np


def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "bvarx"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def fan_chart(dist, train_endog: np.ndarray, path, tail: int = 36) -> None:
    """One panel per variable: training tail, point path, interval band."""
    plt = _mpl()
    m = dist.m
    H = dist.H
    fig, axes = plt.subplots(m, 1, figsize=(8, 2.2 * m), sharex=True, squeeze=False)
    hist = train_endog[-tail:]
    t_hist = np.arange(-hist.shape[0] + 1, 1)
    t_fut = np.arange(1, H + 1)
    for j in range(m):
        ax = axes[j, 0]
        ax.plot(t_hist, hist[:, j], color="0.3", lw=1.0)
        ax.fill_between(t_fut, dist.lower[:, j], dist.upper[:, j],
                        color="tab:blue", alpha=0.25, linewidth=0)
        ax.plot(t_fut, dist.point[:, j], color="tab:blue", lw=1.4)
        ax.axvline(0, color="0.7", lw=0.6, ls=":")
        ax.set_ylabel(dist.names[j], fontsize=8)
    axes[-1, 0].set_xlabel("months from forecast origin")
    fig.suptitle(f"point forecast with {dist.gamma:.0%} anchored intervals", fontsize=10)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def irf_grid(surface, path) -> None:
    """Small multiples: rows = response variables, columns = shocks; both
    regimes overlaid with their confidence bands."""
    plt = _mpl()
    n_var = len(surface.var_names)
    n_shock = len(surface.shock_names)
    fig, axes = plt.subplots(n_var, n_shock, figsize=(3.0 * n_shock, 2.0 * n_var),
                             sharex=True, squeeze=False)
    h = np.arange(surface.responses.shape[-1])
    colors = {"high": "tab:red", "low": "tab:blue"}
    for i in range(n_var):
        for s in range(n_shock):
            ax = axes[i, s]
            for r, regime in enumerate(surface.regimes):
                ax.fill_between(h, surface.ci_lo[i, s, r], surface.ci_hi[i, s, r],
                                color=colors[regime], alpha=0.15, linewidth=0)
                ax.plot(h, surface.responses[i, s, r], color=colors[regime],
                        lw=1.2, label=regime)
            ax.axhline(0.0, color="0.6", lw=0.6)
            if i == 0:
                ax.set_title(surface.shock_names[s], fontsize=9)
            if s == 0:
                ax.set_ylabel(surface.var_names[i], fontsize=8)
    axes[0, 0].legend(fontsize=7, frameon=False)
    axes[-1, 0].set_xlabel("horizon")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def coherence_heatmap(cmap, path, arrow_stride: int = 6) -> None:
    """R^2 heatmap on a log-period axis with COI shading, significance dots,
    and phase arrows (rightward = in phase, upward = x leads)."""
    plt = _mpl()
    periods = cmap.periods
    fig, ax = plt.subplots(figsize=(8, 4.5))
    mesh = ax.pcolormesh(cmap.times, np.log2(periods), cmap.r2,
                         cmap="viridis", vmin=0.0, vmax=1.0, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="squared coherence")

    coi_periods = np.maximum(
        np.asarray(cmap.coi) * float(periods[0] / cmap.scales[0]), periods[0] * 1e-6
    )
    ax.plot(cmap.times, np.log2(coi_periods), color="white", lw=1.0, ls="--")

    if cmap.mask_fdr is not None and cmap.mask_fdr.any():
        ss, tt = np.nonzero(cmap.mask_fdr)
        ax.plot(cmap.times[tt], np.log2(periods[ss]), ".", color="white",
                markersize=1.5)

    if cmap.phase is not None:
        stride_t = max(1, arrow_stride)
        stride_s = max(1, cmap.scales.size // 12)
        sel_s = np.arange(0, cmap.scales.size, stride_s)
        sel_t = np.arange(0, cmap.times.size, stride_t)
        reliable = cmap.in_coi
        U = np.cos(cmap.phase)
        V = np.sin(cmap.phase)
        ax.quiver(
            cmap.times[sel_t], np.log2(periods[sel_s]),
            np.where(reliable, U, np.nan)[np.ix_(sel_s, sel_t)],
            np.where(reliable, V, np.nan)[np.ix_(sel_s, sel_t)],
            scale=30, width=0.002, color="black",
        )
    ax.set_ylim(np.log2(periods[0]), np.log2(periods[-1]))
    ax.invert_yaxis()
    ax.set_xlabel("time")
    ax.set_ylabel("log2 period")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
