"""Figure rendering for sweep results (written alongside the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_MARKERS = ("o", "s", "^", "v", "d", "x", "+")


def render_sweep_figure(result, path) -> None:
    """Mean and normalized mean rate versus RIS element count, one line per method."""
    methods = []
    for agg in result.aggregates:
        if agg.method not in methods:
            methods.append(agg.method)

    fig, (ax_raw, ax_norm) = plt.subplots(1, 2, figsize=(10, 4))
    for i, method in enumerate(methods):
        aggs = sorted(
            (a for a in result.aggregates if a.method == method), key=lambda a: a.n_ris
        )
        sizes = [a.n_ris for a in aggs]
        marker = _MARKERS[i % len(_MARKERS)]
        ax_raw.plot(sizes, [a.mean_rate for a in aggs], marker=marker, label=method)
        ax_norm.plot(sizes, [a.normalized_mean for a in aggs], marker=marker, label=method)

    scenario = result.config.get("scenario", "sweep")
    for ax, ylabel in ((ax_raw, "mean rate (bit/s/Hz)"), (ax_norm, "normalized mean rate")):
        ax.set_xscale("log", base=2)
        ax.set_xlabel("RIS elements")
        ax.set_ylabel(ylabel)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    fig.suptitle(f"{scenario} sweep, {result.config.get('trials', '?')} trials")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
