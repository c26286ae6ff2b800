"""Figure builders: per-pass metric traces and pooled empirical CDFs.

The renderer is a pure view: arrays parsed from the CSVs go into matplotlib
unmodified, so the plotted points are byte-identical to the file contents.
Output format follows the file suffix (.png or .svg); both are reproducible,
with the SVG id hash salted to a constant.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fdxplot"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .io import METRICS, discover_traces, read_cdf_csv, read_trace_csv  # noqa: E402

AXIS_LABELS = {
    "snr_ul_db": "uplink SNR (dB)",
    "snr_dl_db": "downlink SNR (dB)",
    "inr_db": "INR (dB)",
    "sinr_dl_db": "downlink SINR (dB)",
    "sum_se": "sum SE (bit/s/Hz)",
}

TRACE_DEFAULT_METRICS = ("inr_db", "sinr_dl_db")
CDF_DEFAULT_METRICS = ("inr_db", "snr_dl_db", "sinr_dl_db")


@dataclass(frozen=True)
class FigureSpec:
    in_dir: str
    kind: str  # "trace" | "cdf"
    out_path: str
    metrics: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("trace", "cdf"):
            raise ValueError(f"figure kind {self.kind!r} unknown (trace or cdf)")
        defaults = TRACE_DEFAULT_METRICS if self.kind == "trace" else CDF_DEFAULT_METRICS
        chosen = tuple(self.metrics) or defaults
        for m in chosen:
            if m not in METRICS:
                raise ValueError(f"metric {m!r} unknown; known: {', '.join(METRICS)}")
        object.__setattr__(self, "metrics", chosen)


def scheme_display(scheme: str) -> str:
    """conventional -> as-is; proposed_2x2 -> 'proposed Δ=2°'."""
    if scheme.startswith("proposed_") and "x" in scheme[len("proposed_"):]:
        az, _, el = scheme[len("proposed_"):].partition("x")
        if az == el:
            return f"proposed Δ={az}°"
        return f"proposed Δaz={az}° Δel={el}°"
    return scheme


def build_trace_figure(spec: FigureSpec):
    traces = {s: read_trace_csv(p) for s, p in discover_traces(spec.in_dir).items()}
    for scheme, cols in traces.items():
        for m in spec.metrics:
            if m not in cols:
                raise ValueError(
                    f"column {m!r} missing from trace_{scheme}.csv under {spec.in_dir}"
                )
    n = len(spec.metrics)
    fig, axes = plt.subplots(
        n, 1, sharex=True, figsize=(7.0, 2.4 * n), constrained_layout=True, squeeze=False
    )
    axes = axes[:, 0]
    for ax, metric in zip(axes, spec.metrics):
        for scheme in sorted(traces):
            ax.plot(
                traces[scheme]["t"],
                traces[scheme][metric],
                linewidth=1.4,
                label=scheme_display(scheme),
            )
        if metric == "inr_db":
            ax.axhline(0.0, color="0.35", linestyle="--", linewidth=1.0)
        ax.set_ylabel(AXIS_LABELS[metric])
        ax.grid(True, alpha=0.3)
    t_all = next(iter(traces.values()))["t"]
    axes[0].set_xlim(float(t_all.min()), float(t_all.max()))
    axes[0].legend(loc="best", fontsize=9)
    axes[-1].set_xlabel("time (s)")
    return fig


def build_cdf_figure(spec: FigureSpec):
    path = spec.in_dir
    if os.path.isdir(path):
        path = os.path.join(path, "cdf.csv")
    curves = read_cdf_csv(path)
    metrics_present = {m for _, m in curves}
    for m in spec.metrics:
        if m not in metrics_present:
            raise ValueError(f"metric {m!r} has no rows in {path}")
    n = len(spec.metrics)
    fig, axes = plt.subplots(
        1, n, figsize=(3.6 * n, 3.2), constrained_layout=True, squeeze=False
    )
    axes = axes[0, :]
    for ax, metric in zip(axes, spec.metrics):
        schemes = sorted(s for s, m in curves if m == metric)
        for scheme in schemes:
            values, probs = curves[(scheme, metric)]
            ax.step(values, probs, where="post", linewidth=1.4, label=scheme_display(scheme))
        if metric == "inr_db":
            ax.axvline(0.0, color="0.35", linestyle="--", linewidth=1.0)
        ax.set_xlabel(AXIS_LABELS[metric])
        ax.set_ylim(0.0, 1.0)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("cumulative probability")
    axes[0].legend(loc="best", fontsize=8)
    return fig


def _save(fig, out_path) -> str:
    ext = os.path.splitext(str(out_path))[1].lower()
    if ext not in (".png", ".svg"):
        raise ValueError(f"output format {ext or '(none)'} unsupported; use .png or .svg")
    kwargs = {"dpi": 150}
    if ext == ".svg":
        kwargs["metadata"] = {"Date": None}  # drop the embedded timestamp
    try:
        fig.savefig(out_path, **kwargs)
    except OSError as exc:
        # normalize so a missing *output* directory is an I/O failure, not
        # confusable with a missing input file
        raise OSError(f"failed writing {out_path}: {exc}") from exc
    finally:
        plt.close(fig)
    return str(out_path)


def render_trace(spec: FigureSpec) -> str:
    return _save(build_trace_figure(spec), spec.out_path)


def render_cdf(spec: FigureSpec) -> str:
    return _save(build_cdf_figure(spec), spec.out_path)
