"""Success-rate learning curves rendered to SVG."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def emit_plot(series: dict, sink, title: str | None = None) -> str:
    """Draw one mean curve with a min/max band per entry of ``series``.

    ``series`` maps a label to the dict returned by
    :func:`lexnav.harness.aggregate_runs`. ``sink`` is a path or a text file
    object; the SVG text is also returned.
    """
    if not series or any(len(agg["env_step"]) == 0 for agg in series.values()):
        raise ValueError("nothing to plot: empty series")
    with matplotlib.rc_context({"svg.hashsalt": "lexnav", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for label, agg in series.items():
            x, mean = agg["env_step"], agg["mean"]
            n_runs = agg.get("n_runs", 1)
            marker = "o" if len(x) == 1 else None
            line, = ax.plot(x, mean, marker=marker, label=f"{label} (n={n_runs})")
            ax.fill_between(x, agg["min"], agg["max"], color=line.get_color(), alpha=0.2, linewidth=0)
        ax.set_xlabel("environment steps")
        ax.set_ylabel("success rate")
        ax.set_ylim(-0.02, 1.02)
        ax.grid(True, alpha=0.3)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", fontsize="small")
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    svg = buf.getvalue()
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(svg)
    elif sink is not None:
        sink.write(svg)
    return svg
