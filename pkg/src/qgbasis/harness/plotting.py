"""Static SVG figures for experiment results (optional output)."""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids so repeated runs give identical files
matplotlib.rcParams["svg.hashsalt"] = "qgbasis"


def render(fig_spec, path):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    x = np.asarray(fig_spec.x, dtype=float)
    for label, y in fig_spec.series.items():
        y = np.array([np.nan if v is None else v for v in y], dtype=float)
        ax.plot(x, y, "o-", ms=4, lw=1.2, label=label)
    for label, f in fig_spec.fits.items():
        xs = np.geomspace(x.min(), x.max(), 100)
        name = "N" if f.model == "power" else "log M"
        ax.plot(xs, f.predict(xs), "--", lw=0.9,
                label=f"{label}: {f.constant:.3g} ({name})^{f.exponent:.3f}, R2={f.r2:.3f}")
    ax.set_xscale("log")
    if fig_spec.scale == "loglog":
        ax.set_yscale("log")
    ax.set_xlabel(fig_spec.xlabel)
    ax.set_ylabel(fig_spec.ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def write_svg(result, out_dir):
    return [render(f, Path(out_dir) / f"{f.name}.svg") for f in result.figures]
