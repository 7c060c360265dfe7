"""Figure emission from loaded run results (read-only on the run data)."""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("raster", "states", "error_curve", "weight_hist")


def plot(result, kind, path, monitor=0, neurons=None, errors=None, labels=None):
    """Write one figure of the given kind to `path` and return the path."""
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {KINDS}")
    fig, ax = plt.subplots(figsize=(7, 4))
    if kind == "raster":
        sp = result.spikes
        if neurons is not None:
            sel = np.isin(sp["neuron"], neurons)
            sp = sp[sel]
        ax.plot(sp["tick"], sp["neuron"], "|", markersize=3, color="k")
        ax.set_xlabel("tick")
        ax.set_ylabel("neuron")
    elif kind == "states":
        ticks, data = result.states[monitor]
        n_traces = data.shape[1] if data.ndim == 3 else 1
        for ni in range(n_traces):
            for ci in range(data.shape[2]):
                ax.plot(ticks, data[:, ni, ci], label=f"n{ni} x{ci}")
        ax.legend(loc="best", fontsize=8)
        ax.set_xlabel("tick")
        ax.set_ylabel("state value")
    elif kind == "error_curve":
        for i, tr in enumerate(errors):
            xs = [p[1] for p in tr]
            ys = [p[0] for p in tr]
            name = labels[i] if labels else f"trace {i}"
            ax.loglog(xs, ys, marker="o", label=name)
        ax.set_xlabel("operations")
        ax.set_ylabel("test error")
        ax.legend()
    elif kind == "weight_hist":
        w = result.weights_final
        ax.hist(w, bins=np.arange(-128.5, 128.5, 4), color="tab:blue")
        ax.set_xlabel("weight")
        ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
