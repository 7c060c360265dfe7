"""Shared helpers for experiment builders."""

import os

import numpy as np

from ..iolib.config_io import save_config
from ..iolib.events import write_events
from ..rng import RngStream


def transpose(m):
    """Published coupling tables index [source][destination]; the engine's
    state-transition rows index the destination, so builders flip them."""
    return [list(r) for r in zip(*m)]


def write_bundle(cfg, outdir, events=None, name="config.yaml"):
    """Write a runnable bundle: config.yaml (+ sidecars) and optional
    input events; returns the config path."""
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    save_config(cfg, path)
    if events is not None:
        write_events(os.path.join(outdir, "events.evt"), events)
    return path


def poisson_events(stream, rates_per_tick, t0, t1, core=0, entry_base=0):
    """Bernoulli-per-tick spike trains for a bank of input entries.

    rates_per_tick[i] is the firing probability of entry entry_base + i
    on every tick in [t0, t1).  Returns (tick, core, neuron, delay)
    tuples sorted by tick; one stream draw per (tick, entry) so the
    schedule replays exactly for a given stream state.
    """
    events = []
    n = len(rates_per_tick)
    thresholds = [int(min(max(r, 0.0), 1.0) * 4294967296.0) for r in rates_per_tick]
    for t in range(t0, t1):
        for i in range(n):
            if thresholds[i] and stream.next_uniform() < thresholds[i]:
                events.append((t, core, entry_base + i, 0))
    return events


def regular_events(period, t0, t1, core, entry, phase=0):
    """Evenly spaced spikes with the given period starting at t0 + phase."""
    return [(t, core, entry, 0) for t in range(t0 + phase, t1, period)]


def spike_rate_per_neuron(spikes, n, t0, t1):
    """Spike counts per neuron id restricted to ticks [t0, t1)."""
    counts = np.zeros(n, dtype=np.int64)
    if len(spikes) == 0:
        return counts
    ticks = spikes["tick"] if spikes.dtype.names else spikes[:, 0]
    ids = spikes["neuron"] if spikes.dtype.names else spikes[:, 1]
    sel = (ticks >= t0) & (ticks < t1)
    for i in ids[sel]:
        counts[int(i)] += 1
    return counts


def isis(spike_ticks):
    st = np.asarray(sorted(spike_ticks), dtype=np.int64)
    return np.diff(st)
