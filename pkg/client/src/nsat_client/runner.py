"""Invoke the core CLI and load a run directory into arrays."""

import json
import os
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .formats import read_events, ClientFormatError


class CoreRunError(RuntimeError):
    pass


@dataclass
class RunResult:
    spikes: np.ndarray = None          # structured (tick, core, neuron, delay)
    states: dict = field(default_factory=dict)    # monitor idx -> (ticks, data)
    weights: dict = field(default_factory=dict)
    weights_final: np.ndarray = None
    stats: dict = field(default_factory=dict)
    outdir: str = ""

    def spike_ticks(self, neuron=None, core=None):
        sel = np.ones(len(self.spikes), dtype=bool)
        if neuron is not None:
            sel &= self.spikes["neuron"] == neuron
        if core is not None:
            sel &= self.spikes["core"] == core
        return self.spikes["tick"][sel].astype(np.int64)

    def isis(self, neuron=0, core=0):
        return np.diff(self.spike_ticks(neuron=neuron, core=core))


def run_core(config_path, outdir, binary="nsat", threads=1, extra_args=()):
    """Execute the simulator CLI; raises with captured stderr on failure."""
    cmd = [binary, "--config", str(config_path), "--out", str(outdir),
           "--threads", str(threads), *extra_args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise CoreRunError(
            f"core exited with {proc.returncode}: {proc.stderr.strip() or proc.stdout.strip()}")
    return proc


def load_run(outdir):
    """Parse spikes, monitors, final weights and stats from a run dir."""
    res = RunResult(outdir=str(outdir))
    res.spikes = read_events(os.path.join(outdir, "spikes.evt"))
    for name in sorted(os.listdir(outdir)):
        if name.startswith("monitor_") and name.endswith("_states.npz"):
            idx = int(name.split("_")[1])
            with np.load(os.path.join(outdir, name)) as z:
                res.states[idx] = (z["ticks"].copy(), z["states"].copy())
        elif name.startswith("monitor_") and name.endswith("_weights.npz"):
            idx = int(name.split("_")[1])
            with np.load(os.path.join(outdir, name)) as z:
                res.weights[idx] = (z["ticks"].copy(), z["weights"].copy())
    wf = os.path.join(outdir, "weights_final.npy")
    if os.path.exists(wf):
        res.weights_final = np.load(wf)
    sf = os.path.join(outdir, "stats.json")
    if os.path.exists(sf):
        with open(sf) as fh:
            res.stats = json.load(fh)
    return res


def run_and_load(config_path, outdir, binary="nsat", threads=1, extra_args=()):
    run_core(config_path, outdir, binary=binary, threads=threads, extra_args=extra_args)
    return load_run(outdir)
