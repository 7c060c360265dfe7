"""Field-of-neurons benchmarks: bump, selection and tracking.

100 leaky units on [0, 1] with all-to-all lateral weights from a
difference-of-Gaussians profile, uniformly quantized with
Q(r) = step * floor(r / step + 0.5) and scaled to 5-bit integer weights.
Resets are disabled: a unit above threshold fires on every tick, which
is the discrete stand-in for rate output.  100 external one-to-one ports
carry Poisson input.

The field can be sliced across several lockstep cores; remote sources
appear as proxy entries holding the local slice of their fanout, so the
weight tables stay core-local and only spike addresses travel.

Variant knobs (excitation height, kernel asymmetry, threshold, gain)
were fixed empirically at desk scale and are recorded as defaults.
"""

import math

import numpy as np

from ..params import ParamGroup, CoreSpec, SimulationConfig, Synapse, Axon
from ..rng import RngStream
from .common import poisson_events

OFF = -16

N_FIELD = 100
THETA = 2000
WGAIN = 4
W_INPUT = 127
WCAP = 31
SIGMA_E = 0.1
SIGMA_I = 1.0
K_I = 0.75

VARIANTS = {
    # excitation height, kernel shift (asymmetry), input plan
    "bump": dict(K_e=1.5, shift=0),
    "select": dict(K_e=1.2, shift=0),
    "track": dict(K_e=1.1, shift=1),
}


def dog_weight(d, K_e, shift=0):
    r = (d - shift) / float(N_FIELD)
    return (K_e * math.exp(-r * r / (2 * SIGMA_E ** 2))
            - K_I * math.exp(-r * r / (2 * SIGMA_I ** 2)))


def quantized_kernel(K_e, shift=0, wcap=WCAP):
    """Integer lateral weights plus the quantization step actually used."""
    w = np.array([[dog_weight(i - j, K_e, shift) for j in range(N_FIELD)]
                  for i in range(N_FIELD)])
    step = np.abs(w).max() / wcap
    q = np.floor(w / step + 0.5).astype(np.int64)
    return q, step


def _field_group():
    return ParamGroup(
        k=4,
        A=[[-2, OFF, OFF, OFF], [OFF] * 4, [OFF] * 4, [OFF] * 4],
        sA=[[-1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1]],
        b=[-5, 0, 0, 0],
        theta=[THETA, 0, 0, 0],
        Wgain=[WGAIN, 0, 0, 0],
        reset_enabled=False,
    )


def _layout(cores):
    if N_FIELD % cores:
        raise ValueError("core count must divide the field size")
    per = N_FIELD // cores
    return per


def input_port(g, cores):
    """(core, entry) of the external port driving global unit g."""
    per = _layout(cores)
    return g // per, per + (g % per)


def proxy_entry(g_src, core, cores):
    """Entry id of remote source g_src on `core` (local sources use their id)."""
    per = _layout(cores)
    home = g_src // per
    if home == core:
        return g_src % per
    remotes = [g for g in range(N_FIELD) if g // per != core]
    return 2 * per + remotes.index(g_src)


def build_field(variant, cores=1, ticks=2500, seed=42):
    """Config plus input events for one field variant."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    v = VARIANTS[variant]
    q, _ = quantized_kernel(v["K_e"], v["shift"])
    per = _layout(cores)
    specs = []
    for c in range(cores):
        locals_ = list(range(c * per, (c + 1) * per))
        syn = []
        for g_src in range(N_FIELD):
            row = proxy_entry(g_src, c, cores)
            for li, g_dst in enumerate(locals_):
                wq = int(q[g_dst, g_src])
                if wq != 0:
                    syn.append(Synapse(src=row, dst=li, comp=0, w=wq, plastic=False))
        for li, g in enumerate(locals_):
            syn.append(Synapse(src=per + li, dst=li, comp=0, w=W_INPUT, plastic=False))
        axons = []
        for li, g in enumerate(locals_):
            axons.append(Axon(src=li, dst_core=c, dst_entry=li, delay=0))
            for c2 in range(cores):
                if c2 != c:
                    axons.append(Axon(src=li, dst_core=c2,
                                      dst_entry=proxy_entry(g, c2, cores), delay=0))
        n_ext = per + (N_FIELD - per)
        specs.append(CoreSpec(n_internal=per, n_external=n_ext,
                              groups=[_field_group()], synapses=syn, axons=axons))
    cfg = SimulationConfig(ticks=ticks, seed=seed, cores=specs)
    events = _input_events(variant, cores, seed)
    return cfg, events


def _emit_band(stream, rates, t0, t1, cores):
    """Poisson events routed to the right (core, port) for each unit."""
    raw = poisson_events(stream, rates, t0, t1)
    out = []
    for (t, _c, g, d) in raw:
        core, port = input_port(g, cores)
        out.append((t, core, port, d))
    return out


def _input_events(variant, cores, seed):
    stream = RngStream(0, seed, sequence=1000)
    ev = []
    if variant == "bump":
        rates = np.full(N_FIELD, 0.010)
        rates[40:60] = 0.035
        ev = _emit_band(stream, rates, 0, 400, cores)
    elif variant == "select":
        rates = np.zeros(N_FIELD)
        rates[20:40] = 0.05
        rates[70:90] = 0.05
        ev = _emit_band(stream, rates, 0, 500, cores)
    elif variant == "track":
        for s, center in enumerate(track_centers()):
            rates = np.zeros(N_FIELD)
            rates[max(center - 5, 0):center + 5] = 0.05
            ev += _emit_band(stream, rates, 500 * s, 500 * (s + 1), cores)
    ev.sort(key=lambda e: e[0])
    return ev


def track_centers():
    return (20, 35, 50, 65, 80)
