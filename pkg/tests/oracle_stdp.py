"""Brute-force nearest-neighbor pairwise STDP oracle and scenario builder.

The scenario puppets N neurons: each neuron has a private injection port
whose strong weight forces a spike exactly at prescribed ticks, and the
plastic synapses land on a sink component so weight changes never feed
back into spiking.  The modulator component is pinned at a constant.

The oracle works directly on the prescribed spike trains in the engine's
delivery time frame (a spike at tick s is processed by fanout tables at
s + 1).  For every synapse it replays, independently of any table
machinery:

* at each pre delivery p: pair with the last post spike before p; if
  within the window, apply the acausal kernel at dt = t_post - p;
* at the window's expiry p + W: pair with the last post spike before the
  expiry; if it came after p, apply the causal kernel at dt = t_post - p.

With refractory >= window, a new pre spike never arrives before the
previous expiry, so this is exactly nearest-neighbor pairwise STDP.
"""

import numpy as np

from nsat import (ParamGroup, LearningGroup, CoreSpec, Synapse,
                  SimulationConfig, Fabric)
from nsat.plasticity import kernel_eval, modulated_eligibility
from nsat.fxp import clip

MOD_VALUE = 512
THETA = 900


def make_kernel(rng):
    win_ca = int(rng.integers(6, 16))
    win_ac = int(rng.integers(6, 16))
    lg = LearningGroup(
        tca=[int(rng.integers(2, win_ca)), win_ca],
        hica=[int(v) for v in rng.integers(-8, 3, 3)],
        sica=[int(v) for v in rng.choice([-1, 1], 3)],
        tac=[-int(rng.integers(2, win_ac)), -win_ac],
        hiac=[int(v) for v in rng.integers(-8, 3, 3)],
        siac=[int(v) for v in rng.choice([-1, 1], 3)],
        plastic=[False, False, True],
        rr_bits=0,
    )
    return lg


def make_trains(rng, n_neurons, ticks, refractory):
    """Sparse trains with inter-spike gaps > refractory + 1."""
    trains = []
    for _ in range(n_neurons):
        t = 1 + int(rng.integers(0, 3 * refractory))
        spikes = []
        while t < ticks - 2:
            spikes.append(t)
            t += refractory + 2 + int(rng.geometric(0.08))
        trains.append(spikes)
    return trains


def build_scenario(seed, n_neurons=100, ticks=10_000, fanout=8):
    rng = np.random.default_rng(seed)
    lg = make_kernel(rng)
    refractory = lg.window + 2
    trains = make_trains(rng, n_neurons, ticks, refractory)

    group = ParamGroup(k=3, theta=[THETA, 32767, 32767],
                       Xinit=[0, MOD_VALUE, 0],
                       Xreset=[0, MOD_VALUE, 0],
                       XresetOn=[True, False, False],
                       Xthup=[32767, MOD_VALUE, 32767],
                       Wgain=[3, 0, 0], modulator=1,
                       refractory=refractory)
    synapses = []
    syn_index = {}
    for i in range(n_neurons):
        targets = rng.choice([j for j in range(n_neurons) if j != i],
                             size=fanout, replace=False)
        for j in targets:
            syn_index[(i, int(j))] = len(synapses)
            synapses.append(Synapse(src=i, dst=int(j), comp=2,
                                    w=int(rng.integers(-20, 21)), plastic=True))
    for i in range(n_neurons):
        synapses.append(Synapse(src=n_neurons + i, dst=i, comp=0, w=127,
                                plastic=False))
    core = CoreSpec(n_internal=n_neurons, n_external=n_neurons,
                    groups=[group], lgroups=[lg], synapses=synapses)
    cfg = SimulationConfig(ticks=ticks, seed=seed, learning_enabled=True,
                           cores=[core])
    events = sorted((s - 1, 0, n_neurons + i, 0)
                    for i, train in enumerate(trains) for s in train)
    return cfg, events, trains, lg, syn_index


def oracle_updates(trains, lg, syn_index, synapses):
    """Per-synapse (tick, delta) events from the brute-force pairing."""
    W = lg.window
    updates = {idx: [] for idx in range(len(syn_index))}
    posts = {j: np.array(t) for j, t in enumerate(trains)}
    for (i, j), idx in syn_index.items():
        post = posts[j]
        for s in trains[i]:
            p = s + 1  # delivery tick
            k = np.searchsorted(post, p) - 1
            if k >= 0:
                tj = int(post[k])
                dt = tj - p
                eps = modulated_eligibility(kernel_eval(lg, dt), MOD_VALUE)
                if eps:
                    updates[idx].append((p, eps))
            e = p + W
            k = np.searchsorted(post, e) - 1
            if k >= 0 and post[k] > p:
                dt = int(post[k]) - p
                eps = modulated_eligibility(kernel_eval(lg, dt), MOD_VALUE)
                if eps:
                    updates[idx].append((e, eps))
    return updates


def oracle_trajectory(updates, w0, idx, ticks, checkpoints):
    """Weight value at each checkpoint tick (state after that tick)."""
    evs = sorted(updates[idx])
    out = []
    w = w0
    e = 0
    for cp in checkpoints:
        while e < len(evs) and evs[e][0] <= cp:
            w = clip(w + evs[e][1], -128, 127)
            e += 1
        out.append(w)
    return out


def run_engine_trajectory(cfg, events, checkpoints):
    """Engine weights (plastic slots) after each checkpoint tick,
    collected by splitting one fused run at the checkpoints."""
    fab = Fabric(cfg)
    fab.inject_external(events)
    core = fab.cores[0]
    rows = [s for s in range(len(core.splast)) if core.splast[s]]
    snaps = []
    t = 0
    for cp in checkpoints:
        fab.span(cp + 1 - t)
        t = cp + 1
        snaps.append(core.wpool[core.swidx[rows]].copy())
    return fab, rows, np.array(snaps)


def verify_scenario(seed, n_neurons=100, ticks=10_000, checkpoint_every=250):
    cfg, events, trains, lg, syn_index = build_scenario(seed, n_neurons, ticks)
    checkpoints = list(range(checkpoint_every - 1, ticks, checkpoint_every))
    if checkpoints[-1] != ticks - 1:
        checkpoints.append(ticks - 1)
    fab, rows, engine = run_engine_trajectory(cfg, events, checkpoints)

    core = fab.cores[0]
    # engine rows are in table order; map back to (src, dst) spec order
    updates = oracle_updates(trains, lg, syn_index, cfg.cores[0].synapses)
    # plastic table rows follow spec declaration order within each src row
    spec_of_row = {}
    for row_i, spec_i in enumerate(core.syn_order):
        spec_of_row[row_i] = spec_i
    ok = True
    mism = 0
    for col, row in enumerate(rows):
        spec_i = int(core.syn_order[row])
        syn = cfg.cores[0].synapses[spec_i]
        want = oracle_trajectory(updates, syn.w, spec_i, ticks, checkpoints)
        got = engine[:, col].tolist()
        if want != got:
            ok = False
            mism += 1
    # puppet sanity: every prescribed spike happened
    spikes_ok = int(core.counters[3]) == sum(len(t) for t in trains)
    return ok and spikes_ok, mism
