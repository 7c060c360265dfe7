"""Error-broadcast digit classifier (784-H-10) on one core.

Three populations: two-component hidden and output neurons (x0 membrane
driven by blanked-out synaptic input, x1 a leaky modulation compartment
fed by error spikes), plus pairs of pure-integrator error neurons, one
signed pair per class.  Prediction and label spike trains enter an error
pair with opposite signs; the pair's rate encodes the rectified
difference.  Error spikes broadcast back through fixed random zero-sum
weights into hidden modulation compartments (one-to-one, sign-flipped,
into output compartments), and every data or hidden pre-spike then
applies a modulated, membrane-gated, randomized-rounded weight update.

Updates hang off the acausal path with an effectively unbounded pairing
window, so any post neuron that has ever fired keeps learning on each
pre event; the gate on the membrane (boxcar) does the real selection.
Weights never update during the first `blank` ticks of a presentation.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..fxp import OFF
from ..params import (ParamGroup, LearningGroup, Synapse, CoreSpec,
                      SimulationConfig, LearningGate)
from ..engine.fabric import Fabric
from ..rng import seed_words, stream_next


@dataclass
class ErbpParams:
    hidden: int = 100
    theta_h: int = 2500
    theta_o: int = 1800
    theta_e: int = 1025
    refractory: int = 40             # hidden neurons; also the label period
    refractory_out: int = 4          # prediction units answer in a nearly
                                     # unsaturated rate code (the hidden-level
                                     # cap would pin every driven output at
                                     # the same count)
    ticks_per_digit: int = 1500
    blank: int = 400
    rate_max: float = 0.012          # peak pixel firing probability per tick
    w_label: int = 64                # prediction/label drive into error pairs
    w_err_hidden: int = 12           # |g| of the random zero-sum feedback
    w_err_out: int = 64              # one-to-one feedback, sign-flipped
    init_in: tuple = (-8, 24)        # data->hidden init range; positive bias so
                                     # every unit fires early (a never-spiking
                                     # post can never pair, hence never learn)
    init_out: tuple = (0, 16)        # hidden->output init range
    boxcar_lo: int = -5000
    boxcar_hi: int = 5000
    rr_bits: int = 6
    hidden_wbound: int = 64          # data->hidden weights live in +/-64: the
                                     # error-driven walk stays off the 8-bit
                                     # rails while features form
    seed: int = 11


def layout(p):
    nh = p.hidden
    ids = {}
    ids["hidden"] = (0, nh)
    ids["output"] = (nh, nh + 10)
    ids["err_pos"] = (nh + 10, nh + 20)
    ids["err_neg"] = (nh + 20, nh + 30)
    n_int = nh + 30
    ids["data"] = (n_int, n_int + 784)
    ids["label"] = (n_int + 784, n_int + 794)
    ids["n_int"] = n_int
    ids["n_ext"] = 794
    return ids


def build_erbp(p=None):
    """Config + id layout; weights are randomly initialized from p.seed."""
    p = p or ErbpParams()
    if p.hidden < 10:
        raise ValueError("hidden layer must have at least 10 units")
    ids = layout(p)
    nh = p.hidden
    rng = np.random.default_rng(p.seed)

    g_hidden = ParamGroup(
        k=2, A=[[-7, OFF], [OFF, -6]], sA=[[-1, 1], [1, -1]],
        prob=[9, 15], Wgain=[3, 4], theta=[p.theta_h, 32767],
        Xreset=[0, 0], XresetOn=[False, False], Xthlo=[-32767, -32767],
        modulator=1, refractory=p.refractory)
    g_output = ParamGroup(
        k=2, A=[[-7, OFF], [OFF, -6]], sA=[[-1, -1], [-1, -1]],
        prob=[9, 15], Wgain=[3, 4], theta=[p.theta_o, 32767],
        Xreset=[0, 0], XresetOn=[False, False], Xthlo=[-32767, -32767],
        modulator=1, refractory=p.refractory_out)
    g_error = ParamGroup(
        k=2, A=[[OFF, OFF], [OFF, OFF]], sA=[[1, 1], [1, 1]],
        prob=[15, 15], Wgain=[4, 4], theta=[p.theta_e, 32767],
        XresetOn=[False, False], XspikeIncrVal=[-p.theta_e, 0],
        Xthlo=[0, 0], refractory=0)

    lg_hidden = LearningGroup(
        tca=[1, 1], hica=[OFF, OFF, OFF],
        tac=[-1, -(1 << 31)], hiac=[-7, -7, -7], siac=[1, 1, 1],
        plastic=[True, False], rr_bits=p.rr_bits,
        wmin=-p.hidden_wbound, wmax=p.hidden_wbound,
        gate_enabled=True, gate_component=0,
        gate_low=p.boxcar_lo, gate_high=p.boxcar_hi)
    lg_out = LearningGroup(
        tca=[1, 1], hica=[OFF, OFF, OFF],
        tac=[-1, -(1 << 31)], hiac=[-7, -7, -7], siac=[1, 1, 1],
        plastic=[True, False], rr_bits=p.rr_bits,
        gate_enabled=True, gate_component=0,
        gate_low=p.boxcar_lo, gate_high=p.boxcar_hi)
    lg_off = LearningGroup(plastic=[False, False])

    h0, h1 = ids["hidden"]
    o0, o1 = ids["output"]
    ep0, _ = ids["err_pos"]
    en0, _ = ids["err_neg"]
    d0, _ = ids["data"]
    l0, _ = ids["label"]

    syn = []
    for px in range(784):
        for j in range(nh):
            w = int(rng.integers(p.init_in[0], p.init_in[1] + 1))
            syn.append(Synapse(src=d0 + px, dst=h0 + j, comp=0, w=w, plastic=True))
    for j in range(nh):
        for o in range(10):
            w = int(rng.integers(p.init_out[0], p.init_out[1] + 1))
            syn.append(Synapse(src=h0 + j, dst=o0 + o, comp=0, w=w, plastic=True))
    for o in range(10):
        syn.append(Synapse(src=o0 + o, dst=ep0 + o, comp=0, w=p.w_label, plastic=False))
        syn.append(Synapse(src=o0 + o, dst=en0 + o, comp=0, w=-p.w_label, plastic=False))
        syn.append(Synapse(src=l0 + o, dst=ep0 + o, comp=0, w=-p.w_label, plastic=False))
        syn.append(Synapse(src=l0 + o, dst=en0 + o, comp=0, w=p.w_label, plastic=False))
    # random zero-sum feedback: per hidden neuron, half +g half -g over classes
    for j in range(nh):
        signs = np.array([1] * 5 + [-1] * 5)
        rng.shuffle(signs)
        for k in range(10):
            g = int(signs[k]) * p.w_err_hidden
            syn.append(Synapse(src=ep0 + k, dst=h0 + j, comp=1, w=g, plastic=False))
            syn.append(Synapse(src=en0 + k, dst=h0 + j, comp=1, w=-g, plastic=False))
    for o in range(10):
        syn.append(Synapse(src=ep0 + o, dst=o0 + o, comp=1, w=-p.w_err_out, plastic=False))
        syn.append(Synapse(src=en0 + o, dst=o0 + o, comp=1, w=p.w_err_out, plastic=False))

    pgroup_of = [0] * nh + [1] * 10 + [2] * 20
    lgroup_of = [0] * nh + [1] * 10 + [2] * 20
    core = CoreSpec(n_internal=ids["n_int"], n_external=ids["n_ext"],
                    groups=[g_hidden, g_output, g_error],
                    lgroups=[lg_hidden, lg_out, lg_off],
                    pgroup_of=pgroup_of, lgroup_of=lgroup_of, synapses=syn)
    cfg = SimulationConfig(
        ticks=p.ticks_per_digit, seed=p.seed, learning_enabled=True,
        gate=LearningGate(period=p.ticks_per_digit, lo=p.blank, hi=p.ticks_per_digit),
        max_delay=4, cores=[core])
    return cfg, ids


@njit(cache=True)
def _poisson_fill(words, thresholds, entry_base, t0, t1, out_t, out_e):
    n = 0
    cap = out_t.shape[0]
    for t in range(t0, t1):
        for i in range(thresholds.shape[0]):
            th = thresholds[i]
            if th == np.uint64(0):
                continue
            if np.uint64(stream_next(0, words)) < th:
                if n >= cap:
                    return -1
                out_t[n] = t
                out_e[n] = entry_base + i
                n += 1
    return n


def poisson_block(words, probs, entry_base, t0, t1):
    """Poisson events for a bank of entries as (ticks, entries) arrays."""
    probs = np.asarray(probs, dtype=np.float64)
    thresholds = (np.clip(probs, 0, 1) * 4294967296.0).astype(np.uint64)
    exp = float(probs.sum() * (t1 - t0))
    cap = int(exp + 10 * np.sqrt(exp + 10) + 256)
    out_t = np.zeros(cap, dtype=np.int64)
    out_e = np.zeros(cap, dtype=np.int64)
    n = _poisson_fill(words, thresholds, entry_base, t0, t1, out_t, out_e)
    if n < 0:  # pragma: no cover - cap is a >10-sigma bound
        raise RuntimeError("poisson capacity exceeded")
    return out_t[:n], out_e[:n]


def merge_streams(blocks):
    """Merge (ticks, entries) blocks into one tick-sorted pair (stable)."""
    ts = np.concatenate([b[0] for b in blocks]) if blocks else np.zeros(0, np.int64)
    es = np.concatenate([b[1] for b in blocks]) if blocks else np.zeros(0, np.int64)
    order = np.argsort(ts, kind="stable")
    return ts[order], es[order]


def error_pair_spikes(ticks=10_000, matched=True, p=None, period=7):
    """Spike count of one error pair fed a prediction train and a label
    train through opposed weights.  matched=True feeds the identical
    train to both ports: contributions cancel tick by tick and the pair
    stays silent for any threshold."""
    p = p or ErbpParams()
    g_error = ParamGroup(
        k=2, A=[[OFF, OFF], [OFF, OFF]], sA=[[1, 1], [1, 1]],
        prob=[15, 15], Wgain=[4, 4], theta=[p.theta_e, 32767],
        XresetOn=[False, False], XspikeIncrVal=[-p.theta_e, 0],
        Xthlo=[0, 0], refractory=0)
    syn = [
        Synapse(src=2, dst=0, comp=0, w=p.w_label, plastic=False),   # prediction -> E+
        Synapse(src=2, dst=1, comp=0, w=-p.w_label, plastic=False),  # prediction -> E-
        Synapse(src=3, dst=0, comp=0, w=-p.w_label, plastic=False),  # label -> E+
        Synapse(src=3, dst=1, comp=0, w=p.w_label, plastic=False),   # label -> E-
    ]
    core = CoreSpec(n_internal=2, n_external=2, groups=[g_error], synapses=syn)
    cfg = SimulationConfig(ticks=ticks, seed=1, cores=[core])
    fab = Fabric(cfg)
    events = []
    for t in range(0, ticks, period):
        if matched:
            events.append((t, 0, 2, 0))
        events.append((t, 0, 3, 0))
    fab.inject_external(sorted(events))
    res = fab.run()
    return len(res.spikes)


class ErbpRun:
    """Training/evaluation harness around one fused-span fabric."""

    def __init__(self, train, test, params=None):
        self.p = params or ErbpParams()
        self.cfg, self.ids = build_erbp(self.p)
        self.fab = Fabric(self.cfg)
        self.train_images = train[0].reshape(len(train[0]), -1)
        self.train_labels = train[1]
        self.test_images = test[0].reshape(len(test[0]), -1)
        self.test_labels = test[1]
        self.input_words = seed_words(0, self.p.seed, 90001)
        self.history = []            # (epoch, test_error, synops, updates)
        peak = int(784 * self.p.rate_max + 10) + 8
        self.fab.prepare_buffers(max_inj_per_tick=peak)

    # ------------------------------------------------------------------
    def _digit_injections(self, image, label, t0, with_label):
        p = self.p
        probs = image.astype(np.float64) / 255.0 * p.rate_max
        data = poisson_block(self.input_words, probs, self.ids["data"][0],
                             t0, t0 + p.ticks_per_digit)
        blocks = [data]
        if with_label:
            lt = np.arange(t0 + p.refractory // 2, t0 + p.ticks_per_digit,
                           p.refractory, dtype=np.int64)
            le = np.full(len(lt), self.ids["label"][0] + int(label), dtype=np.int64)
            blocks.append((lt, le))
        return merge_streams(blocks)

    def present(self, image, label, learn):
        p = self.p
        self.fab.cfg.learning_enabled = learn
        t0 = self.fab.t
        inj = self._digit_injections(image, label, t0, with_label=learn)
        spikes, _ = self.fab.span(p.ticks_per_digit, inj=inj)
        o0, o1 = self.ids["output"]
        sel = (spikes[:, 1] >= o0) & (spikes[:, 1] < o1) & (spikes[:, 0] >= t0 + p.blank)
        counts = np.bincount(spikes[sel, 1] - o0, minlength=10)
        return counts

    def train_epoch(self, order=None):
        idx = order if order is not None else range(len(self.train_images))
        for i in idx:
            self.present(self.train_images[i], self.train_labels[i], learn=True)

    def evaluate(self, n=None):
        n = n if n is not None else len(self.test_images)
        wrong = 0
        for i in range(n):
            counts = self.present(self.test_images[i], self.test_labels[i], learn=False)
            if counts.argmax() != self.test_labels[i]:
                wrong += 1
        return wrong / n

    def synops(self):
        return int(self.fab.cores[0].counters[2])

    def weight_updates(self):
        return int(self.fab.cores[0].counters[4])

    def run(self, epochs=10, eval_n=250, log=None):
        for epoch in range(epochs):
            self.train_epoch()
            ops = self.synops()      # training ops only, before the eval pass
            upd = self.weight_updates()
            err = self.evaluate(eval_n)
            self.history.append((epoch + 1, err, ops, upd))
            if log:
                log(f"epoch {epoch + 1}: test_error={err:.3f} synops={ops:.3e}")
        return self.history
