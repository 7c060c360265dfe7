"""Membrane-state-gated sequence learning: 100 inputs onto 5 detectors.

Each detector is one four-component neuron: x0 the membrane (lower
bounded at 0), x1 the thresholded-membrane plasticity state
clip(x0 - 1216, -2, 8) whose saturation levels are the potentiation and
depression magnitudes, x2 a calcium-like own-spike trace (+1024 per
spike, slow decay), x3 the weight-modulation state
x1 + 5 - x2/512 -- i.e. drive-dependent LTP/LTD with a firing-rate
homeostat.  A weight update fires on *pre-synaptic* events only: every
delivered input spike adds the post's current x3 (shifted, stochastically
rounded) to its synapse, so the pairing window is effectively unbounded
and the causal side is disabled.

A frozen random spike segment (the pattern) is interleaved with fresh
rate-matched noise segments; detectors end up spiking almost exclusively
inside pattern windows.
"""

from dataclasses import dataclass

import numpy as np

from ..fxp import OFF
from ..params import (ParamGroup, LearningGroup, Synapse, CoreSpec,
                      SimulationConfig)
from ..engine.fabric import Fabric
from ..rng import seed_words
from .erbp import poisson_block, merge_streams

N_IN = 100
N_OUT = 5

_A_PRINTED = [
    [-4, 0, OFF, OFF],
    [OFF, 0, OFF, 0],
    [OFF, OFF, -8, -9],
    [OFF, OFF, OFF, 0],
]
_S_PRINTED = [
    [-1, 1, 1, 1],
    [1, -1, 1, 1],
    [1, 1, -1, -1],
    [1, 1, 1, -1],
]


@dataclass
class PatternParams:
    theta: int = 1600
    refractory: int = 64          # >= segment: one spike per block, and the
                                  # post-spike depression tail lands on an
                                  # unbiased mix of following blocks
    wgain: int = 2
    segment: int = 60             # ticks per pattern or noise block
    rate: float = 0.015           # per-port firing probability per tick
    pattern_prob: float = 0.5     # chance a block is the frozen pattern
    init_lo: int = 20
    init_hi: int = 60
    level: int = -1               # eligibility shift applied to x3
    rr_bits: int = 3
    wmax: int = 64                # narrow weight range -> broad clusters,
                                  # which keeps noise blocks below threshold
    seed: int = 21


def _transpose(m):
    return [list(r) for r in zip(*m)]


def build_pattern(p=None):
    p = p or PatternParams()
    group = ParamGroup(
        k=4,
        A=_transpose(_A_PRINTED),
        sA=_transpose(_S_PRINTED),
        b=[0, -1216, 0, 5],
        theta=[p.theta, 32767, 32767, 32767],
        Xreset=[0, 0, 0, 0],
        XresetOn=[True, False, False, False],
        XspikeIncrVal=[0, 0, 1024, 0],
        Xthlo=[0, -2, -32767, -32767],
        Xthup=[32767, 8, 32767, 32767],
        Wgain=[p.wgain, 0, 0, 0],
        modulator=3,
        refractory=p.refractory,
    )
    lg = LearningGroup(
        tca=[1, 1], hica=[OFF, OFF, OFF],
        tac=[-1, -(1 << 31)], hiac=[p.level] * 3, siac=[1, 1, 1],
        plastic=[True, False, False, False], rr_bits=p.rr_bits,
        wmax=p.wmax)
    rng = np.random.default_rng(p.seed)
    syn = []
    for i in range(N_IN):
        for j in range(N_OUT):
            w = int(rng.integers(p.init_lo, p.init_hi + 1))
            syn.append(Synapse(src=N_OUT + i, dst=j, comp=0, w=w, plastic=True))
    core = CoreSpec(n_internal=N_OUT, n_external=N_IN, groups=[group],
                    lgroups=[lg], synapses=syn)
    cfg = SimulationConfig(ticks=1, seed=p.seed, learning_enabled=True,
                           max_delay=4, cores=[core])
    return cfg


class PatternRun:
    """Interleaved pattern/noise trainer with window bookkeeping."""

    def __init__(self, params=None):
        self.p = params or PatternParams()
        self.cfg = build_pattern(self.p)
        self.fab = Fabric(self.cfg)
        self.fab.prepare_buffers(max_inj_per_tick=int(N_IN * self.p.rate * 8 + 16))
        self.noise_words = seed_words(0, self.p.seed, 70001)
        self.sched_rng = np.random.default_rng(self.p.seed + 1)
        pat_words = seed_words(0, self.p.seed, 70002)
        probs = np.full(N_IN, self.p.rate)
        t_rel, e = poisson_block(pat_words, probs, N_OUT, 0, self.p.segment)
        self.pattern = (t_rel, e)
        self.windows = []             # (t0, t1) of pattern blocks

    def run_blocks(self, n_blocks, learn=True, force=None):
        """Run blocks; force overrides the coin flip ('pattern'/'noise')."""
        p = self.p
        self.fab.cfg.learning_enabled = learn
        spikes_all = []
        for _ in range(n_blocks):
            t0 = self.fab.t
            if force is not None:
                is_pat = force == "pattern"
            else:
                is_pat = self.sched_rng.random() < p.pattern_prob
            if is_pat:
                inj = (self.pattern[0] + t0, self.pattern[1])
                self.windows.append((t0, t0 + p.segment))
            else:
                inj = poisson_block(self.noise_words, np.full(N_IN, p.rate),
                                    N_OUT, t0, t0 + p.segment)
            spikes, _ = self.fab.span(p.segment, inj=inj)
            spikes_all.append(spikes)
        return np.concatenate(spikes_all) if spikes_all else np.zeros((0, 2), np.int64)

    def selectivity(self, n_blocks=80):
        """(in-window fraction per detector, pattern hit rate) with
        learning frozen over a balanced probe sequence."""
        p = self.p
        marks = []
        spikes = []
        for b in range(n_blocks):
            force = "pattern" if b % 2 == 0 else "noise"
            t0 = self.fab.t
            sp = self.run_blocks(1, learn=False, force=force)
            spikes.append(sp)
            marks.append((t0, force == "pattern"))
        spikes = np.concatenate(spikes)
        frac = np.zeros(N_OUT)
        hits = 0
        npat = 0
        for j in range(N_OUT):
            sj = spikes[spikes[:, 1] == j, 0]
            if len(sj) == 0:
                frac[j] = 0.0
                continue
            inside = 0
            for (t0, is_pat) in marks:
                if is_pat:
                    inside += ((sj >= t0) & (sj < t0 + p.segment)).sum()
            frac[j] = inside / len(sj)
        for (t0, is_pat) in marks:
            if is_pat:
                npat += 1
                sel = (spikes[:, 0] >= t0) & (spikes[:, 0] < t0 + p.segment)
                if sel.any():
                    hits += 1
        return frac, hits / max(npat, 1)
