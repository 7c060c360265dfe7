"""Multi-core lockstep scheduler and event router.

A tick runs in two stages.  Stage one integrates every core's neurons
and detects spikes.  Between the two rendezvous points the router moves
the detected spike addresses (plus any external injections due) into the
destination cores' ring buffers.  Stage two delivers the events due this
tick, runs plasticity and applies post-spike resets.  A spike emitted at
tick t is processed by its targets at t + 1 + axon delay.

Three execution modes share the identical compiled kernels and therefore
produce byte-identical outputs:

* ``run(threads=1)``  -- cores advanced round-robin on one thread,
* ``run(threads=N)``  -- one Python thread per core slice with two
  barriers per tick; the router always runs on a single thread,
* ``span(...)``       -- fused compiled loop, single-core configs only,
  used by the training harnesses for long runs.
"""

import threading
from dataclasses import dataclass, field

import numpy as np

from ..params import ConfigError
from ..rng import RngStream
from .state import CoreState
from . import kernels
from .kernels import (
    stage1, stage2, run_span,
    C_EMITTED, C_DELIVERED, C_SYNOPS, C_SPIKES, C_UPD_ATT, C_UPD_APP,
)

SPIKE_DTYPE = np.dtype([("tick", "<u4"), ("core", "<u2"), ("neuron", "<u4"), ("delay", "<u2")])


@dataclass
class RunResult:
    spikes: np.ndarray = None
    counters: dict = field(default_factory=dict)
    states: dict = field(default_factory=dict)           # monitor index -> (ticks, arrays)
    weights: dict = field(default_factory=dict)
    final_tick: int = 0


class Fabric:
    def __init__(self, config):
        config.validate()
        self.cfg = config
        self.cores = [CoreState(i, spec, config) for i, spec in enumerate(config.cores)]
        backend = 0 if config.rng_backend == "software" else 1
        for c, core in enumerate(self.cores):
            stream = RngStream(backend, config.seed, sequence=c)
            core.rng_kind = stream.backend
            core.rng_words = stream.words
            core.set_nslots(config.max_delay)
        self.t = 0
        self._inj = [[] for _ in self.cores]             # (delivery, order, entry)
        self._inj_arrays = None
        self._axons_in = self._count_axons_in()
        self._prepared = False

    def _count_axons_in(self):
        counts = [0] * len(self.cores)
        for core in self.cores:
            for c in core.acore:
                counts[int(c)] += 1
        return counts

    # ------------------------------------------------------------------
    def inject_external(self, events):
        """Queue external events; each fires entry `neuron` of core `core`
        at delivery tick `tick + delay`.

        Events must be sorted by tick, target an external entry, and not
        lie in the simulation's past.
        """
        last_tick = -1
        for n, ev in enumerate(events):
            tick, core, neuron, delay = ev
            if core < 0 or core >= len(self.cores):
                raise ConfigError(f"event {n}: unknown core {core}")
            cs = self.cores[core]
            if not (cs.n_int <= neuron < cs.n_tot):
                raise ConfigError(
                    f"event {n}: neuron {neuron} on core {core} is not an external input entry"
                )
            if tick < last_tick:
                raise ConfigError(f"event {n}: ticks not sorted ({tick} after {last_tick})")
            if tick < self.t:
                raise ConfigError(f"event {n}: tick {tick} is in the past (now {self.t})")
            if delay < 0:
                raise ConfigError(f"event {n}: negative delay")
            last_tick = tick
            self._inj[core].append((tick + delay, len(self._inj[core]), neuron))
        self._inj_arrays = None

    def _inj_per_core(self):
        if self._inj_arrays is None:
            arrays = []
            for lst in self._inj:
                if lst:
                    lst = sorted(lst)
                    t = np.array([e[0] for e in lst], dtype=np.int64)
                    ent = np.array([e[2] for e in lst], dtype=np.int64)
                else:
                    t = np.zeros(0, dtype=np.int64)
                    ent = np.zeros(0, dtype=np.int64)
                arrays.append((t, ent, np.zeros(1, dtype=np.int64)))
            self._inj_arrays = arrays
        return self._inj_arrays

    def _prepare(self):
        if self._prepared:
            return
        inj = self._inj_per_core()
        for c, core in enumerate(self.cores):
            inj_t = inj[c][0]
            max_per_tick = 0
            if len(inj_t):
                _, counts = np.unique(inj_t, return_counts=True)
                max_per_tick = int(counts.max())
            core.alloc_buffers(self._axons_in[c] + max_per_tick + 4)
        self._prepared = True

    def prepare_buffers(self, max_inj_per_tick):
        """Size ring buffers for span-supplied injections.

        Rings carry in-flight events across spans, so capacity can only
        be fixed up front: growing it later would drop them.
        """
        need = self._axons_in[0] + max_inj_per_tick + 4
        core = self.cores[0]
        if core.rb is None:
            core.alloc_buffers(need)
            self._prepared = True
        elif core.rb.shape[1] < need:
            if int(core.rb_n.sum()) == 0 and self.t == 0:
                core.alloc_buffers(need)
            else:
                raise ConfigError(
                    "ring capacity too small for this span's injections; "
                    "call prepare_buffers with the run's peak rate before starting"
                )

    # ------------------------------------------------------------------
    def _learn_on(self, t):
        g = self.cfg.gate
        return kernels.learn_gate(t, int(self.cfg.learning_enabled), g.period, g.lo, g.hi)

    def _route(self, t, spike_counts):
        """Move stage-one spikes and due injections into ring buffers."""
        inj = self._inj_per_core()
        for c, core in enumerate(self.cores):
            inj_t, inj_e, ptr = inj[c]
            while ptr[0] < len(inj_t) and inj_t[ptr[0]] == t:
                slot = t % core._nslots
                n = core.rb_n[slot]
                core.rb[slot, n] = (c, inj_e[ptr[0]], n, inj_e[ptr[0]])
                core.rb_n[slot] = n + 1
                core.counters[C_EMITTED] += 1
                ptr[0] += 1
            if len(inj_t) and ptr[0] < len(inj_t) and inj_t[ptr[0]] < t:
                raise ConfigError("injected event missed its delivery tick")
        for c, core in enumerate(self.cores):
            ns = spike_counts[c]
            for si in range(ns):
                i = core.spk[si]
                for a in range(core.arow[i], core.arow[i + 1]):
                    dc = int(core.acore[a])
                    dst = self.cores[dc]
                    slot = (t + 1 + core.adelay[a]) % dst._nslots
                    n = dst.rb_n[slot]
                    dst.rb[slot, n] = (c, i, n, core.aentry[a])
                    dst.rb_n[slot] = n + 1
                    dst.counters[C_EMITTED] += 1

    def _stage2_core(self, core, t, learn_on):
        slot = t % core._nslots
        ns = core._last_ns
        stage2(*core.stage2_args(),
               core.rb[slot], core.rb_n[slot], core.keys, core.order, t,
               learn_on, core.rng_kind, core.rng_words, core.counters,
               core.spk, ns)
        core.rb_n[slot] = 0

    def buffered_events(self):
        return int(sum(int(core.rb_n.sum()) for core in self.cores))

    # ------------------------------------------------------------------
    def run(self, ticks=None, threads=1, collect_spikes=True):
        """Advance the whole fabric `ticks` ticks (default: config value)."""
        self._prepare()
        ticks = self.cfg.ticks if ticks is None else ticks
        t_end = self.t + ticks
        monitors = self.cfg.monitors
        spike_log = [[] for _ in self.cores]
        state_log = {m: ([], []) for m, mon in enumerate(monitors) if mon.what == "states"}
        weight_log = {m: ([], []) for m, mon in enumerate(monitors) if mon.what == "weights"}

        def monitor_core(c, core, t):
            for m, mon in enumerate(monitors):
                if mon.core != c or t % mon.cadence:
                    continue
                if mon.what == "states":
                    ids = mon.neurons if mon.neurons else range(core.n_int)
                    comps = mon.components if mon.components else range(core.K)
                    snap = core.x[np.asarray(list(ids))][:, np.asarray(list(comps))].copy()
                    state_log[m][0].append(t)
                    state_log[m][1].append(snap)
                elif mon.what == "weights":
                    weight_log[m][0].append(t)
                    weight_log[m][1].append(core.weights_by_spec_order())

        threads = max(1, min(threads, len(self.cores)))
        if threads == 1:
            for t in range(self.t, t_end):
                counts = []
                for core in self.cores:
                    ns = stage1(*core.stage1_args(), core.rng_kind, core.rng_words,
                                core.scr, core.spk)
                    core._last_ns = ns
                    counts.append(ns)
                self._route(t, counts)
                learn_on = self._learn_on(t)
                for c, core in enumerate(self.cores):
                    self._stage2_core(core, t, learn_on)
                    if collect_spikes and core._last_ns:
                        spike_log[c].append((t, core.spk[:core._last_ns].copy()))
                    monitor_core(c, core, t)
        else:
            barrier = threading.Barrier(threads)
            errors = []

            def worker(tid):
                try:
                    my = list(range(tid, len(self.cores), threads))
                    for t in range(self.t, t_end):
                        for c in my:
                            core = self.cores[c]
                            core._last_ns = stage1(*core.stage1_args(), core.rng_kind,
                                                   core.rng_words, core.scr, core.spk)
                        barrier.wait()
                        if tid == 0:
                            self._route(t, [core._last_ns for core in self.cores])
                        barrier.wait()
                        learn_on = self._learn_on(t)
                        for c in my:
                            core = self.cores[c]
                            self._stage2_core(core, t, learn_on)
                            if collect_spikes and core._last_ns:
                                spike_log[c].append((t, core.spk[:core._last_ns].copy()))
                            monitor_core(c, core, t)
                except Exception as exc:  # pragma: no cover - surfaced below
                    errors.append(exc)
                    try:
                        barrier.abort()
                    except Exception:
                        pass

            ts = [threading.Thread(target=worker, args=(tid,)) for tid in range(threads)]
            for th in ts:
                th.start()
            for th in ts:
                th.join()
            if errors:
                raise errors[0]

        self.t = t_end
        result = RunResult(final_tick=self.t)
        if collect_spikes:
            recs = []
            for c, log in enumerate(spike_log):
                for t, ids in log:
                    for i in ids:
                        recs.append((t, c, i, 0))
            recs.sort()
            arr = np.zeros(len(recs), dtype=SPIKE_DTYPE)
            for n, r in enumerate(recs):
                arr[n] = r
            result.spikes = arr
        result.counters = self.counters()
        for m, (ticks_l, snaps) in state_log.items():
            result.states[m] = (np.array(ticks_l), np.array(snaps))
        for m, (ticks_l, snaps) in weight_log.items():
            result.weights[m] = (np.array(ticks_l), np.array(snaps))
        return result

    # ------------------------------------------------------------------
    def span(self, nticks, inj=None, spike_cap=None, trace_every=0, trace_ids=None):
        """Fused compiled run of `nticks` on a single-core fabric.

        Returns (spikes (n,2) [tick, neuron], trace array or None).
        State persists across spans, so training harnesses can retune
        inputs or inspect weights between calls.  `inj` optionally
        supplies this span's external events as (delivery_ticks,
        entries) arrays sorted by tick, bypassing the fabric-level
        queue; all of them must fall inside the span.
        """
        if len(self.cores) != 1:
            raise ConfigError("fused spans support single-core configurations only")
        core = self.cores[0]
        if inj is not None:
            inj_t = np.ascontiguousarray(inj[0], dtype=np.int64)
            inj_e = np.ascontiguousarray(inj[1], dtype=np.int64)
            ptr = np.zeros(1, dtype=np.int64)
            if len(inj_t):
                if inj_t.min() < self.t or inj_t.max() >= self.t + nticks:
                    raise ConfigError("span injections must fall inside the span")
                max_per_tick = int(np.unique(inj_t, return_counts=True)[1].max())
            else:
                max_per_tick = 0
            self.prepare_buffers(max_inj_per_tick=max_per_tick)
        else:
            self._prepare()
            inj_t, inj_e, ptr = self._inj_per_core()[0]
        if np.any(core.acore != 0):
            raise ConfigError("fused spans require all axons to stay on core 0")
        cap = spike_cap if spike_cap else nticks * max(core.n_int, 1) + 1
        spike_buf = np.empty((cap, 2), dtype=np.int64)
        spike_n = np.zeros(1, dtype=np.int64)
        if trace_every > 0:
            tids = np.asarray(trace_ids, dtype=np.int64)
            tcap = nticks // trace_every + 2
            trace_buf = np.zeros((tcap, len(tids), core.K), dtype=np.int64)
        else:
            tids = np.zeros(1, dtype=np.int64)
            trace_buf = np.zeros((1, 1, core.K), dtype=np.int64)
        trace_n = np.zeros(1, dtype=np.int64)
        g = self.cfg.gate
        run_span(core.x, core.ref, core.pg, core.k_of, core.gA, core.gsA, core.gb,
                 core.gsig, core.gtheta, core.gXreset, core.gXresetOn, core.gXincr,
                 core.gXlo, core.gXhi, core.gWgain, core.gprob, core.gmod,
                 core.gspike, core.gadapt, core.greset, core.greflen,
                 core.lg_of, core.ltca, core.lhica, core.lsica, core.lslca,
                 core.ltac, core.lhiac, core.lsiac, core.lslac,
                 core.lmode, core.lwin, core.lplastic, core.lrr, core.lwmin,
                 core.lwmax, core.lgen, core.lgc, core.lglo, core.lghi,
                 core.srow, core.sdst, core.scomp, core.swidx, core.splast,
                 core.wpool, core.row_plastic, core.W_row,
                 core.last_spike, core.t_prev, core.timer_exp, core.eb, core.eb_n,
                 core.arow, core.aentry, core.adelay, core.rb, core.rb_n,
                 core.keys, core.order, core.scr, core.spk,
                 self.t, nticks, inj_t, inj_e, ptr,
                 int(self.cfg.learning_enabled), g.period, g.lo, g.hi,
                 core.rng_kind, core.rng_words, core.counters, 0,
                 spike_buf, spike_n,
                 trace_every, tids, trace_buf, trace_n)
        self.t += nticks
        spikes = spike_buf[:spike_n[0]].copy()
        trace = trace_buf[:trace_n[0]].copy() if trace_every > 0 else None
        return spikes, trace

    # ------------------------------------------------------------------
    def counters(self):
        keys = ("emitted", "delivered", "synops", "spikes", "weight_updates", "weight_writes")
        idx = (C_EMITTED, C_DELIVERED, C_SYNOPS, C_SPIKES, C_UPD_ATT, C_UPD_APP)
        per_core = []
        for core in self.cores:
            per_core.append({k: int(core.counters[i]) for k, i in zip(keys, idx)})
        total = {k: sum(pc[k] for pc in per_core) for k in keys}
        total["buffered"] = self.buffered_events()
        return {"total": total, "per_core": per_core}


def spikes_to_records(spikes_2col, core=0):
    """(tick, neuron) pairs from a fused span -> spike record array."""
    arr = np.zeros(len(spikes_2col), dtype=SPIKE_DTYPE)
    arr["tick"] = spikes_2col[:, 0]
    arr["core"] = core
    arr["neuron"] = spikes_2col[:, 1]
    return arr
