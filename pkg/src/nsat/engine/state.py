"""Flattening of a validated CoreSpec into the kernel array bundle."""

import numpy as np

from ..fxp import OFF, XMIN, XMAX
from ..params import ConfigError, default_axons
from .kernels import NEVER, NOEXP, N_COUNTERS


def _i64(shape, fill=0):
    a = np.full(shape, fill, dtype=np.int64)
    return a


class CoreState:
    """One core's neurons, tables and scratch buffers in kernel layout.

    Neuron ids [0, n_int) are internal; [n_int, n_tot) are external
    entries.  The synapse table is CSR over all n_tot source entries in
    declaration order within each row.  Tied synapses resolve to one
    shared slot in the weight pool.
    """

    def __init__(self, core_id, spec, config):
        self.core_id = core_id
        self.spec = spec
        self.n_int = spec.n_internal
        self.n_ext = spec.n_external
        self.n_tot = spec.n_total

        groups = spec.groups
        G = len(groups)
        K = max(g.k for g in groups)
        self.K = K

        self.k_of = _i64(G)
        self.gA = _i64((G, K, K), OFF)
        self.gsA = _i64((G, K, K), 1)
        self.gb = _i64((G, K))
        self.gsig = _i64((G, K), OFF)
        self.gprob = _i64((G, K), 15)
        self.gtheta = _i64((G, K), XMAX)
        self.gXreset = _i64((G, K))
        self.gXresetOn = _i64((G, K))
        self.gXincr = _i64((G, K))
        self.gXlo = _i64((G, K), XMIN)
        self.gXhi = _i64((G, K), XMAX)
        self.gXinit = _i64((G, K))
        self.gWgain = _i64((G, K))
        self.gmod = _i64(G)
        self.gspike = _i64(G)
        self.gadapt = _i64(G)
        self.greset = _i64(G)
        self.greflen = _i64(G)
        for gi, g in enumerate(groups):
            k = g.k
            self.k_of[gi] = k
            self.gA[gi, :k, :k] = g.A
            self.gsA[gi, :k, :k] = g.sA
            self.gb[gi, :k] = g.b
            self.gsig[gi, :k] = g.sigma
            self.gprob[gi, :k] = g.prob
            self.gtheta[gi, :k] = g.theta
            self.gXreset[gi, :k] = g.Xreset
            self.gXresetOn[gi, :k] = [int(v) for v in g.XresetOn]
            self.gXincr[gi, :k] = g.XspikeIncrVal
            self.gXlo[gi, :k] = g.Xthlo
            self.gXhi[gi, :k] = g.Xthup
            self.gXinit[gi, :k] = g.Xinit
            self.gWgain[gi, :k] = g.Wgain
            self.gmod[gi] = g.modulator
            self.gspike[gi] = int(g.spike_enabled)
            self.gadapt[gi] = int(g.adaptive_theta)
            self.greset[gi] = int(g.reset_enabled)
            self.greflen[gi] = g.refractory

        lgroups = spec.lgroups
        L = max(len(lgroups), 1)
        self.ltca = _i64((L, 2), 1)
        self.lhica = _i64((L, 3), OFF)
        self.lsica = _i64((L, 3), 1)
        self.lslca = _i64(L)
        self.ltac = _i64((L, 2), -1)
        self.lhiac = _i64((L, 3), OFF)
        self.lsiac = _i64((L, 3), 1)
        self.lslac = _i64(L)
        self.lmode = _i64(L)
        self.lwin = _i64(L, 1)
        self.lplastic = _i64((L, K))
        self.lrr = _i64(L)
        self.lwmin = _i64(L, -128)
        self.lwmax = _i64(L, 127)
        self.lgen = _i64(L)
        self.lgc = _i64(L)
        self.lglo = _i64(L, XMIN)
        self.lghi = _i64(L, XMAX)
        for li, lg in enumerate(lgroups):
            self.ltca[li] = lg.tca
            self.lhica[li] = lg.hica
            self.lsica[li] = lg.sica
            self.lslca[li] = lg.slca
            self.ltac[li] = lg.tac
            self.lhiac[li] = lg.hiac
            self.lsiac[li] = lg.siac
            self.lslac[li] = lg.slac
            self.lmode[li] = 0 if lg.mode == "linear" else 1
            self.lwin[li] = lg.window
            pl = lg.plastic
            for c in range(min(len(pl), K)):
                self.lplastic[li, c] = int(pl[c])
            self.lrr[li] = lg.rr_bits
            self.lwmin[li] = lg.wmin
            self.lwmax[li] = lg.wmax
            self.lgen[li] = int(lg.gate_enabled)
            self.lgc[li] = lg.gate_component
            self.lglo[li] = lg.gate_low
            self.lghi[li] = lg.gate_high

        self.pg = _i64(self.n_int)
        self.pg[:] = spec.pgroup_of
        self.lg_of = _i64(self.n_int)
        if spec.lgroup_of:
            self.lg_of[:] = spec.lgroup_of

        # ---- synapse table: CSR by source, declaration order kept ------
        rows = [[] for _ in range(self.n_tot)]
        for idx, syn in enumerate(spec.synapses):
            rows[syn.src].append(idx)
        nS = len(spec.synapses)
        self.srow = _i64(self.n_tot + 1)
        self.sdst = _i64(nS)
        self.scomp = _i64(nS)
        self.splast = _i64(nS)
        order = []
        for src in range(self.n_tot):
            self.srow[src] = len(order)
            order.extend(rows[src])
        self.srow[self.n_tot] = nS
        self.syn_order = np.array(order, dtype=np.int64)  # table row -> spec index
        key_to_row = {}
        for row_i, spec_i in enumerate(order):
            syn = spec.synapses[spec_i]
            self.sdst[row_i] = syn.dst
            self.scomp[row_i] = syn.comp
            self.splast[row_i] = int(syn.plastic)
            key_to_row[(syn.src, syn.dst, syn.comp)] = row_i

        pool_of = list(range(nS))

        def find(i):
            while pool_of[i] != i:
                pool_of[i] = pool_of[pool_of[i]]
                i = pool_of[i]
            return i

        for pa, pb in spec.tied:
            ra, rb_ = key_to_row[tuple(pa)], key_to_row[tuple(pb)]
            wa = spec.synapses[order[ra]].w
            wb = spec.synapses[order[rb_]].w
            if wa != wb:
                raise ConfigError(f"tied synapses {tuple(pa)} and {tuple(pb)} have different initial weights")
            pool_of[find(rb_)] = find(ra)
        dense = {}
        self.swidx = _i64(nS)
        wvals = []
        for row_i in range(nS):
            root = find(row_i)
            if root not in dense:
                dense[root] = len(wvals)
                wvals.append(spec.synapses[order[root]].w)
            self.swidx[row_i] = dense[root]
        self.wpool = np.array(wvals, dtype=np.int64) if wvals else _i64(0)

        # Row bookkeeping: row_plastic flags rows with any live plastic
        # fanout (those run acausal passes on delivery); W_row is the
        # causal timer window -- the longest window among causal-live
        # post kernels, 0 when no expiry pass could ever update anything.
        self.row_plastic = _i64(self.n_tot)
        self.W_row = _i64(self.n_tot)
        causal_live = [lg.causal_live for lg in lgroups] or [False]
        for src in range(self.n_tot):
            wmax = 0
            any_plastic = 0
            for row_i in range(self.srow[src], self.srow[src + 1]):
                if not self.splast[row_i]:
                    continue
                dst = self.sdst[row_i]
                L = self.lg_of[dst]
                if self.lplastic[L, self.scomp[row_i]]:
                    any_plastic = 1
                    if causal_live[L]:
                        wmax = max(wmax, int(self.lwin[L]))
            self.row_plastic[src] = any_plastic
            self.W_row[src] = wmax

        # ---- axons ------------------------------------------------------
        axons = spec.axons if spec.axons else default_axons(core_id, spec)
        by_src = [[] for _ in range(self.n_int)]
        for ax in axons:
            by_src[ax.src].append(ax)
        self.arow = _i64(self.n_int + 1)
        n_ax = len(axons)
        self.acore = _i64(n_ax)
        self.aentry = _i64(n_ax)
        self.adelay = _i64(n_ax)
        pos = 0
        for src in range(self.n_int):
            self.arow[src] = pos
            for ax in by_src[src]:
                self.acore[pos] = ax.dst_core
                self.aentry[pos] = ax.dst_entry
                self.adelay[pos] = ax.delay
                pos += 1
        self.arow[self.n_int] = pos

        # ---- mutable state ----------------------------------------------
        self.x = _i64((max(self.n_int, 1), K))
        for i in range(self.n_int):
            self.x[i] = self.gXinit[self.pg[i]]
        self.ref = _i64(self.n_int)
        self.last_spike = _i64(self.n_tot, NEVER)
        self.t_prev = _i64(self.n_tot, NEVER)
        self.timer_exp = _i64(self.n_tot, NOEXP)
        self.counters = _i64(N_COUNTERS)
        self.scr = _i64(16)
        self.spk = _i64(max(self.n_int, 1))

        maxw = int(self.W_row.max()) if self.n_tot else 0
        self.ebslots = max(maxw, 1) + 2
        self.rb = None  # sized by the fabric once injection load is known
        self.rb_n = None
        self.eb = None
        self.eb_n = None
        self.keys = None
        self.rng_kind = 0
        self.rng_words = np.zeros(2, dtype=np.uint64)

    def alloc_buffers(self, rb_cap):
        rb_cap = max(int(rb_cap), 1)
        nslots = self._nslots
        self.rb = _i64((nslots, rb_cap, 4))
        self.rb_n = _i64(nslots)
        self.eb = _i64((self.ebslots, rb_cap))
        self.eb_n = _i64(self.ebslots)
        self.keys = _i64(rb_cap)
        self.order = _i64(rb_cap)

    def set_nslots(self, max_delay):
        self._nslots = max_delay + 2

    def weights_by_table_row(self):
        """Current weights as one int8 value per synapse table row."""
        return self.wpool[self.swidx].astype(np.int8)

    def weights_by_spec_order(self):
        """Current weights aligned with the config's synapse declaration order."""
        out = np.zeros(len(self.syn_order), dtype=np.int8)
        out[self.syn_order] = self.weights_by_table_row()
        return out

    def stage1_args(self):
        return (self.x, self.ref, self.pg, self.k_of, self.gA, self.gsA, self.gb,
                self.gsig, self.gtheta, self.gXreset, self.gXlo, self.gXhi,
                self.gspike, self.gadapt)

    def stage2_args(self):
        return (self.x, self.ref, self.pg, self.k_of, self.gprob, self.gWgain,
                self.gXlo, self.gXhi, self.gXreset, self.gXresetOn, self.gXincr,
                self.gmod, self.greset, self.greflen,
                self.lg_of, self.ltca, self.lhica, self.lsica, self.lslca,
                self.ltac, self.lhiac, self.lsiac, self.lslac,
                self.lmode, self.lwin, self.lplastic, self.lrr, self.lwmin,
                self.lwmax, self.lgen, self.lgc, self.lglo, self.lghi,
                self.srow, self.sdst, self.scomp, self.swidx, self.splast,
                self.wpool, self.row_plastic, self.W_row,
                self.last_spike, self.t_prev, self.timer_exp, self.eb, self.eb_n)
