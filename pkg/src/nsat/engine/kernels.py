"""Compiled per-core tick kernels.

Everything here operates on the flat array bundles built by
`engine.state.CoreState` and is shared verbatim by the three execution
paths (sequential, threaded, fused single-core span), which is what makes
their outputs bit-identical.

Time frame conventions:

* A spike detected in stage one of tick t is routed between the barriers
  and processed by destination cores in stage two of tick t + 1 + delay.
* Plasticity treats the *delivery* tick as the pre-synaptic event time;
  the pairing partner is the post neuron's latest detection tick, which
  stage two records only after the learning phase, so same-tick pairs
  never form.
* Randomized-rounding, blank-out and noise draws happen in one fixed
  order (neuron id, then component; delivery order, then table row), so
  replay only depends on (config, seeds, external events).

The per-synapse loops are written flat (no helper calls): the engine
visits every fanout entry of every delivered event, and call overhead
there dominated early profiles by an order of magnitude.  The standalone
operator functions (`kernel_causal`, `kernel_acausal`, `eligibility`)
express the same arithmetic in readable form for tests and tooling.
"""

import numpy as np
from numba import njit

from ..fxp import OFF, sat16, clip, diamond, coupling_term
from ..rng import stream_normal

NEVER = -(1 << 62)
NOEXP = (1 << 62)

# counter indices
C_EMITTED = 0
C_DELIVERED = 1
C_SYNOPS = 2
C_SPIKES = 3
C_UPD_ATT = 4
C_UPD_APP = 5
N_COUNTERS = 6

_PCG_MULT = np.uint64(6364136223846793005)
_LFSR_TAPS = np.uint64(0x50000080001)
_CASR_MASK = np.uint64((1 << 37) - 1)
_CASR_150 = np.uint64(1 << 27)


@njit(cache=True, nogil=True, inline="always")
def _draw_u32(rk, rw):
    """One uniform step of either backend; flat twin of rng.stream_next."""
    if rk == 0:
        old = rw[0]
        rw[0] = old * _PCG_MULT + rw[1]
        xs = np.uint32(((old >> np.uint64(18)) ^ old) >> np.uint64(27))
        rot = np.uint32(old >> np.uint64(59))
        return np.uint32((xs >> rot) | (xs << ((np.uint32(32) - rot) & np.uint32(31))))
    lfsr = rw[0]
    v = lfsr & _LFSR_TAPS
    v ^= v >> np.uint64(32)
    v ^= v >> np.uint64(16)
    v ^= v >> np.uint64(8)
    v ^= v >> np.uint64(4)
    v ^= v >> np.uint64(2)
    v ^= v >> np.uint64(1)
    lfsr = (lfsr >> np.uint64(1)) | ((v & np.uint64(1)) << np.uint64(42))
    rw[0] = lfsr
    casr = rw[1]
    casr = ((casr >> np.uint64(1)) ^ ((casr << np.uint64(1)) & _CASR_MASK)) ^ (casr & _CASR_150)
    rw[1] = casr
    return np.uint32((lfsr ^ casr) & np.uint64(0xFFFFFFFF))


@njit(cache=True)
def learn_gate(t, enabled, period, lo, hi):
    if enabled == 0:
        return False
    if period <= 0:
        return True
    ph = t % period
    return lo <= ph < hi


@njit(cache=True, nogil=True)
def stage1(x, ref, pg, k_of, gA, gsA, gb, gsig, gtheta, gXreset, gXlo, gXhi,
           gspike, gadapt, rk, rw, scr, spk):
    """Integrate, clamp refractory neurons, detect spikes.

    Returns the number of spiking neurons; their ids are in spk[:n],
    ascending.  Synaptic input is NOT accumulated here (stage two).
    """
    n = x.shape[0]
    ns = 0
    for i in range(n):
        g = pg[i]
        k = k_of[g]
        for c in range(k):
            acc = 0
            for j in range(k):
                a = gA[g, c, j]
                if a != OFF:
                    acc = sat16(acc + coupling_term(a, gsA[g, c, j], x[i, j]))
            scr[c] = acc
        for c in range(k):
            v = x[i, c] + scr[c] + gb[g, c]
            if gsig[g, c] != OFF:
                v += stream_normal(rk, rw, gsig[g, c])
            v = sat16(v)
            x[i, c] = clip(v, gXlo[g, c], gXhi[g, c])
        if ref[i] > 0:
            ref[i] -= 1
            x[i, 0] = gXreset[g, 0]
            continue
        if gspike[g] != 0:
            if gadapt[g] != 0:
                fire = x[i, 0] >= x[i, 1]
            else:
                fire = x[i, 0] >= gtheta[g, 0]
            if fire:
                spk[ns] = i
                ns += 1
    return ns


@njit(cache=True)
def kernel_causal(dt, tca0, tca1, h0, h1, h2, s0, s1, s2, slope, expmode, win):
    """(sign, level, live) of the causal kernel at dt > 0 (reference form)."""
    if dt <= 0 or dt > win:
        return 1, 0, False
    if dt <= tca0:
        seg = 0
    elif dt <= tca1:
        seg = 1
    else:
        seg = 2
    level = h0 if seg == 0 else (h1 if seg == 1 else h2)
    if expmode != 0:
        level = level - (dt >> slope)
    if level <= OFF:
        return 1, 0, False
    sign = s0 if seg == 0 else (s1 if seg == 1 else s2)
    return sign, level, True


@njit(cache=True)
def kernel_acausal(dt, tac0, tac1, h0, h1, h2, s0, s1, s2, slope, expmode, win):
    """(sign, level, live) of the acausal kernel at dt < 0 (reference form)."""
    adt = -dt
    if dt >= 0 or adt > win:
        return 1, 0, False
    if dt >= tac0:
        seg = 0
    elif dt >= tac1:
        seg = 1
    else:
        seg = 2
    level = h0 if seg == 0 else (h1 if seg == 1 else h2)
    if expmode != 0:
        level = level - (adt >> slope)
    if level <= OFF:
        return 1, 0, False
    sign = s0 if seg == 0 else (s1 if seg == 1 else s2)
    return sign, level, True


@njit(cache=True)
def eligibility(sign, level, xm):
    """Modulated eligibility: sign * (level <> x_m)."""
    return sign * diamond(level, xm)


@njit(cache=True, nogil=True)
def _sort_slot(slot, nslot, keys, order):
    """Insertion-sort delivery order by (src core, src id, insertion)."""
    for e in range(nslot):
        keys[e] = (slot[e, 0] << 48) | (slot[e, 1] << 24) | slot[e, 2]
        order[e] = e
    for i in range(1, nslot):
        k = keys[i]
        o = order[i]
        j = i - 1
        while j >= 0 and keys[j] > k:
            keys[j + 1] = keys[j]
            order[j + 1] = order[j]
            j -= 1
        keys[j + 1] = k
        order[j + 1] = o


@njit(cache=True, nogil=True)
def _sort_bucket(buf, n):
    for i in range(1, n):
        v = buf[i]
        j = i - 1
        while j >= 0 and buf[j] > v:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = v


@njit(cache=True, nogil=True)
def _learn_row(entry, t, causal, x, pg, gmod, lg_of,
               ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
               lmode, lwin, lplastic, lrr, lwmin, lwmax, lgen, lgc, lglo, lghi,
               srow, sdst, scomp, swidx, splast, wpool,
               last_spike, t_prev, rk, rw, counters):
    """One plastic pass over a source row, flattened.

    causal != 0 pairs each post's last spike against the previous pre
    event (expiry/re-spike path, positive dt); otherwise against this
    delivery at t (acausal path, negative dt).
    """
    t0 = t_prev[entry]
    if causal != 0 and t0 == NEVER:
        return
    for s in range(srow[entry], srow[entry + 1]):
        if splast[s] == 0:
            continue
        j = sdst[s]
        L = lg_of[j]
        if lplastic[L, scomp[s]] == 0:
            continue
        if causal != 0:
            dt = last_spike[j] - t0
            if dt <= 0 or dt > lwin[L]:
                continue
            if dt <= ltca[L, 0]:
                seg = 0
            elif dt <= ltca[L, 1]:
                seg = 1
            else:
                seg = 2
            level = lhica[L, seg]
            if lmode[L] != 0:
                level = level - (dt >> lslca[L])
            sign = lsica[L, seg]
        else:
            dt = last_spike[j] - t
            adt = -dt
            if dt >= 0 or adt > lwin[L]:
                continue
            if dt >= ltac[L, 0]:
                seg = 0
            elif dt >= ltac[L, 1]:
                seg = 1
            else:
                seg = 2
            level = lhiac[L, seg]
            if lmode[L] != 0:
                level = level - (adt >> lslac[L])
            sign = lsiac[L, seg]
        if level <= OFF:
            continue
        xm = x[j, gmod[pg[j]]]
        if level >= 0:
            eps = sat16(xm << level)
        elif xm >= 0:
            eps = xm >> (-level)
        else:
            eps = -((-xm) >> (-level))
        eps = sign * eps
        if eps == 0:
            continue
        if lgen[L] != 0:
            gv = x[j, lgc[L]]
            if gv < lglo[L] or gv > lghi[L]:
                continue
        counters[C_UPD_ATT] += 1
        r = lrr[L]
        dwv = eps
        if r > 0:
            mask = (1 << r) - 1
            dwv = eps >> r
            p = eps & mask
            if p != 0:
                if (np.int64(_draw_u32(rk, rw)) & mask) < p:
                    dwv += 1
        if dwv != 0:
            wi = swidx[s]
            nw = clip(wpool[wi] + dwv, lwmin[L], lwmax[L])
            if nw != wpool[wi]:
                counters[C_UPD_APP] += 1
                wpool[wi] = nw


@njit(cache=True, nogil=True)
def stage2(x, ref, pg, k_of, gprob, gWgain, gXlo, gXhi, gXreset, gXresetOn,
           gXincr, gmod, greset, greflen,
           lg_of, ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
           lmode, lwin, lplastic, lrr, lwmin, lwmax, lgen, lgc, lglo, lghi,
           srow, sdst, scomp, swidx, splast, wpool, row_plastic, W_row,
           last_spike, t_prev, timer_exp, eb, eb_n,
           slot, nslot, keys, order, t, learn_on, rk, rw, counters, spk, ns):
    """Deliver events, run plasticity, apply post-spike resets.

    `slot` rows are (src_core, src_id, insertion, entry); they are sorted
    here by that key so the outcome is independent of arrival order.
    Timer and last-pre bookkeeping advance whether or not the learning
    gate is open; only weight updates are gated.
    """
    _sort_slot(slot, nslot, keys, order)

    # ---- accumulation -------------------------------------------------
    for e in range(nslot):
        entry = slot[order[e], 3]
        for s in range(srow[entry], srow[entry + 1]):
            counters[C_SYNOPS] += 1
            dst = sdst[s]
            c = scomp[s]
            g = pg[dst]
            pr = gprob[g, c]
            keep = True
            if pr < 15:
                keep = np.int64((_draw_u32(rk, rw) >> np.uint32(28)) & np.uint32(0xF)) <= pr
            if keep:
                v = sat16(x[dst, c] + diamond(gWgain[g, c], wpool[swidx[s]]))
                x[dst, c] = clip(v, gXlo[g, c], gXhi[g, c])
        counters[C_DELIVERED] += 1

    # ---- plasticity: causal (expiries), then pre-event passes ---------
    nbslots = eb.shape[0]
    b = t % nbslots
    nb = eb_n[b]
    if nb > 0:
        _sort_bucket(eb[b], nb)
        for e in range(nb):
            entry = eb[b, e]
            if timer_exp[entry] != t:
                continue  # stale: restarted since this bucket entry
            if learn_on:
                _learn_row(entry, t, 1, x, pg, gmod, lg_of,
                           ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
                           lmode, lwin, lplastic, lrr, lwmin, lwmax,
                           lgen, lgc, lglo, lghi,
                           srow, sdst, scomp, swidx, splast, wpool,
                           last_spike, t_prev, rk, rw, counters)
            timer_exp[entry] = NOEXP
        eb_n[b] = 0

    for e in range(nslot):
        entry = slot[order[e], 3]
        if row_plastic[entry] == 0:
            continue
        if learn_on:
            if timer_exp[entry] != NOEXP:
                _learn_row(entry, t, 1, x, pg, gmod, lg_of,
                           ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
                           lmode, lwin, lplastic, lrr, lwmin, lwmax,
                           lgen, lgc, lglo, lghi,
                           srow, sdst, scomp, swidx, splast, wpool,
                           last_spike, t_prev, rk, rw, counters)
            _learn_row(entry, t, 0, x, pg, gmod, lg_of,
                       ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
                       lmode, lwin, lplastic, lrr, lwmin, lwmax,
                       lgen, lgc, lglo, lghi,
                       srow, sdst, scomp, swidx, splast, wpool,
                       last_spike, t_prev, rk, rw, counters)
        t_prev[entry] = t
        if W_row[entry] > 0:
            exp = t + W_row[entry]
            timer_exp[entry] = exp
            bs = exp % nbslots
            eb[bs, eb_n[bs]] = entry
            eb_n[bs] += 1

    # ---- post-spike resets / increments / refractory -------------------
    for si in range(ns):
        i = spk[si]
        g = pg[i]
        if greset[g] != 0:
            k = k_of[g]
            for c in range(k):
                if gXresetOn[g, c] != 0:
                    x[i, c] = gXreset[g, c]
                else:
                    v = sat16(x[i, c] + gXincr[g, c])
                    x[i, c] = clip(v, gXlo[g, c], gXhi[g, c])
            ref[i] = greflen[g]
        last_spike[i] = t
    counters[C_SPIKES] += ns


@njit(cache=True, nogil=True)
def route_self(spk, ns, arow, aentry, adelay, rb, rb_n, t, core_id, counters):
    """Route one core's stage-one spikes into its own ring (fused path)."""
    nslots = rb.shape[0]
    for si in range(ns):
        i = spk[si]
        for a in range(arow[i], arow[i + 1]):
            slot = (t + 1 + adelay[a]) % nslots
            n = rb_n[slot]
            rb[slot, n, 0] = core_id
            rb[slot, n, 1] = i
            rb[slot, n, 2] = n
            rb[slot, n, 3] = aentry[a]
            rb_n[slot] = n + 1
            counters[C_EMITTED] += 1


@njit(cache=True, nogil=True)
def run_span(x, ref, pg, k_of, gA, gsA, gb, gsig, gtheta, gXreset, gXresetOn,
             gXincr, gXlo, gXhi, gWgain, gprob, gmod, gspike, gadapt, greset, greflen,
             lg_of, ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
             lmode, lwin, lplastic, lrr, lwmin, lwmax, lgen, lgc, lglo, lghi,
             srow, sdst, scomp, swidx, splast, wpool, row_plastic, W_row,
             last_spike, t_prev, timer_exp, eb, eb_n,
             arow, aentry, adelay, rb, rb_n, keys, order, scr, spk,
             t0, nticks, inj_t, inj_entry, inj_ptr,
             learn_enabled, gate_period, gate_lo, gate_hi,
             rk, rw, counters, core_id,
             spike_buf, spike_n,
             trace_every, trace_ids, trace_buf, trace_n):
    """Single-core fused loop over nticks (the fast path for training runs).

    Injections are (delivery_tick, entry) pairs sorted by tick; inj_ptr is
    advanced in place so consecutive spans resume seamlessly.  Produces
    results identical to running stage1/route/stage2 tick by tick.
    """
    nslots = rb.shape[0]
    for step in range(nticks):
        t = t0 + step
        ns = stage1(x, ref, pg, k_of, gA, gsA, gb, gsig, gtheta, gXreset,
                    gXlo, gXhi, gspike, gadapt, rk, rw, scr, spk)
        for si in range(ns):
            spike_buf[spike_n[0], 0] = t
            spike_buf[spike_n[0], 1] = spk[si]
            spike_n[0] += 1
        route_self(spk, ns, arow, aentry, adelay, rb, rb_n, t, core_id, counters)
        while inj_ptr[0] < inj_t.shape[0] and inj_t[inj_ptr[0]] == t:
            slot = t % nslots
            n = rb_n[slot]
            rb[slot, n, 0] = core_id
            rb[slot, n, 1] = inj_entry[inj_ptr[0]]
            rb[slot, n, 2] = n
            rb[slot, n, 3] = inj_entry[inj_ptr[0]]
            rb_n[slot] = n + 1
            counters[C_EMITTED] += 1
            inj_ptr[0] += 1
        slot = t % nslots
        learn_on = learn_gate(t, learn_enabled, gate_period, gate_lo, gate_hi)
        stage2(x, ref, pg, k_of, gprob, gWgain, gXlo, gXhi, gXreset, gXresetOn,
               gXincr, gmod, greset, greflen,
               lg_of, ltca, lhica, lsica, lslca, ltac, lhiac, lsiac, lslac,
               lmode, lwin, lplastic, lrr, lwmin, lwmax, lgen, lgc, lglo, lghi,
               srow, sdst, scomp, swidx, splast, wpool, row_plastic, W_row,
               last_spike, t_prev, timer_exp, eb, eb_n,
               rb[slot], rb_n[slot], keys, order, t, learn_on, rk, rw, counters, spk, ns)
        rb_n[slot] = 0
        if trace_every > 0 and (t % trace_every) == 0:
            for ti in range(trace_ids.shape[0]):
                for c in range(x.shape[1]):
                    trace_buf[trace_n[0], ti, c] = x[trace_ids[ti], c]
            trace_n[0] += 1
