"""Event-driven restricted Boltzmann machine on bars-and-stripes.

18 visible units (16 pixels of a 4x4 grid + 2 orientation units) and 100
hidden units, all-to-all with *shared* symmetric weights: the v->h and
h->v table entries of a pair resolve to one weight-pool slot, so
symmetry holds exactly at every step by construction.

Four components per unit: x0 membrane (strongly saturating couplings
from the two current channels), x1 recurrent synaptic current whose
events keep with probability 1/2 -- the blank-out draw IS the sampling
noise of this machine -- x2 the contrastive phase modulator clipped to
[-1, 1] and driven by two always-on phase ports, x3 the data-drive
current fed by per-pattern port weights (a scaled, bounded logit of the
pixel value).

One presentation runs drive-on/modulator +1 (clamped phase) then
drive-off/modulator -1 (free-running phase).  The modulator flip *lags*
the drive flip by the pairing window so that expiry-time causal updates
carry the sign of the phase their pairs formed in.  Refractory must
exceed the pairing window (each unit pairs at most one spike per
window), which is also what makes the shared-slot updates coherent.

The two orientation units carry fixed mutual inhibition: during
training they are clamped like pixels, and at classification time the
pair behaves as a winner-take-all so spike counts report the model's
orientation belief with usable contrast.
"""

from dataclasses import dataclass

import numpy as np

from ..fxp import OFF
from ..params import (ParamGroup, LearningGroup, Synapse, CoreSpec,
                      SimulationConfig, ConfigError)
from ..engine.fabric import Fabric
from .common import transpose

N_VIS = 18
N_PIX = 16


@dataclass
class ErbmParams:
    hidden: int = 100
    theta_v: int = 14000
    theta_h: int = 14000
    refractory: int = 37
    data_ticks: int = 400
    mod_lag: int = 40             # modulator trails the drive by >= window
    test_ticks: int = 400
    test_trials: int = 6
    test_blank: int = 80
    w_on: int = 12                # data-port weight for a lit pixel
    w_off: int = -24
    w_wta: int = 100              # fixed mutual inhibition of the class pair
    init_hi: int = 10             # shared weights start uniform in [0, init_hi]
    wmax: int = 48
    sigma_v0: int = 10            # membrane dither
    rr_bits: int = 3
    seed: int = 5


_A_PRINTED = [
    [-3, OFF, OFF, OFF],
    [8, -5, OFF, OFF],
    [OFF, OFF, OFF, OFF],
    [8, OFF, OFF, -5],
]
_S_PRINTED = [
    [-1, 1, 1, 1],
    [1, -1, 1, 1],
    [1, 1, -1, 1],
    [1, 1, 1, -1],
]


def bars_and_stripes():
    """All 32 labeled patterns: (16 pixel values in {0,1}, orientation).

    The all-off and all-on grids appear under both labels, so two test
    errors are irreducible for any pixel-only classifier.
    """
    pats = []
    for orient in (0, 1):          # 0 = bars (columns), 1 = stripes (rows)
        for bits in range(16):
            grid = np.zeros((4, 4), dtype=np.int64)
            for k in range(4):
                if (bits >> k) & 1:
                    if orient == 0:
                        grid[:, k] = 1
                    else:
                        grid[k, :] = 1
            pats.append((grid.reshape(-1), orient))
    return pats


def _unit_group(p, theta, b0):
    return ParamGroup(
        k=4,
        A=transpose(_A_PRINTED),
        sA=transpose(_S_PRINTED),
        b=[b0, 0, 0, 0],
        sigma=[p.sigma_v0, OFF, OFF, OFF],
        prob=[15, 7, 15, 15],
        theta=[theta, 32767, 32767, 32767],
        Xreset=[0, 0, 0, 0],
        XresetOn=[True, False, False, False],
        Xthlo=[-32768, -32768, -1, -32768],
        Xthup=[32767, 32767, 1, 32767],
        Wgain=[2, 1, 0, 0],
        modulator=2,
        refractory=p.refractory,
    )


def _lgroups(p):
    lg_vis = LearningGroup(
        tca=[35, 35], hica=[0, 0, 0], sica=[1, 1, 1],
        tac=[-35, -35], hiac=[0, 0, 0], siac=[1, 1, 1],
        plastic=[False, True, False, False], rr_bits=p.rr_bits,
        wmax=p.wmax)
    lg_hid = LearningGroup(
        tca=[16, 36], hica=[1, 0, -1], sica=[1, 1, 1],
        tac=[-16, -36], hiac=[1, 0, -1], siac=[-1, -1, -1],
        plastic=[False, True, False, False], rr_bits=p.rr_bits,
        wmax=p.wmax)
    return lg_vis, lg_hid


def build_erbm(p=None):
    """Config + layout; rejects refractory <= pairing window."""
    p = p or ErbmParams()
    lg_vis, lg_hid = _lgroups(p)
    win = max(lg_vis.window, lg_hid.window)
    if p.refractory <= win:
        raise ConfigError(
            f"refractory ({p.refractory}) must exceed the pairing window ({win})")
    if p.mod_lag < win:
        raise ConfigError("modulator lag shorter than the pairing window")
    nh = p.hidden
    ids = {
        "visible": (0, N_VIS),
        "hidden": (N_VIS, N_VIS + nh),
        "data": (N_VIS + nh, N_VIS + nh + N_VIS),
        "mod_exc": N_VIS + nh + N_VIS,
        "mod_inh": N_VIS + nh + N_VIS + 1,
    }
    n_int = N_VIS + nh
    rng = np.random.default_rng(p.seed)
    syn = []
    tied = []
    h0 = ids["hidden"][0]
    for v in range(N_VIS):
        for h in range(h0, h0 + nh):
            w = int(rng.integers(0, p.init_hi + 1))
            syn.append(Synapse(src=v, dst=h, comp=1, w=w, plastic=True))
            syn.append(Synapse(src=h, dst=v, comp=1, w=w, plastic=True))
            tied.append(((v, h, 1), (h, v, 1)))
    d0 = ids["data"][0]
    for v in range(N_VIS):
        syn.append(Synapse(src=d0 + v, dst=v, comp=3, w=0, plastic=False))
    for u in range(n_int):
        syn.append(Synapse(src=ids["mod_exc"], dst=u, comp=2, w=1, plastic=False))
        syn.append(Synapse(src=ids["mod_inh"], dst=u, comp=2, w=-1, plastic=False))
    syn.append(Synapse(src=16, dst=17, comp=1, w=-p.w_wta, plastic=False))
    syn.append(Synapse(src=17, dst=16, comp=1, w=-p.w_wta, plastic=False))

    vis_group = _unit_group(p, p.theta_v, -6000)
    hid_group = _unit_group(p, p.theta_h, -9500)
    core = CoreSpec(
        n_internal=n_int, n_external=N_VIS + 2,
        groups=[vis_group, hid_group], lgroups=[lg_vis, lg_hid],
        pgroup_of=[0] * N_VIS + [1] * nh,
        lgroup_of=[0] * N_VIS + [1] * nh,
        synapses=syn, tied=tied)
    cfg = SimulationConfig(ticks=1, seed=p.seed, learning_enabled=True,
                           max_delay=4, cores=[core])
    return cfg, ids


class ErbmRun:
    """Alternating-phase trainer over the 32 bars-and-stripes patterns."""

    def __init__(self, params=None):
        self.p = params or ErbmParams()
        self.cfg, self.ids = build_erbm(self.p)
        self.fab = Fabric(self.cfg)
        self.patterns = bars_and_stripes()
        self.order_rng = np.random.default_rng(self.p.seed + 72)
        self.fab.prepare_buffers(max_inj_per_tick=N_VIS + 2)
        core = self.fab.cores[0]
        d0 = self.ids["data"][0]
        self._data_slots = [
            [core.swidx[s] for s in range(core.srow[d0 + v], core.srow[d0 + v + 1])]
            for v in range(N_VIS)
        ]
        self._data_ports = [d0 + v for v in range(N_VIS)]

    def _set_drive(self, pixels, orient, clamp_class):
        core = self.fab.cores[0]
        values = list(pixels) + ([1 - orient, orient] if clamp_class else [None, None])
        for v in range(N_VIS):
            val = values[v]
            w = 0 if val is None else (self.p.w_on if val else self.p.w_off)
            for slot in self._data_slots[v]:
                core.wpool[slot] = w

    def _every_tick(self, n, ports):
        t0 = self.fab.t
        ts = np.repeat(np.arange(t0, t0 + n, dtype=np.int64), len(ports))
        es = np.tile(np.asarray(ports, dtype=np.int64), n)
        return ts, es

    def present(self, pixels, orient):
        p = self.p
        me, mi = self.ids["mod_exc"], self.ids["mod_inh"]
        self.fab.cfg.learning_enabled = True
        self._set_drive(pixels, orient, clamp_class=True)
        self.fab.span(p.mod_lag, inj=self._every_tick(p.mod_lag, self._data_ports + [mi]))
        self.fab.span(p.data_ticks, inj=self._every_tick(p.data_ticks, self._data_ports + [me]))
        # free-running phase: data ports stop firing; x3 decays on its own
        self.fab.span(p.mod_lag, inj=self._every_tick(p.mod_lag, [me]))
        self.fab.span(p.data_ticks, inj=self._every_tick(p.data_ticks, [mi]))

    def epoch(self):
        for i in self.order_rng.permutation(len(self.patterns)):
            self.present(*self.patterns[i])

    def classify(self, pixels):
        """Summed multi-trial spike-count margin of the class pair."""
        p = self.p
        self.fab.cfg.learning_enabled = False
        margin = 0
        z = np.zeros(0, dtype=np.int64)
        for _ in range(p.test_trials):
            self._set_drive(pixels, 0, clamp_class=False)
            inj = self._every_tick(p.test_ticks, self._data_ports[:N_PIX])
            spikes, _ = self.fab.span(p.test_ticks, inj=inj)
            margin += int((spikes[:, 1] == 16).sum()) - int((spikes[:, 1] == 17).sum())
            self.fab.span(p.test_blank, inj=(z, z))
        return (0 if margin >= 0 else 1), margin

    def test_error(self):
        wrong = 0
        for pixels, orient in self.patterns:
            pred, _ = self.classify(pixels)
            wrong += (pred != orient)
        return wrong

    def weight_matrix(self):
        core = self.fab.cores[0]
        nh = self.p.hidden
        out = np.zeros((N_VIS, nh), dtype=np.int64)
        h0 = self.ids["hidden"][0]
        for v in range(N_VIS):
            for s in range(core.srow[v], core.srow[v + 1]):
                dst = core.sdst[s]
                if h0 <= dst < h0 + nh and core.scomp[s] == 1:
                    out[v, dst - h0] = core.wpool[core.swidx[s]]
        return out

    def symmetry_exact(self):
        """True iff w(v->h) == w(h->v) for every pair (shared storage)."""
        core = self.fab.cores[0]
        h0 = self.ids["hidden"][0]
        fwd = {}
        for v in range(N_VIS):
            for s in range(core.srow[v], core.srow[v + 1]):
                if core.scomp[s] == 1 and core.sdst[s] >= h0:
                    fwd[(v, core.sdst[s])] = core.wpool[core.swidx[s]]
        for h in range(h0, h0 + self.p.hidden):
            for s in range(core.srow[h], core.srow[h + 1]):
                dst = core.sdst[s]
                if core.scomp[s] == 1 and dst < N_VIS:
                    if fwd[(dst, h)] != core.wpool[core.swidx[s]]:
                        return False
        return True

    def train(self, epochs=50, target=None, log=None):
        """Run epochs, testing after each; stop early at `target` errors."""
        history = []
        for ep in range(epochs):
            self.epoch()
            err = self.test_error()
            history.append(err)
            assert self.symmetry_exact()
            if log:
                log(f"epoch {ep + 1}: {err}/32 wrong")
            if target is not None and err <= target:
                break
        return history
