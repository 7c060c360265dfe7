"""Dataclass configuration model for simulations.

A simulation is a list of cores advancing in lockstep.  Each core owns
its neurons, a forward synapse table, up to 8 dynamics parameter groups
and 8 learning groups, and one RNG stream.  Neuron ids are core-local:
ids [0, n_internal) are internal neurons with state vectors, ids
[n_internal, n_internal + n_external) are external entries -- spike
delivery ports that carry fanout weights and plasticity timers but no
dynamics.

All validation lives here so that file loading, the Python builders and
the scripting client share one set of diagnostics.
"""

from dataclasses import dataclass, field, asdict

from .fxp import OFF, XMIN, XMAX, WMIN, WMAX

MAX_GROUPS = 8
MAX_LGROUPS = 8
MAX_K = 8


class ConfigError(ValueError):
    """Configuration rejected; message carries the offending field path."""


def _check(cond, where, msg):
    if not cond:
        raise ConfigError(f"{where}: {msg}")


def _vec(v, k, where, lo=None, hi=None):
    v = [int(e) for e in v]
    _check(len(v) == k, where, f"expected {k} entries, got {len(v)}")
    if lo is not None:
        for e in v:
            _check(lo <= e <= hi, where, f"entry {e} outside [{lo}, {hi}]")
    return v


def _mat(m, k, where, lo, hi):
    _check(len(m) == k, where, f"expected {k} rows, got {len(m)}")
    out = []
    for i, row in enumerate(m):
        out.append(_vec(row, k, f"{where}[{i}]", lo, hi))
    return out


@dataclass
class ParamGroup:
    """One neuron-dynamics parameter set (shared by any number of neurons).

    A and sA follow the row-is-destination convention: the update to
    component i sums sA[i][j] * (A[i][j] <><> x[j]) over source
    components j.  OFF (-16) entries contribute exactly zero.
    """

    k: int = 4
    A: list = field(default_factory=list)
    sA: list = field(default_factory=list)
    b: list = field(default_factory=list)
    sigma: list = field(default_factory=list)          # noise shift exponents, OFF = silent
    prob: list = field(default_factory=list)           # blank-out 4-bit keep levels, 15 = always
    theta: list = field(default_factory=list)          # theta[0] is the firing threshold
    Xreset: list = field(default_factory=list)
    XresetOn: list = field(default_factory=list)
    XspikeIncrVal: list = field(default_factory=list)
    Xthlo: list = field(default_factory=list)
    Xthup: list = field(default_factory=list)
    Xinit: list = field(default_factory=list)
    Wgain: list = field(default_factory=list)           # weight shift gains per target component
    modulator: int = 0                                  # which component is x_m for plasticity
    spike_enabled: bool = True
    adaptive_theta: bool = False                        # spike iff x0 >= x1 instead of x0 >= theta0
    reset_enabled: bool = True
    refractory: int = 0

    def __post_init__(self):
        k = int(self.k)
        _check(1 <= k <= MAX_K, "group.k", f"components per neuron must be in [1, {MAX_K}]")
        self.k = k
        if not self.A:
            self.A = [[OFF] * k for _ in range(k)]
        if not self.sA:
            self.sA = [[1] * k for _ in range(k)]
        self.A = _mat(self.A, k, "group.A", -16, 15)
        self.sA = _mat(self.sA, k, "group.sA", -1, 1)
        for i in range(k):
            for j in range(k):
                _check(self.sA[i][j] in (-1, 1), "group.sA", "signs must be -1 or +1")
        self.b = _vec(self.b or [0] * k, k, "group.b", XMIN, XMAX)
        self.sigma = _vec(self.sigma or [OFF] * k, k, "group.sigma", -16, 15)
        self.prob = _vec(self.prob or [15] * k, k, "group.prob", 0, 15)
        self.theta = _vec(self.theta or [XMAX] * k, k, "group.theta", XMIN, XMAX)
        self.Xreset = _vec(self.Xreset or [0] * k, k, "group.Xreset", XMIN, XMAX)
        raw_on = self.XresetOn or [True] * k
        _check(len(raw_on) == k, "group.XresetOn", f"expected {k} entries")
        self.XresetOn = [bool(e) for e in raw_on]
        self.XspikeIncrVal = _vec(self.XspikeIncrVal or [0] * k, k, "group.XspikeIncrVal", XMIN, XMAX)
        self.Xthlo = _vec(self.Xthlo or [XMIN] * k, k, "group.Xthlo", XMIN, XMAX)
        self.Xthup = _vec(self.Xthup or [XMAX] * k, k, "group.Xthup", XMIN, XMAX)
        self.Xinit = _vec(self.Xinit or [0] * k, k, "group.Xinit", XMIN, XMAX)
        self.Wgain = _vec(self.Wgain or [0] * k, k, "group.Wgain", -16, 15)
        for i in range(k):
            _check(self.Xthlo[i] <= self.Xthup[i], "group.Xthlo/Xthup", f"component {i}: lo > hi")
            if self.XresetOn[i]:
                _check(
                    self.Xthlo[i] <= self.Xreset[i] <= self.Xthup[i],
                    "group.Xreset",
                    f"component {i}: reset value outside [Xthlo, Xthup]",
                )
        _check(0 <= self.modulator < k, "group.modulator", "modulator component id out of range")
        _check(self.refractory >= 0, "group.refractory", "refractory length must be >= 0")
        if self.adaptive_theta:
            _check(k >= 2, "group.adaptive_theta", "adaptive threshold compares x0 against x1, needs k >= 2")


@dataclass
class LearningGroup:
    """Piecewise STDP kernel plus the update-path knobs of one learning group.

    Causal side: breakpoints tca (0 < tca0 <= tca1), three levels hica
    (shift exponents applied to the modulator state, OFF kills a
    segment) with signs sica.  Acausal side mirrors with tac (tac1 <=
    tac0 < 0).  The pairing window is max(tca1, -tac1).  In exponential
    mode the effective level decays with |dt| >> slope, floored at OFF.
    """

    tca: list = field(default_factory=lambda: [1, 1])
    hica: list = field(default_factory=lambda: [OFF, OFF, OFF])
    sica: list = field(default_factory=lambda: [1, 1, 1])
    slca: int = 0
    tac: list = field(default_factory=lambda: [-1, -1])
    hiac: list = field(default_factory=lambda: [OFF, OFF, OFF])
    siac: list = field(default_factory=lambda: [1, 1, 1])
    slac: int = 0
    mode: str = "linear"
    plastic: list = field(default_factory=list)         # per target component, padded to k of its users
    rr_bits: int = 0
    wmin: int = WMIN
    wmax: int = WMAX
    gate_enabled: bool = False                          # modulator path gate on a post component
    gate_component: int = 0
    gate_low: int = XMIN
    gate_high: int = XMAX

    def __post_init__(self):
        self.tca = _vec(self.tca, 2, "lgroup.tca")
        self.tac = _vec(self.tac, 2, "lgroup.tac")
        _check(0 < self.tca[0] <= self.tca[1], "lgroup.tca", "need 0 < tca0 <= tca1")
        _check(self.tac[1] <= self.tac[0] < 0, "lgroup.tac", "need tac1 <= tac0 < 0")
        self.hica = _vec(self.hica, 3, "lgroup.hica", -16, 15)
        self.hiac = _vec(self.hiac, 3, "lgroup.hiac", -16, 15)
        self.sica = _vec(self.sica, 3, "lgroup.sica")
        self.siac = _vec(self.siac, 3, "lgroup.siac")
        for s in self.sica + self.siac:
            _check(s in (-1, 1), "lgroup.sica/siac", "signs must be -1 or +1")
        _check(self.mode in ("linear", "exponential"), "lgroup.mode", f"unknown mode {self.mode!r}")
        _check(0 <= self.rr_bits <= 15, "lgroup.rr_bits", "rounding bits must be in [0, 15]")
        _check(self.slca >= 0 and self.slac >= 0, "lgroup.slca/slac", "slopes must be >= 0")
        _check(WMIN <= self.wmin <= self.wmax <= WMAX, "lgroup.wmin/wmax", "weight bounds must nest in [-128, 127]")
        self.plastic = [bool(e) for e in (self.plastic or [])]
        _check(self.gate_low <= self.gate_high, "lgroup.gate", "gate_low > gate_high")

    @property
    def window(self):
        return max(self.tca[1], -self.tac[1])

    @property
    def causal_live(self):
        """True if any causal segment can produce a nonzero update.

        Rows whose plastic fanout has no live causal kernel never need a
        timer: the expiry pass would evaluate to zero everywhere."""
        return any(level > -16 for level in self.hica)


@dataclass
class Synapse:
    """One forward-table row entry: src fans out to (dst, component)."""

    src: int
    dst: int
    comp: int
    w: int
    plastic: bool = False


@dataclass
class Axon:
    """Spike routing record: when src fires, deliver to (core, entry)."""

    src: int
    dst_core: int
    dst_entry: int
    delay: int = 0


@dataclass
class CoreSpec:
    n_internal: int = 0
    n_external: int = 0
    groups: list = field(default_factory=list)
    lgroups: list = field(default_factory=list)
    pgroup_of: list = field(default_factory=list)       # per internal neuron, default 0
    lgroup_of: list = field(default_factory=list)       # per neuron incl. external entries
    synapses: list = field(default_factory=list)
    axons: list = field(default_factory=list)           # if empty, self-core identity axons are derived
    tied: list = field(default_factory=list)            # pairs of (src, dst, comp) sharing one weight

    @property
    def n_total(self):
        return self.n_internal + self.n_external


@dataclass
class MonitorSpec:
    what: str = "spikes"                                # spikes | states | weights | stats
    core: int = 0
    neurons: list = field(default_factory=list)         # empty = all internal
    components: list = field(default_factory=list)      # empty = all
    cadence: int = 1

    def __post_init__(self):
        _check(self.what in ("spikes", "states", "weights", "stats"), "monitor.what", f"unknown monitor {self.what!r}")
        _check(self.cadence >= 1, "monitor.cadence", "cadence must be >= 1")


@dataclass
class LearningGate:
    """Periodic learning window: updates apply iff lo <= t mod period < hi."""

    period: int = 0                                     # 0 = always on
    lo: int = 0
    hi: int = 0


@dataclass
class SimulationConfig:
    ticks: int = 1
    seed: int = 1
    rng_backend: str = "software"
    learning_enabled: bool = False
    gate: LearningGate = field(default_factory=LearningGate)
    max_delay: int = 64
    cores: list = field(default_factory=list)
    monitors: list = field(default_factory=list)
    version: int = 1

    def validate(self):
        _check(self.ticks > 0, "ticks", "must be positive")
        _check(self.version == 1, "version", f"unsupported schema version {self.version}")
        _check(self.rng_backend in ("software", "hardware"), "rng", f"unknown backend {self.rng_backend!r}")
        _check(0 <= self.max_delay <= 4096, "max_delay", "must be in [0, 4096]")
        _check(len(self.cores) >= 1, "cores", "need at least one core")
        for c, core in enumerate(self.cores):
            where = f"cores[{c}]"
            _check(core.n_internal >= 0 and core.n_external >= 0, where, "negative neuron count")
            _check(core.n_total > 0, where, "core has no neurons")
            _check(1 <= len(core.groups) <= MAX_GROUPS, f"{where}.groups", f"need 1..{MAX_GROUPS} parameter groups")
            _check(len(core.lgroups) <= MAX_LGROUPS, f"{where}.lgroups", f"at most {MAX_LGROUPS} learning groups")
            if not core.pgroup_of:
                core.pgroup_of = [0] * core.n_internal
            if not core.lgroup_of:
                core.lgroup_of = [0] * core.n_internal
            _check(len(core.pgroup_of) == core.n_internal, f"{where}.pgroup_of", "one group id per internal neuron")
            _check(len(core.lgroup_of) == core.n_internal, f"{where}.lgroup_of", "one learning group id per internal neuron")
            for i, g in enumerate(core.pgroup_of):
                _check(0 <= g < len(core.groups), f"{where}.pgroup_of[{i}]", f"dangling group id {g}")
            for i, g in enumerate(core.lgroup_of):
                _check(
                    0 <= g < max(len(core.lgroups), 1),
                    f"{where}.lgroup_of[{i}]",
                    f"dangling learning group id {g}",
                )
            seen = set()
            for s, syn in enumerate(core.synapses):
                sw = f"{where}.synapses[{s}]"
                _check(0 <= syn.src < core.n_total, sw, f"source id {syn.src} out of range")
                _check(0 <= syn.dst < core.n_internal, sw, f"target {syn.dst} is not an internal neuron")
                gk = core.groups[core.pgroup_of[syn.dst]].k
                _check(0 <= syn.comp < gk, sw, f"component {syn.comp} out of range for target group (k={gk})")
                _check(WMIN <= syn.w <= WMAX, sw, f"weight {syn.w} outside [-128, 127]")
                key = (syn.src, syn.dst, syn.comp)
                _check(key not in seen, sw, f"duplicate synapse {key}")
                seen.add(key)
                if syn.plastic:
                    _check(len(core.lgroups) > 0, sw, "plastic synapse but core has no learning groups")
            for a, ax in enumerate(core.axons):
                aw = f"{where}.axons[{a}]"
                _check(0 <= ax.src < core.n_internal, aw, "only internal neurons emit spikes")
                _check(0 <= ax.dst_core < len(self.cores), aw, f"dangling core id {ax.dst_core}")
                dst = self.cores[ax.dst_core]
                _check(0 <= ax.dst_entry < dst.n_total, aw, f"entry {ax.dst_entry} out of range on core {ax.dst_core}")
                _check(0 <= ax.delay <= self.max_delay, aw, f"delay {ax.delay} outside [0, max_delay={self.max_delay}]")
            for t, (pa, pb) in enumerate(core.tied):
                _check(tuple(pa) in seen and tuple(pb) in seen, f"{where}.tied[{t}]", "tied pair names unknown synapses")
        for m, mon in enumerate(self.monitors):
            _check(0 <= mon.core < len(self.cores), f"monitors[{m}].core", f"dangling core id {mon.core}")
        return self


def default_axons(core_index, core):
    """Self-core identity axons: every source with fanout delivers locally."""
    srcs = sorted({s.src for s in core.synapses if s.src < core.n_internal})
    return [Axon(src=s, dst_core=core_index, dst_entry=s, delay=0) for s in srcs]


def config_to_dict(cfg):
    return asdict(cfg)
