"""Programmatic network construction mirroring the core's config schema.

The builder validates everything it can before the core binary is ever
invoked (shape errors, dangling ids, weight range), then writes a run
directory containing config.yaml, optional synapse sidecars and an
optional events.evt that the CLI picks up automatically.
"""

import os

from . import formats

OFF = -16
XMIN, XMAX = -(1 << 15), (1 << 15) - 1


class ClientValidationError(ValueError):
    pass


def _vec(v, k, where):
    v = [int(e) for e in v]
    if len(v) != k:
        raise ClientValidationError(f"{where}: expected {k} entries, got {len(v)}")
    return v


GROUP_DEFAULTS = dict(
    b=0, sigma=OFF, prob=15, theta=XMAX, Xreset=0, XspikeIncrVal=0,
    Xthlo=XMIN, Xthup=XMAX, Xinit=0, Wgain=0,
)


class NetworkBuilder:
    def __init__(self, ticks, seed=1, rng="software", max_delay=64,
                 learning=False, gate_period=0, gate_active=(0, 0)):
        self.ticks = int(ticks)
        self.seed = int(seed)
        self.rng = rng
        self.max_delay = int(max_delay)
        self.learning = bool(learning)
        self.gate_period = int(gate_period)
        self.gate_active = (int(gate_active[0]), int(gate_active[1]))
        self.cores = []
        self.monitors = []
        self.events = []

    # ------------------------------------------------------------------
    def add_core(self, internal, external=0):
        self.cores.append({
            "internal": int(internal), "external": int(external),
            "groups": [], "learning_groups": [],
            "pgroup_of": [0] * int(internal), "lgroup_of": [0] * int(internal),
            "synapses": [], "tied": [],
        })
        return len(self.cores) - 1

    def param_group(self, core, k, A, sA, *, modulator=0, spike_enabled=True,
                    adaptive_theta=False, reset_enabled=True, refractory=0,
                    XresetOn=None, **vectors):
        if not 1 <= k <= 8:
            raise ClientValidationError("k must be in [1, 8]")
        A = [_vec(r, k, "A row") for r in A]
        sA = [_vec(r, k, "sA row") for r in sA]
        if len(A) != k or len(sA) != k:
            raise ClientValidationError(f"A and sA must be {k}x{k}")
        entry = {"k": k, "A": A, "sA": sA,
                 "modulator": int(modulator), "spike_enabled": bool(spike_enabled),
                 "adaptive_theta": bool(adaptive_theta),
                 "reset_enabled": bool(reset_enabled), "refractory": int(refractory),
                 "XresetOn": [bool(v) for v in (XresetOn or [True] * k)]}
        for name, default in GROUP_DEFAULTS.items():
            entry[name] = _vec(vectors.pop(name, [default] * k), k, name)
        if vectors:
            raise ClientValidationError(f"unknown group fields {sorted(vectors)}")
        self.cores[core]["groups"].append(entry)
        return len(self.cores[core]["groups"]) - 1

    def learning_group(self, core, *, tca=(1, 1), hica=(OFF,) * 3, sica=(1,) * 3,
                       slca=0, tac=(-1, -1), hiac=(OFF,) * 3, siac=(1,) * 3,
                       slac=0, mode="linear", plastic=(), rr_bits=0,
                       wmin=-128, wmax=127, gate=None):
        entry = {"tca": list(tca), "hica": list(hica), "sica": list(sica),
                 "slca": int(slca), "tac": list(tac), "hiac": list(hiac),
                 "siac": list(siac), "slac": int(slac), "mode": mode,
                 "plastic": [bool(v) for v in plastic], "rr_bits": int(rr_bits),
                 "wmin": int(wmin), "wmax": int(wmax),
                 "gate": gate or {"enabled": False, "component": 0,
                                  "low": XMIN, "high": XMAX}}
        self.cores[core]["learning_groups"].append(entry)
        return len(self.cores[core]["learning_groups"]) - 1

    def assign(self, core, neurons, group=None, lgroup=None):
        c = self.cores[core]
        for n in neurons:
            if group is not None:
                c["pgroup_of"][n] = group
            if lgroup is not None:
                c["lgroup_of"][n] = lgroup

    def connect(self, core, src, dst, comp, w, plastic=False):
        if not -128 <= w <= 127:
            raise ClientValidationError(f"weight {w} outside [-128, 127]")
        self.cores[core]["synapses"].append([int(src), int(dst), int(comp),
                                             int(w), int(bool(plastic))])

    def monitor(self, what, core=0, neurons=(), components=(), every=1):
        self.monitors.append({"what": what, "core": int(core),
                              "neurons": [int(v) for v in neurons],
                              "components": [int(v) for v in components],
                              "cadence": int(every)})

    def inject(self, tick, core, neuron, delay=0):
        self.events.append((int(tick), int(core), int(neuron), int(delay)))

    # ------------------------------------------------------------------
    def validate(self):
        if self.ticks <= 0:
            raise ClientValidationError("ticks must be positive")
        if not self.cores:
            raise ClientValidationError("no cores defined")
        for ci, c in enumerate(self.cores):
            n_int, n_ext = c["internal"], c["external"]
            if not c["groups"]:
                raise ClientValidationError(f"core {ci}: no parameter groups")
            for i, g in enumerate(c["pgroup_of"]):
                if not 0 <= g < len(c["groups"]):
                    raise ClientValidationError(
                        f"core {ci}, neuron {i}: dangling group id {g}")
            for i, g in enumerate(c["lgroup_of"]):
                if g and not 0 <= g < max(len(c["learning_groups"]), 1):
                    raise ClientValidationError(
                        f"core {ci}, neuron {i}: dangling learning group id {g}")
            for s in c["synapses"]:
                src, dst, comp, w, plastic = s
                if not 0 <= src < n_int + n_ext:
                    raise ClientValidationError(f"core {ci}: synapse source {src} out of range")
                if not 0 <= dst < n_int:
                    raise ClientValidationError(
                        f"core {ci}: synapse target {dst} must be an internal neuron")
                k = c["groups"][c["pgroup_of"][dst]]["k"]
                if not 0 <= comp < k:
                    raise ClientValidationError(f"core {ci}: component {comp} out of range")
                if plastic and not c["learning_groups"]:
                    raise ClientValidationError(f"core {ci}: plastic synapse without learning groups")
        last = -1
        for ev in self.events:
            if ev[0] < last:
                raise ClientValidationError("events must be sorted by tick")
            last = ev[0]
        return self

    def compose(self, outdir, name="config.yaml"):
        """Validate, then write the run directory; returns the config path."""
        self.validate()
        os.makedirs(outdir, exist_ok=True)
        base = os.path.splitext(name)[0]
        doc = {
            "version": 1,
            "ticks": self.ticks,
            "seed": self.seed,
            "rng": self.rng,
            "max_delay": self.max_delay,
            "learning": {"enabled": self.learning, "period": self.gate_period,
                         "active": list(self.gate_active)},
            "cores": [],
            "monitors": list(self.monitors),
        }
        for ci, c in enumerate(self.cores):
            entry = {
                "internal": c["internal"], "external": c["external"],
                "groups": c["groups"], "learning_groups": c["learning_groups"],
                "pgroup_of": c["pgroup_of"], "lgroup_of": c["lgroup_of"],
                "tied": c["tied"],
            }
            if len(c["synapses"]) > formats.INLINE_SYNAPSE_LIMIT:
                sidecar = f"{base}.core{ci}.syn"
                rows = sorted(c["synapses"], key=lambda s: s[0])
                formats.write_synapses(os.path.join(outdir, sidecar), rows)
                entry["synapses"] = {"file": sidecar}
            else:
                entry["synapses"] = c["synapses"]
            doc["cores"].append(entry)
        path = os.path.join(outdir, name)
        formats.write_config_doc(doc, path)
        if self.events:
            formats.write_events(os.path.join(outdir, "events.evt"),
                                 sorted(self.events))
        return path

    @classmethod
    def from_config(cls, path):
        """Parse a core-produced config back into a builder (round trip)."""
        doc = formats.read_config_doc(path)
        learning = doc.get("learning", {})
        nb = cls(ticks=doc["ticks"], seed=doc.get("seed", 1),
                 rng=doc.get("rng", "software"), max_delay=doc.get("max_delay", 64),
                 learning=learning.get("enabled", False),
                 gate_period=learning.get("period", 0),
                 gate_active=tuple(learning.get("active", (0, 0))))
        for centry in doc["cores"]:
            ci = nb.add_core(centry["internal"], centry.get("external", 0))
            c = nb.cores[ci]
            c["groups"] = centry.get("groups", [])
            c["learning_groups"] = centry.get("learning_groups", [])
            c["pgroup_of"] = centry.get("pgroup_of", [0] * centry["internal"])
            c["lgroup_of"] = centry.get("lgroup_of", [0] * centry["internal"])
            c["tied"] = centry.get("tied", [])
            syn = centry.get("synapses", [])
            if isinstance(syn, dict):
                raise ClientValidationError(
                    "sidecar configs round-trip through compose() untouched; "
                    "inline them to edit")
            c["synapses"] = [list(s) for s in syn]
        nb.monitors = doc.get("monitors", [])
        return nb
