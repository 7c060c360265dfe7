"""YAML configuration schema (version 1) and the binary synapse sidecar.

The main file is human-readable YAML; connectivity may live inline as
[src, dst, comp, weight, plastic] rows or in a sidecar named by
``synapses: {file: ...}``, which uses the fixed layout

    bytes 0..7   magic b"NSATSYN1"
    bytes 8..15  u64 record count
    then count records of 11 bytes: src u32, dst u32, comp u8, w i8, plastic u8

sorted by src.  Semantic validation errors carry the offending field
path (cores[1].groups[0].A and similar); YAML syntax errors keep the
parser's line/column.
"""

import os
import warnings

import numpy as np
import yaml

from ..params import (
    ConfigError, ParamGroup, LearningGroup, Synapse, Axon, CoreSpec,
    MonitorSpec, LearningGate, SimulationConfig,
)

SYN_MAGIC = b"NSATSYN1"
SYN_DTYPE = np.dtype([("src", "<u4"), ("dst", "<u4"), ("comp", "u1"), ("w", "i1"), ("plastic", "u1")])

DEFAULT_SEED = 1
INLINE_SYNAPSE_LIMIT = 64


def write_synapses(path, synapses):
    arr = np.zeros(len(synapses), dtype=SYN_DTYPE)
    for i, s in enumerate(synapses):
        arr[i] = (s.src, s.dst, s.comp, s.w, int(s.plastic))
    if len(arr) > 1 and np.any(arr["src"][1:] < arr["src"][:-1]):
        raise ConfigError("synapse sidecar must be sorted by source id")
    with open(path, "wb") as fh:
        fh.write(SYN_MAGIC)
        fh.write(np.uint64(len(arr)).tobytes())
        fh.write(arr.tobytes())


def read_synapses(path):
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16 or head[:8] != SYN_MAGIC:
            raise ConfigError(f"{path}: not a synapse sidecar (bad magic)")
        count = int(np.frombuffer(head[8:], dtype="<u8")[0])
        body = fh.read()
    if len(body) != count * SYN_DTYPE.itemsize:
        raise ConfigError(f"{path}: truncated synapse sidecar")
    arr = np.frombuffer(body, dtype=SYN_DTYPE)
    return [Synapse(int(r["src"]), int(r["dst"]), int(r["comp"]), int(r["w"]), bool(r["plastic"]))
            for r in arr]


def _group_to_dict(g):
    return {
        "k": g.k, "A": g.A, "sA": g.sA, "b": g.b, "sigma": g.sigma, "prob": g.prob,
        "theta": g.theta, "Xreset": g.Xreset, "XresetOn": g.XresetOn,
        "XspikeIncrVal": g.XspikeIncrVal, "Xthlo": g.Xthlo, "Xthup": g.Xthup,
        "Xinit": g.Xinit, "Wgain": g.Wgain, "modulator": g.modulator,
        "spike_enabled": g.spike_enabled, "adaptive_theta": g.adaptive_theta,
        "reset_enabled": g.reset_enabled, "refractory": g.refractory,
    }


def _lgroup_to_dict(lg):
    return {
        "tca": lg.tca, "hica": lg.hica, "sica": lg.sica, "slca": lg.slca,
        "tac": lg.tac, "hiac": lg.hiac, "siac": lg.siac, "slac": lg.slac,
        "mode": lg.mode, "plastic": lg.plastic, "rr_bits": lg.rr_bits,
        "wmin": lg.wmin, "wmax": lg.wmax,
        "gate": {"enabled": lg.gate_enabled, "component": lg.gate_component,
                 "low": lg.gate_low, "high": lg.gate_high},
    }


def save_config(cfg, path, synapse_files="auto"):
    """Write cfg as YAML beside any needed synapse sidecars.

    synapse_files: "auto" spills cores with more than
    INLINE_SYNAPSE_LIMIT synapses to <stem>.core<i>.syn; "never" keeps
    everything inline; "always" spills every core.
    """
    cfg.validate()
    base = os.path.splitext(path)[0]
    doc = {
        "version": cfg.version,
        "ticks": cfg.ticks,
        "seed": cfg.seed,
        "rng": cfg.rng_backend,
        "max_delay": cfg.max_delay,
        "learning": {
            "enabled": cfg.learning_enabled,
            "period": cfg.gate.period,
            "active": [cfg.gate.lo, cfg.gate.hi],
        },
        "cores": [],
        "monitors": [
            {"what": m.what, "core": m.core, "neurons": m.neurons,
             "components": m.components, "cadence": m.cadence}
            for m in cfg.monitors
        ],
    }
    for ci, core in enumerate(cfg.cores):
        spill = (synapse_files == "always" or
                 (synapse_files == "auto" and len(core.synapses) > INLINE_SYNAPSE_LIMIT))
        centry = {
            "internal": core.n_internal,
            "external": core.n_external,
            "groups": [_group_to_dict(g) for g in core.groups],
            "learning_groups": [_lgroup_to_dict(g) for g in core.lgroups],
            "pgroup_of": core.pgroup_of,
            "lgroup_of": core.lgroup_of,
            "tied": [[list(a), list(b)] for a, b in core.tied],
        }
        if core.axons:
            centry["axons"] = [[a.src, a.dst_core, a.dst_entry, a.delay] for a in core.axons]
        if spill:
            syn_path = f"{base}.core{ci}.syn"
            ordered = sorted(range(len(core.synapses)), key=lambda i: core.synapses[i].src)
            write_synapses(syn_path, [core.synapses[i] for i in ordered])
            centry["synapses"] = {"file": os.path.basename(syn_path)}
        else:
            centry["synapses"] = [[s.src, s.dst, s.comp, s.w, int(s.plastic)]
                                  for s in core.synapses]
        doc["cores"].append(centry)
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True, default_flow_style=None, width=100)
    return path


def _need(doc, key, where):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return doc[key]


_GROUP_KEYS = {"k", "A", "sA", "b", "sigma", "prob", "theta", "Xreset", "XresetOn",
               "XspikeIncrVal", "Xthlo", "Xthup", "Xinit", "Wgain", "modulator",
               "spike_enabled", "adaptive_theta", "reset_enabled", "refractory"}
_LGROUP_KEYS = {"tca", "hica", "sica", "slca", "tac", "hiac", "siac", "slac", "mode",
                "plastic", "rr_bits", "wmin", "wmax", "gate"}
_CORE_KEYS = {"internal", "external", "groups", "learning_groups", "pgroup_of",
              "lgroup_of", "synapses", "axons", "tied"}
_TOP_KEYS = {"version", "ticks", "seed", "rng", "max_delay", "learning", "cores", "monitors"}


def _reject_unknown(doc, allowed, where):
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown field {key!r}")


def load_config(path):
    """Parse and fully validate a configuration file."""
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    _reject_unknown(doc, _TOP_KEYS, path)
    version = doc.get("version", 0)
    if version != 1:
        raise ConfigError(f"{path}: schema version {version!r} not supported (expected 1)")
    if "seed" in doc:
        seed = int(doc["seed"])
    else:
        seed = DEFAULT_SEED
        warnings.warn(f"{path}: no seed given, using default {DEFAULT_SEED}")
    learning = doc.get("learning", {}) or {}
    gate = LearningGate(period=int(learning.get("period", 0)),
                        lo=int(learning.get("active", [0, 0])[0]),
                        hi=int(learning.get("active", [0, 0])[1]))
    cfg = SimulationConfig(
        ticks=int(_need(doc, "ticks", path)),
        seed=seed,
        rng_backend=doc.get("rng", "software"),
        learning_enabled=bool(learning.get("enabled", False)),
        gate=gate,
        max_delay=int(doc.get("max_delay", 64)),
        version=1,
    )
    for ci, centry in enumerate(doc.get("cores", []) or []):
        where = f"{path}: cores[{ci}]"
        _reject_unknown(centry, _CORE_KEYS, where)
        groups = []
        for gi, g in enumerate(centry.get("groups", []) or []):
            _reject_unknown(g, _GROUP_KEYS, f"{where}.groups[{gi}]")
            try:
                groups.append(ParamGroup(**g))
            except ConfigError as exc:
                raise ConfigError(f"{where}.groups[{gi}].{exc}") from exc
        lgroups = []
        for gi, g in enumerate(centry.get("learning_groups", []) or []):
            _reject_unknown(g, _LGROUP_KEYS, f"{where}.learning_groups[{gi}]")
            g = dict(g)
            gate_d = g.pop("gate", None) or {}
            try:
                lgroups.append(LearningGroup(
                    gate_enabled=bool(gate_d.get("enabled", False)),
                    gate_component=int(gate_d.get("component", 0)),
                    gate_low=int(gate_d.get("low", -(1 << 15))),
                    gate_high=int(gate_d.get("high", (1 << 15) - 1)),
                    **g))
            except ConfigError as exc:
                raise ConfigError(f"{where}.learning_groups[{gi}].{exc}") from exc
        syn_entry = centry.get("synapses", [])
        if isinstance(syn_entry, dict):
            syn_path = os.path.join(os.path.dirname(os.path.abspath(path)),
                                    _need(syn_entry, "file", f"{where}.synapses"))
            synapses = read_synapses(syn_path)
        else:
            synapses = []
            for si, row in enumerate(syn_entry or []):
                if len(row) != 5:
                    raise ConfigError(f"{where}.synapses[{si}]: expected [src, dst, comp, w, plastic]")
                synapses.append(Synapse(int(row[0]), int(row[1]), int(row[2]), int(row[3]), bool(row[4])))
        axons = [Axon(int(r[0]), int(r[1]), int(r[2]), int(r[3]))
                 for r in (centry.get("axons", []) or [])]
        tied = [(tuple(int(v) for v in a), tuple(int(v) for v in b))
                for a, b in (centry.get("tied", []) or [])]
        cfg.cores.append(CoreSpec(
            n_internal=int(centry.get("internal", 0)),
            n_external=int(centry.get("external", 0)),
            groups=groups,
            lgroups=lgroups,
            pgroup_of=[int(v) for v in (centry.get("pgroup_of", []) or [])],
            lgroup_of=[int(v) for v in (centry.get("lgroup_of", []) or [])],
            synapses=synapses,
            axons=axons,
            tied=tied,
        ))
    for mi, m in enumerate(doc.get("monitors", []) or []):
        try:
            cfg.monitors.append(MonitorSpec(
                what=m.get("what", "spikes"), core=int(m.get("core", 0)),
                neurons=[int(v) for v in (m.get("neurons", []) or [])],
                components=[int(v) for v in (m.get("components", []) or [])],
                cadence=int(m.get("cadence", 1))))
        except ConfigError as exc:
            raise ConfigError(f"{path}: monitors[{mi}].{exc}") from exc
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg
