"""Command-line runner for static configurations.

    nsat --config run/config.yaml --out results [--ticks N] [--seed S]
         [--rng software|hardware] [--threads N] [--monitor SPEC ...]
         [--stats]

Outputs in the target directory:

    spikes.evt           every spike as (tick, core, neuron, delay=0)
    stats.json           counters: emitted/delivered/synops/spikes/updates
    monitor_<i>_<kind>.npz   ticks + data arrays of each monitor
    weights_final.npy    int8 weights in config declaration order

Exit codes: 0 success, 2 configuration/usage problems, 1 runtime failure.
An `events.evt` file next to the config is injected automatically.
Monitor SPECs look like `states:core=0:neurons=0-4:every=10`,
`weights:every=100` or plain `spikes`.  NSAT_OUT sets the default
output directory.
"""

import argparse
import json
import os
import sys

import numpy as np

from .params import ConfigError, MonitorSpec
from .iolib.config_io import load_config
from .iolib.events import write_events, read_events, records_as_tuples, EventFileError
from .engine.fabric import Fabric


def _parse_span(text):
    ids = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            ids.extend(range(int(lo), int(hi) + 1))
        else:
            ids.append(int(part))
    return ids


def parse_monitor(spec):
    fields = spec.split(":")
    what = fields[0]
    kw = {"what": what, "core": 0, "cadence": 1, "neurons": [], "components": []}
    for f in fields[1:]:
        key, _, val = f.partition("=")
        if key == "core":
            kw["core"] = int(val)
        elif key == "every":
            kw["cadence"] = int(val)
        elif key == "neurons":
            kw["neurons"] = _parse_span(val)
        elif key == "components":
            kw["components"] = _parse_span(val)
        else:
            raise ConfigError(f"monitor spec {spec!r}: unknown field {key!r}")
    return MonitorSpec(**kw)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="nsat", description="fixed-point spiking network simulator")
    ap.add_argument("--config", required=True, help="configuration YAML")
    ap.add_argument("--ticks", type=int, default=None, help="override tick count")
    ap.add_argument("--seed", type=int, default=None, help="override RNG seed")
    ap.add_argument("--rng", choices=("software", "hardware"), default=None)
    ap.add_argument("--threads", type=int, default=1, help="host threads (1 core per thread slice)")
    ap.add_argument("--out", default=None, help="output directory (default $NSAT_OUT or ./nsat-out)")
    ap.add_argument("--monitor", action="append", default=[], help="monitor spec, repeatable")
    ap.add_argument("--stats", action="store_true", help="print the stats summary to stdout")
    return ap


def run(args):
    cfg = load_config(args.config)
    if args.ticks is not None:
        cfg.ticks = args.ticks
    if args.seed is not None:
        cfg.seed = args.seed
    if args.rng is not None:
        cfg.rng_backend = args.rng
    for spec in args.monitor:
        cfg.monitors.append(parse_monitor(spec))
    cfg.validate()

    outdir = args.out or os.environ.get("NSAT_OUT") or "nsat-out"
    os.makedirs(outdir, exist_ok=True)

    fab = Fabric(cfg)
    events_path = os.path.join(os.path.dirname(os.path.abspath(args.config)), "events.evt")
    if os.path.exists(events_path):
        fab.inject_external(records_as_tuples(read_events(events_path)))

    result = fab.run(threads=args.threads)

    write_events(os.path.join(outdir, "spikes.evt"), result.spikes)
    for m, (ticks, data) in result.states.items():
        np.savez(os.path.join(outdir, f"monitor_{m}_states.npz"), ticks=ticks, states=data)
    for m, (ticks, data) in result.weights.items():
        np.savez(os.path.join(outdir, f"monitor_{m}_weights.npz"), ticks=ticks, weights=data)
    if any(len(core.spec.synapses) for core in fab.cores):
        final = np.concatenate([core.weights_by_spec_order() for core in fab.cores])
        np.save(os.path.join(outdir, "weights_final.npy"), final)
    stats = {
        "ticks": int(fab.t),
        "counters": result.counters,
        "config": os.path.abspath(args.config),
        "seed": cfg.seed,
        "rng": cfg.rng_backend,
    }
    with open(os.path.join(outdir, "stats.json"), "w") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
    if args.stats:
        print(json.dumps(stats["counters"]["total"], indent=2, sort_keys=True))
    return 0


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return run(args)
    except (ConfigError, EventFileError, FileNotFoundError) as exc:
        print(f"nsat: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"nsat: runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
