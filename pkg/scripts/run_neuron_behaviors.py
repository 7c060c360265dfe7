#!/usr/bin/env python3
"""Run the six single-neuron behaviors and print ISI summaries.

Writes one spike file and optional state trace per behavior under --out.
"""
import argparse
import os

import numpy as np

from nsat.engine.fabric import Fabric
from nsat.iolib.events import write_events
from nsat.zoo.mnn import BEHAVIORS, build_mnn, fi_curve
from nsat.zoo.common import write_bundle, isis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/behaviors")
    ap.add_argument("--ticks", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for behavior in sorted(BEHAVIORS):
        cfg = build_mnn(behavior, ticks=args.ticks, seed=args.seed, monitor_states=True)
        write_bundle(cfg, os.path.join(args.out, behavior))
        fab = Fabric(cfg)
        res = fab.run()
        write_events(os.path.join(args.out, f"{behavior}.evt"), res.spikes)
        ticks, states = res.states[0]
        np.savez(os.path.join(args.out, f"{behavior}_trace.npz"),
                 ticks=ticks, states=states)
        ii = isis(res.spikes["tick"])
        cv = ii.std() / ii.mean() if len(ii) and ii.mean() > 0 else float("nan")
        print(f"{behavior:8s} spikes={len(res.spikes):5d} "
              f"isi_mean={ii.mean() if len(ii) else float('nan'):7.1f} cv={cv:.4f}")
    print("rate curves (spikes/tick) over bias offsets 0..400:")
    offs = list(range(0, 401, 50))
    for behavior in ("class1", "class2"):
        rates = fi_curve(behavior, offs)
        print(f"{behavior}: " + " ".join(f"{r:.4f}" for r in rates))


if __name__ == "__main__":
    main()
