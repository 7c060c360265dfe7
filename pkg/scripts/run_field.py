#!/usr/bin/env python3
"""Run a field variant (bump, select, track) and report localization."""
import argparse
import os

import numpy as np

from nsat.engine.fabric import Fabric
from nsat.iolib.events import write_events
from nsat.zoo.fields import build_field, track_centers
from nsat.zoo.common import write_bundle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("variant", choices=("bump", "select", "track"))
    ap.add_argument("--cores", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/field")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    cfg, events = build_field(args.variant, cores=args.cores, seed=args.seed)
    write_bundle(cfg, os.path.join(args.out, args.variant), events=events)
    fab = Fabric(cfg)
    fab.inject_external(events)
    res = fab.run(threads=args.threads)
    write_events(os.path.join(args.out, f"{args.variant}.evt"), res.spikes)
    per = 100 // args.cores
    gid = res.spikes["core"].astype(int) * per + res.spikes["neuron"].astype(int)
    t = res.spikes["tick"]
    if args.variant == "bump":
        late = gid[t >= 1500]
        frac = ((late >= 35) & (late <= 65)).mean() if len(late) else 0.0
        print(f"bump: late spikes={len(late)} fraction in [35,65]={frac:.3f}")
    elif args.variant == "select":
        late = gid[t >= 1500]
        a = ((late >= 20) & (late < 40)).mean() if len(late) else 0.0
        b = ((late >= 70) & (late < 90)).mean() if len(late) else 0.0
        print(f"select: late spikes={len(late)} bandA={a:.3f} bandB={b:.3f}")
    else:
        for s, c in enumerate(track_centers()):
            seg = gid[(t >= 500 * s + 200) & (t < 500 * (s + 1))]
            cent = seg.mean() if len(seg) else float("nan")
            print(f"track segment {s}: input center={c} spike centroid={cent:.1f}")


if __name__ == "__main__":
    main()
