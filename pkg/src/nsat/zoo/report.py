"""Synaptic-operation vs multiply-accumulate comparison tables.

Both trainers emit (test error, cumulative operation count) traces; the
report lines them up on a shared error-target grid and quotes the
operations each side needed to first reach every target, plus their
ratio.  Counts are cumulative at the first crossing, so the table reads
as "operations required to reach a given accuracy".
"""

import math


def ops_at_crossing(trace, target):
    """Cumulative ops when error first reaches <= target; None if never.

    trace: iterable of (error, cumulative_ops), in training order.
    """
    for err, ops in trace:
        if err <= target:
            return ops
    return None


def interpolated_crossing(trace, target):
    """Like ops_at_crossing but linearly interpolates between the two
    points straddling the target; flags the result as interpolated."""
    prev = None
    for err, ops in trace:
        if err <= target:
            if prev is None or prev[0] == err:
                return ops, False
            e0, o0 = prev
            f = (e0 - target) / (e0 - err)
            return o0 + f * (ops - o0), True
        prev = (err, ops)
    return None, False


def synop_report(nsat_trace, ref_trace=None, targets=None):
    """Rows of (target, synops, macs, ratio, flags) plus a text table.

    nsat_trace / ref_trace: [(error, cumulative ops), ...].  A missing
    reference leaves the MAC column empty.  Ratios are synops / macs at
    the matched error target (< 1 favors the spiking side).
    """
    if targets is None:
        errs = [e for e, _ in nsat_trace]
        if ref_trace:
            errs += [e for e, _ in ref_trace]
        lo = max(min(errs), 1e-4)
        targets = sorted({round(t, 4) for t in (0.5, 0.3, 0.2, 0.15, 0.1, 0.05) if t >= lo},
                         reverse=True)
    rows = []
    for t in targets:
        so, so_interp = interpolated_crossing(nsat_trace, t)
        if ref_trace:
            mo, mo_interp = interpolated_crossing(ref_trace, t)
        else:
            mo, mo_interp = None, False
        ratio = (so / mo) if (so is not None and mo) else None
        flags = []
        if so_interp or mo_interp:
            flags.append("interp")
        rows.append({"target": t, "synops": so, "macs": mo, "ratio": ratio,
                     "flags": ",".join(flags)})
    return rows


def format_report(rows):
    lines = ["# error_target\tsynops\tmacs\tsynop_mac_ratio\tflags"]
    for r in rows:
        so = f"{r['synops']:.4g}" if r["synops"] is not None else "-"
        mo = f"{r['macs']:.4g}" if r["macs"] is not None else "-"
        ra = f"{r['ratio']:.3f}" if r["ratio"] is not None else "-"
        lines.append(f"{r['target']:.4g}\t{so}\t{mo}\t{ra}\t{r['flags']}")
    return "\n".join(lines) + "\n"


def write_report(path, rows):
    with open(path, "w") as fh:
        fh.write(format_report(rows))
    return path
