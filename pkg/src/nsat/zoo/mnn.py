"""Six-behavior adaptive-threshold neuron benchmark.

One four-component neuron per run: x0 membrane, x1 adaptive threshold,
x2/x3 internal currents that feed the membrane and decay.  The spike
condition is x0 >= x1.  The published coupling tables are stored here
verbatim in their [source][destination] orientation and transposed on
build.  Behaviors differ only in the coupling of membrane into
threshold, the bias pair, resets and initial values.
"""

from ..params import ParamGroup, CoreSpec, SimulationConfig, MonitorSpec
from .common import transpose

OFF = -16

_BASE = [
    [-4, OFF, OFF, OFF],
    [OFF, -7, OFF, OFF],
    [0, OFF, -2, OFF],
    [0, OFF, OFF, -6],
]
_ADAPT = [
    [-4, -8, OFF, OFF],
    [OFF, -7, OFF, OFF],
    [0, OFF, -2, OFF],
    [0, OFF, OFF, -6],
]
_SIGNS = [
    [-1, 1, 1, 1],
    [1, -1, 1, 1],
    [1, 1, -1, 1],
    [1, 1, 1, -1],
]

BEHAVIORS = {
    "tonic": dict(A=_BASE, b=[-287, -39, 0, 0], Xinit=[-7000, -5000, 100, 10],
                  XresetOn=[True, True, True, True], Xreset=[-7000, -5000, 0, 0]),
    "mixed": dict(A=_ADAPT, b=[-167, -11, 0, 0], Xinit=[-7000, -5000, 100, 10],
                  XresetOn=[True, False, True, False], Xreset=[-7000, 0, 500, 0]),
    "class1": dict(A=_BASE, b=[-287, -39, 0, 0], Xinit=[-7000, -5000, 100, 10],
                   XresetOn=[True, True, True, True], Xreset=[-7000, -5000, 0, 0]),
    "class2": dict(A=_ADAPT, b=[-194, -11, 0, 0], Xinit=[-3000, -3000, 100, 10],
                   XresetOn=[True, False, True, True], Xreset=[-7000, -6000, 0, 0]),
    "phasic": dict(A=_ADAPT, b=[-250, -10, 0, 0], Xinit=[-7000, -5000, 100, 10],
                   XresetOn=[True, False, True, False], Xreset=[-7000, -6000, 0, 0]),
    # The fast kick current x2 is set to 1000 on every spike; the slow
    # current x3 accumulates a hyperpolarizing step instead (the R=1,
    # negative-increment current of the reference model), which is what
    # terminates each burst and opens the inter-burst pause.
    "burst": dict(A=_ADAPT, b=[-194, -11, 0, 0], Xinit=[-7000, -5000, 100, 10],
                  XresetOn=[True, False, True, False], Xreset=[-7000, -6000, 1000, 0],
                  XspikeIncrVal=[0, 0, 0, -60]),
}


def build_mnn(behavior, ticks=10_000, seed=1, bias_offset=0, monitor_states=False):
    """Single-neuron config for one behavior; bias_offset shifts the
    membrane drive (the input-current axis of rate curves)."""
    if behavior not in BEHAVIORS:
        raise ValueError(f"unknown behavior {behavior!r}; choose from {sorted(BEHAVIORS)}")
    p = BEHAVIORS[behavior]
    b = list(p["b"])
    b[0] += bias_offset
    group = ParamGroup(
        k=4,
        A=transpose(p["A"]),
        sA=transpose(_SIGNS),
        b=b,
        Xinit=p["Xinit"],
        XresetOn=p["XresetOn"],
        Xreset=p["Xreset"],
        XspikeIncrVal=p.get("XspikeIncrVal", [0, 0, 0, 0]),
        adaptive_theta=True,
        reset_enabled=True,
    )
    core = CoreSpec(n_internal=1, n_external=0, groups=[group])
    monitors = []
    if monitor_states:
        monitors.append(MonitorSpec(what="states", core=0, neurons=[0], components=[0, 1], cadence=1))
    return SimulationConfig(ticks=ticks, seed=seed, cores=[core], monitors=monitors)


def fi_curve(behavior, bias_offsets, ticks=4000, seed=1, settle=500):
    """Firing rate (spikes per tick after a settle window) vs bias offset."""
    from ..engine.fabric import Fabric

    rates = []
    for off in bias_offsets:
        fab = Fabric(build_mnn(behavior, ticks=ticks, seed=seed, bias_offset=off))
        res = fab.run()
        n = int(((res.spikes["tick"] >= settle)).sum())
        rates.append(n / (ticks - settle))
    return rates
