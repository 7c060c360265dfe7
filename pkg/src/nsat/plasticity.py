"""Module-level surface of the plasticity rule.

The engine's flattened loops (engine.kernels) implement the same
arithmetic; these wrappers exist so the kernel and eligibility pieces
can be exercised and reasoned about in isolation: a piecewise
three-segment kernel on each side of zero, whose level acts as a shift
exponent applied to the post neuron's modulator state.
"""

from .engine import kernels as _k
from .fxp import randomized_round, clip


def kernel_eval(lg, dt):
    """(sign, level) of a LearningGroup's kernel at signed dt, or None.

    dt > 0 is the causal side (post after pre), dt < 0 acausal; dt == 0
    and anything beyond the pairing window evaluates to nothing.
    """
    if dt == 0:
        return None
    if dt > 0:
        sign, level, live = _k.kernel_causal(
            dt, lg.tca[0], lg.tca[1], lg.hica[0], lg.hica[1], lg.hica[2],
            lg.sica[0], lg.sica[1], lg.sica[2], lg.slca,
            0 if lg.mode == "linear" else 1, lg.window)
    else:
        sign, level, live = _k.kernel_acausal(
            dt, lg.tac[0], lg.tac[1], lg.hiac[0], lg.hiac[1], lg.hiac[2],
            lg.siac[0], lg.siac[1], lg.siac[2], lg.slac,
            0 if lg.mode == "linear" else 1, lg.window)
    if not live:
        return None
    return int(sign), int(level)


def modulated_eligibility(kern_value, x_m):
    """Eligibility of one pairing: sign * (level <> x_m); 0 if no kernel."""
    if kern_value is None:
        return 0
    sign, level = kern_value
    return int(_k.eligibility(sign, level, x_m))


def apply_update(w, eligibility_value, rr_bits, u, wmin=-128, wmax=127):
    """Randomized-round the eligibility and clip the new weight."""
    dw = randomized_round(eligibility_value, rr_bits, u)
    return clip(w + dw, wmin, wmax)
