"""Bit-exact fixed-point primitives.

All neuron state arithmetic runs on signed 16-bit words and all scale
factors are powers of two, applied with the two shift operators below.
`diamond` is the plain power-of-two multiply (right shifts round toward
zero, unlike two's-complement `>>`).  `diamonddiamond` is the variant used
inside the state-transition product: when a right shift underflows a
nonzero word to zero it emits a +/-1 step so that repeated application of
a decay coupling always reaches zero instead of stalling at small values.

Exponent -16 (`OFF`) is the "no coupling" sentinel: it contributes an
exact zero everywhere and bypasses the underflow step.
"""

from numba import njit

XMIN = -(1 << 15)
XMAX = (1 << 15) - 1
WMIN = -(1 << 7)
WMAX = (1 << 7) - 1
OFF = -16


@njit(cache=True, inline="always")
def sat16(v):
    """Saturate to the signed 16-bit register range."""
    if v > XMAX:
        return XMAX
    if v < XMIN:
        return XMIN
    return v


@njit(cache=True, inline="always")
def clip(x, lo, hi):
    """max(lo, min(x, hi)); lo <= hi is the caller's responsibility."""
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@njit(cache=True, inline="always")
def diamond(a, x):
    """Multiply x by 2**a using shifts.

    a >= 0 left-shifts with saturation at the 16-bit bounds.  a < 0
    divides by 2**-a rounding toward zero, so any |x| < 2**-a gives 0
    (a plain arithmetic shift of a negative word would give -1).
    """
    if a >= 0:
        return sat16(x << a)
    if x >= 0:
        return x >> (-a)
    return -((-x) >> (-a))


@njit(cache=True, inline="always")
def diamonddiamond(a, x):
    """`diamond` with the underflow-to-zero case replaced by a unit step.

    Returns sign(-x) when diamond(a, x) underflows to 0 on nonzero x; the
    unit is oriented so that *adding* it to x moves x toward zero.  The
    OFF exponent is exempt and contributes an exact zero.
    """
    if a == OFF:
        return 0
    y = diamond(a, x)
    if y == 0 and x != 0:
        return -1 if x > 0 else 1
    return y


@njit(cache=True, inline="always")
def coupling_term(a, s, x):
    """One entry of the state-transition product: sign * (a <><> x).

    The sign matrix scales the pass-through branch only.  The underflow
    unit step keeps its own orientation (toward zero when added), because
    flipping it with a negative decay sign would push small states away
    from rest and the decay couplings would never settle.
    """
    if a == OFF:
        return 0
    y = diamond(a, x)
    if y == 0 and x != 0:
        return -1 if x > 0 else 1
    return s * y


@njit(cache=True)
def shift_matvec(A, sA, x, out):
    """out_i = sum_j sA_ij * (A_ij <><> x_j), saturated to 16 bits.

    Rows index the destination component.  A is a matrix of shift
    exponents with OFF = -16 meaning "not coupled".
    """
    k = A.shape[0]
    for i in range(k):
        acc = 0
        for j in range(k):
            acc = sat16(acc + coupling_term(A[i, j], sA[i, j], x[j]))
        out[i] = acc


@njit(cache=True, inline="always")
def round_prob_bits(dw, r):
    """Split dw for randomized rounding: (dw >> r, unsigned low r bits)."""
    if r == 0:
        return dw, 0
    return dw >> r, dw & ((1 << r) - 1)


@njit(cache=True, inline="always")
def randomized_round(dw, r, u):
    """Randomized rounding of dw by r bits, given one uniform draw u.

    Returns (dw >> r) + 1 with probability p / 2**r where p is the
    unsigned value of the r low bits (arithmetic shift, so the expected
    value is exactly dw / 2**r for either sign).  r == 0 is the identity
    and ignores u.
    """
    if r == 0:
        return dw
    base = dw >> r
    p = dw & ((1 << r) - 1)
    if (u & ((1 << r) - 1)) < p:
        return base + 1
    return base


def shift_matvec_py(A, sA, x):
    """Convenience wrapper returning a fresh list (tests, small configs)."""
    import numpy as np

    A = np.asarray(A, dtype=np.int64)
    sA = np.asarray(sA, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    if A.shape[0] != A.shape[1] or A.shape != sA.shape or x.shape[0] != A.shape[0]:
        raise ValueError("shift_matvec needs square A, sA of equal shape and |x| = k")
    out = np.zeros(A.shape[0], dtype=np.int64)
    shift_matvec(A, sA, x, out)
    return out


@njit(cache=True)
def diamond_sweep(a, xs, out):
    """diamond(a, x) for every x in xs (exhaustive-oracle helper)."""
    for i in range(xs.shape[0]):
        out[i] = diamond(a, xs[i])


@njit(cache=True)
def diamonddiamond_sweep(a, xs, out):
    for i in range(xs.shape[0]):
        out[i] = diamonddiamond(a, xs[i])
