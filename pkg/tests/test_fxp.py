"""Shift-operator semantics against independent straight-line references."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsat import fxp
from nsat.fxp import OFF, XMIN, XMAX, clip, diamond, diamonddiamond, randomized_round, shift_matvec_py
from nsat.rng import RngStream


# ---------------------------------------------------------------------------
# independent references (math formulation, no shift tricks)

def ref_diamond_vec(a, xs):
    xs = xs.astype(np.float64)
    if a >= 0:
        return np.clip(xs * (2.0 ** a), XMIN, XMAX).astype(np.int64)
    return np.trunc(xs / (2.0 ** (-a))).astype(np.int64)


def ref_dd_vec(a, xs):
    if a == OFF:
        return np.zeros(len(xs), dtype=np.int64)
    y = ref_diamond_vec(a, xs)
    under = (y == 0) & (xs != 0)
    y[under] = -np.sign(xs[under])
    return y


ALL_X = np.arange(XMIN, XMAX + 1, dtype=np.int64)


def test_diamond_exhaustive_oracle():
    out = np.zeros_like(ALL_X)
    for a in range(-16, 16):
        fxp.diamond_sweep(a, ALL_X, out)
        assert np.array_equal(out, ref_diamond_vec(a, ALL_X)), f"diamond mismatch at a={a}"


def test_diamonddiamond_exhaustive_oracle():
    out = np.zeros_like(ALL_X)
    for a in range(-16, 16):
        fxp.diamonddiamond_sweep(a, ALL_X, out)
        assert np.array_equal(out, ref_dd_vec(a, ALL_X)), f"diamonddiamond mismatch at a={a}"


# ---------------------------------------------------------------------------
# pinned examples

def test_diamond_examples():
    assert diamond(2, 3) == 12
    assert diamond(-2, -7) == -1        # rounds toward zero, not -2
    assert diamond(-4, 15) == 0         # underflow gives 0, not -1
    assert diamond(0, -9) == -9
    assert diamond(15, 2) == XMAX       # saturation
    assert diamond(15, -2) == XMIN


def test_diamonddiamond_examples():
    assert diamonddiamond(-4, 5) == -1      # underflow unit step, sign(-x)
    assert diamonddiamond(-4, -5) == 1
    assert diamonddiamond(-3, -64) == -8    # pass-through
    assert diamonddiamond(-4, 0) == 0
    assert diamonddiamond(OFF, 12345) == 0  # OFF bypasses the unit step


def test_clip_examples():
    assert clip(200, -128, 127) == 127
    assert clip(-500, -128, 127) == -128
    assert clip(5, -128, 127) == 5


def test_shift_matvec_examples():
    assert shift_matvec_py([[-4]], [[-1]], [1024]).tolist() == [-64]
    # MNN tonic first row, membrane component only
    row = shift_matvec_py([[-4, OFF, OFF, OFF]] * 4, [[-1, 1, 1, 1]] * 4,
                          [-7000, -5000, 100, 10])
    assert row[0] == 437
    # all OFF is the zero map
    z = shift_matvec_py([[OFF] * 4] * 4, [[1] * 4] * 4, [123, -456, 789, XMIN])
    assert z.tolist() == [0, 0, 0, 0]


def test_shift_matvec_rejects_bad_shapes():
    with pytest.raises(ValueError):
        shift_matvec_py([[0, 0, 0], [0, 0, 0], [0, 0, 0], [0, 0, 0]],
                        [[1, 1, 1]] * 4, [1, 2, 3])


# ---------------------------------------------------------------------------
# properties

@given(st.integers(-16, -1), st.integers(XMIN, XMAX))
def test_diamond_is_truncated_division(a, x):
    assert diamond(a, x) == int(np.trunc(x / 2.0 ** (-a)))


@given(st.integers(-16, -1), st.integers(XMIN, XMAX))
def test_small_values_shift_to_zero(a, x):
    if abs(x) < 2 ** (-a):
        assert diamond(a, x) == 0


@given(st.integers(-15, 0), st.integers(XMIN, XMAX))
@settings(max_examples=200, deadline=None)
def test_negative_diagonal_leak_reaches_zero(a, x0):
    """x + row-contribution with sign -1 walks monotonically to 0 and stays.

    OFF (-16) is exempt: a disconnected coupling contributes exactly 0.
    """
    x = x0
    for _ in range(70000):
        nx = int(np.clip(x + fxp.coupling_term(a, -1, x), XMIN, XMAX))
        if x == 0:
            assert nx == 0
            break
        assert abs(nx) < abs(x), (a, x0, x, nx)
        x = nx
    else:
        pytest.fail(f"leak did not reach zero for a={a}, x0={x0}")


@given(st.integers(XMIN // 4, XMAX // 4), st.integers(0, 12))
@settings(max_examples=60, deadline=None)
def test_randomized_round_expectation(dw, r):
    stream = RngStream(seed=99, sequence=7)
    n = 20000
    acc = 0
    for _ in range(n):
        acc += randomized_round(dw, r, stream.next_uniform())
    mean = acc / n
    exact = dw / 2 ** r
    p = (dw & ((1 << r) - 1)) / 2 ** r if r else 0.0
    sigma = np.sqrt(max(p * (1 - p), 1e-12) / n)
    assert abs(mean - exact) <= 4 * sigma + 1e-9, (dw, r, mean, exact)


def test_randomized_round_examples():
    # (6, 2): 1 or 2 with equal probability
    draws = {randomized_round(6, 2, u) for u in range(4)}
    assert draws == {1, 2}
    # (8, 2): low bits zero, always exact
    assert all(randomized_round(8, 2, u) == 2 for u in range(4))
    # (-6, 2): -2 or -1, expectation -1.5
    draws = [randomized_round(-6, 2, u) for u in range(4)]
    assert set(draws) == {-2, -1} and sum(draws) / 4 == -1.5
    # r = 0 identity
    assert randomized_round(-6, 0, 1234) == -6
