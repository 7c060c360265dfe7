"""Deterministic random number backends.

Two interchangeable 32-bit uniform generators sit behind one interface:

* ``software`` -- a permuted congruential generator (64-bit state, 32-bit
  XSH-RR output) with a Box-Muller transform for normal draws.
* ``hardware`` -- a bit-level model of the register pair used in the
  digital design: a 43-bit maximal-length LFSR XOR-combined with a
  37-cell rule-90/150 hybrid cellular-automata shift register.  Normal
  draws use a centered sum of four uniforms (central-limit
  approximation), scaled so the standard deviation is exactly 2**sigma.

Register polynomials are repo constants, not tunables: LFSR feedback
taps {43, 41, 20, 1}; CASR null-boundary rule 90 with rule 150 at cell
27.  A stream is fully described by (backend, seed, sequence): equal
triples replay bit-identically, and the raw register words can be
checkpointed and restored mid-stream.

One stream is owned by exactly one simulation core and never shared.
"""

import math

import numpy as np
from numba import njit

from .fxp import OFF, sat16

SOFTWARE = 0
HARDWARE = 1

_PCG_MULT = np.uint64(6364136223846793005)

_LFSR_BITS = 43
_LFSR_TAPS = (43, 41, 20, 1)
_LFSR_TAP_MASK = np.uint64(sum(1 << (t - 1) for t in _LFSR_TAPS))
_LFSR_MASK = np.uint64((1 << _LFSR_BITS) - 1)

_CASR_BITS = 37
_CASR_RULE150_CELL = 27
_CASR_MASK = np.uint64((1 << _CASR_BITS) - 1)
_CASR_150_MASK = np.uint64(1 << _CASR_RULE150_CELL)


@njit(cache=True, inline="always")
def _pcg32(words):
    old = words[0]
    words[0] = old * np.uint64(6364136223846793005) + words[1]
    xorshifted = np.uint32(((old >> np.uint64(18)) ^ old) >> np.uint64(27))
    rot = np.uint32(old >> np.uint64(59))
    return np.uint32((xorshifted >> rot) | (xorshifted << ((np.uint32(32) - rot) & np.uint32(31))))


@njit(cache=True, inline="always")
def _parity(v):
    v ^= v >> np.uint64(32)
    v ^= v >> np.uint64(16)
    v ^= v >> np.uint64(8)
    v ^= v >> np.uint64(4)
    v ^= v >> np.uint64(2)
    v ^= v >> np.uint64(1)
    return v & np.uint64(1)


@njit(cache=True, inline="always")
def _lfsr_casr(words):
    lfsr = words[0]
    fb = _parity(lfsr & np.uint64(0x50000080001))
    lfsr = (lfsr >> np.uint64(1)) | (fb << np.uint64(42))
    words[0] = lfsr

    casr = words[1]
    mask37 = np.uint64((1 << 37) - 1)
    nxt = ((casr >> np.uint64(1)) ^ ((casr << np.uint64(1)) & mask37)) ^ (casr & np.uint64(1 << 27))
    words[1] = nxt

    return np.uint32((lfsr ^ nxt) & np.uint64(0xFFFFFFFF))


@njit(cache=True, inline="always")
def stream_next(kind, words):
    """Advance the stream one step and return a 32-bit uniform."""
    if kind == 0:
        return _pcg32(words)
    return _lfsr_casr(words)


@njit(cache=True, inline="always")
def stream_normal(kind, words, sigma_exp):
    """Zero-mean integer draw with standard deviation 2**sigma_exp.

    sigma_exp == OFF draws nothing and returns 0.  The software backend
    uses Box-Muller on two fresh uniforms (the spare cosine partner is
    discarded to keep the stream state a plain register file); the
    hardware backend sums four uniforms.
    """
    if sigma_exp == OFF:
        return 0
    scale = 2.0 ** sigma_exp
    if kind == 0:
        u1 = (np.float64(_pcg32(words)) + 1.0) * (2.0 ** -32)
        u2 = np.float64(_pcg32(words)) * (2.0 ** -32)
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    else:
        s = 0.0
        for _ in range(4):
            s += np.float64(_lfsr_casr(words))
        c = s - (2.0 ** 33 - 2.0)
        z = c * math.sqrt(3.0) * (2.0 ** -32)
    v = z * scale
    iv = np.int64(math.floor(v + 0.5))
    return sat16(iv)


@njit(cache=True, inline="always")
def stream_keep(kind, words, prob):
    """Blank-out draw: True with probability (prob + 1) / 16.

    prob == 15 short-circuits without consuming a draw, so fully
    reliable components cost nothing and leave the stream untouched.
    """
    if prob >= 15:
        return True
    u = stream_next(kind, words)
    return ((u >> np.uint32(28)) & np.uint32(0xF)) <= np.uint32(prob)


@njit(cache=True)
def _splitmix64(v):
    v = v + np.uint64(0x9E3779B97F4A7C15)
    z = v
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31)), v


@njit(cache=True)
def _seed_into(backend, seed, sequence, words):
    if backend == 0:
        words[0] = np.uint64(0)
        words[1] = (sequence << np.uint64(1)) | np.uint64(1)
        _pcg32(words)
        words[0] = words[0] + seed
        _pcg32(words)
    else:
        sm = seed ^ (sequence * np.uint64(0xDA942042E4DD58B5))
        a, sm = _splitmix64(sm)
        b, sm = _splitmix64(sm)
        words[0] = a & np.uint64((1 << 43) - 1)
        words[1] = b & np.uint64((1 << 37) - 1)
        if words[0] == np.uint64(0):
            words[0] = np.uint64(1)
        if words[1] == np.uint64(0):
            words[1] = np.uint64(1)


def seed_words(backend, seed, sequence):
    """Derive the initial register words for (backend, seed, sequence)."""
    words = np.zeros(2, dtype=np.uint64)
    _seed_into(backend, np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
               np.uint64(sequence & 0xFFFFFFFFFFFFFFFF), words)
    return words


class RngStream:
    """One deterministic stream: (backend, seed, sequence) fixes everything."""

    def __init__(self, backend=SOFTWARE, seed=0, sequence=0):
        if backend not in (SOFTWARE, HARDWARE):
            raise ValueError(f"unknown rng backend {backend!r}")
        self.backend = backend
        self.seed = int(seed)
        self.sequence = int(sequence)
        self.words = seed_words(backend, self.seed, self.sequence)

    @classmethod
    def from_name(cls, name, seed=0, sequence=0):
        kinds = {"software": SOFTWARE, "hardware": HARDWARE}
        if name not in kinds:
            raise ValueError(f"rng backend must be software or hardware, got {name!r}")
        return cls(kinds[name], seed, sequence)

    def next_uniform(self):
        return int(stream_next(self.backend, self.words))

    def next_normal(self, sigma_exp):
        return int(stream_normal(self.backend, self.words, sigma_exp))

    def blankout_keep(self, prob):
        if not 0 <= prob <= 15:
            raise ValueError("blank-out prob is a 4-bit value")
        return bool(stream_keep(self.backend, self.words, prob))

    def getstate(self):
        return (self.backend, int(self.words[0]), int(self.words[1]))

    def setstate(self, state):
        backend, w0, w1 = state
        self.backend = backend
        self.words = np.array([w0, w1], dtype=np.uint64)
