"""Float reference trainer: the multiply-accumulate counting oracle.

A plain two-layer network (input-H-10, rectified hidden, softmax output)
trained with mini-batch SGD and exact gradients.  Its only role is to
provide the (test error, cumulative MACs) trace that the synaptic-op
comparison report pairs against spiking runs; only multiplies inside the
matrix products are counted, ignoring additions and nonlinearities,
which favors the reference side of the comparison.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ReferenceTrace:
    hidden: int
    errors: list = field(default_factory=list)      # test error after each epoch
    macs: list = field(default_factory=list)        # cumulative MACs at those points


def _macs_per_sample(n_in, n_hid, n_out):
    forward = n_in * n_hid + n_hid * n_out
    backward = n_hid * n_out + n_in * n_hid + n_hid * n_out
    return forward + backward


def train_reference(train, test, hidden=100, epochs=10, batch=30, lr=0.1, seed=3):
    """Train on (images, labels) and return a ReferenceTrace."""
    xtr = train[0].reshape(len(train[0]), -1).astype(np.float64) / 255.0
    ytr = train[1].astype(np.int64)
    xte = test[0].reshape(len(test[0]), -1).astype(np.float64) / 255.0
    yte = test[1].astype(np.int64)
    n_in = xtr.shape[1]
    n_out = 10
    rng = np.random.default_rng(seed)
    w1 = rng.normal(0, 1.0 / np.sqrt(n_in), (n_in, hidden))
    w2 = rng.normal(0, 1.0 / np.sqrt(hidden), (hidden, n_out))
    b1 = np.zeros(hidden)
    b2 = np.zeros(n_out)
    per_sample = _macs_per_sample(n_in, hidden, n_out)
    trace = ReferenceTrace(hidden=hidden)
    total_macs = 0

    def test_error():
        h = np.maximum(xte @ w1 + b1, 0)
        pred = (h @ w2 + b2).argmax(axis=1)
        return float((pred != yte).mean())

    for epoch in range(epochs):
        order = rng.permutation(len(xtr))
        for start in range(0, len(xtr), batch):
            idx = order[start:start + batch]
            x, y = xtr[idx], ytr[idx]
            h_pre = x @ w1 + b1
            h = np.maximum(h_pre, 0)
            logits = h @ w2 + b2
            z = logits - logits.max(axis=1, keepdims=True)
            p = np.exp(z)
            p /= p.sum(axis=1, keepdims=True)
            p[np.arange(len(y)), y] -= 1.0
            p /= len(y)
            gw2 = h.T @ p
            dh = (p @ w2.T) * (h_pre > 0)
            gw1 = x.T @ dh
            w2 -= lr * gw2
            b2 -= lr * p.sum(axis=0)
            w1 -= lr * gw1
            b1 -= lr * dh.sum(axis=0)
            total_macs += per_sample * len(idx)
        trace.errors.append(test_error())
        trace.macs.append(total_macs)
    return trace
