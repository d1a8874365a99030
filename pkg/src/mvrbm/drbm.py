"""Discriminative RBM over 1-of-K labels with multivalued hidden units.

Labels are stored as integer class indices.  The 1-of-K vector only enters
the model through which column of ``W2`` is added to the hidden field, so
every per-class quantity is computed for all K classes at once as an array
of shape (batch, K, |H|).
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .sampler import make_rng
from .special import check_levels, log_phi, psi
from .trainer import minibatches, optimizer_step, xavier_uniform


@dataclass(frozen=True, eq=False)
class DrbmParams:
    """Class bias ``b`` (K), hidden bias ``c`` (|H|), ``W1`` (n x |H|), ``W2`` (|H| x K)."""

    b: np.ndarray
    c: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    s: object = 1

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        c = np.array(self.c, dtype=np.float64).reshape(-1)
        W1 = np.array(self.W1, dtype=np.float64)
        W2 = np.array(self.W2, dtype=np.float64)
        if b.size < 2 or c.size < 1:
            raise ValueError("need K >= 2 classes and |H| >= 1")
        if W1.ndim != 2 or W1.shape[1] != c.size or W1.shape[0] < 1:
            raise ValueError(f"W1 shape {W1.shape} incompatible with |H|={c.size}")
        if W2.shape != (c.size, b.size):
            raise ValueError(f"W2 shape {W2.shape} != ({c.size}, {b.size})")
        for a in (b, c, W1, W2):
            if not np.all(np.isfinite(a)):
                raise ValueError("parameters must be finite")
            a.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "W2", W2)
        object.__setattr__(self, "s", check_levels(self.s))

    @property
    def n_classes(self):
        return self.b.size

    @property
    def n_hidden(self):
        return self.c.size

    @property
    def n_inputs(self):
        return self.W1.shape[0]

    @property
    def arrays(self):
        return (self.b, self.c, self.W1, self.W2)

    def with_arrays(self, arrays):
        return DrbmParams(*arrays, s=self.s)

    @classmethod
    def zeros(cls, n_inputs, n_hidden, n_classes, s=1):
        return cls(np.zeros(n_classes), np.zeros(n_hidden),
                   np.zeros((n_inputs, n_hidden)), np.zeros((n_hidden, n_classes)), s)

    def __eq__(self, other):
        if not isinstance(other, DrbmParams):
            return NotImplemented
        return self.s == other.s and all(
            np.array_equal(x, y) for x, y in zip(self.arrays, other.arrays))


class DrbmGradient(NamedTuple):
    b: np.ndarray
    c: np.ndarray
    W1: np.ndarray
    W2: np.ndarray


def init_drbm(n_inputs, n_hidden, n_classes, s, rng):
    """Zero biases; Xavier couplings with each block's own fan sizes."""
    W1 = xavier_uniform(rng, n_inputs, n_hidden)
    W2 = xavier_uniform(rng, n_hidden, n_classes)
    return DrbmParams(np.zeros(n_classes), np.zeros(n_hidden), W1, W2, s)


def _inputs(params, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.n_inputs:
        raise ValueError(f"inputs must have {params.n_inputs} features, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("inputs must be finite")
    return x, single


def _labels(params, labels, n):
    t = np.asarray(labels)
    if t.shape != (n,) or not np.issubdtype(t.dtype, np.integer):
        raise ValueError("labels must be an integer vector matching the inputs")
    if np.any(t < 0) or np.any(t >= params.n_classes):
        raise ValueError("label index out of range")
    return t.astype(np.intp)


def zeta(params, k, x):
    """Hidden field for class ``k``: c_j + W2[j, k] + sum_i W1[i, j] x_i."""
    if not 0 <= k < params.n_classes:
        raise IndexError(f"class index {k} out of range")
    x = np.asarray(x, dtype=np.float64)
    return params.c + params.W2[:, k] + x @ params.W1


def all_zeta(params, x):
    """Hidden fields for every class, shape (batch, K, |H|)."""
    base = params.c + x @ params.W1
    return base[:, None, :] + params.W2.T[None, :, :]


def _log_probs_from_zeta(params, z):
    scores = params.b + np.sum(log_phi(params.s, z), axis=-1)
    return scores - logsumexp(scores, axis=-1, keepdims=True)


def class_log_probs(params, x):
    x, single = _inputs(params, x)
    out = _log_probs_from_zeta(params, all_zeta(params, x))
    return out[0] if single else out


def predict(params, x):
    """Most probable class; argmax takes the lowest index on ties."""
    lp = class_log_probs(params, x)
    return np.argmax(lp, axis=-1)


def drbm_log_likelihood(params, x, labels):
    x, _ = _inputs(params, x)
    t = _labels(params, labels, x.shape[0])
    lp = class_log_probs(params, x)
    return float(np.mean(lp[np.arange(t.size), t]))


def drbm_gradient(params, x, labels):
    """Exact gradient of the mean conditional log-likelihood."""
    x, _ = _inputs(params, x)
    t = _labels(params, labels, x.shape[0])
    n = x.shape[0]
    z = all_zeta(params, x)
    p = np.exp(_log_probs_from_zeta(params, z))      # (N, K)
    m = psi(params.s, z)                             # (N, K, H)
    onehot = np.zeros_like(p)
    onehot[np.arange(n), t] = 1.0
    resid = onehot - p                               # t_k - P(1_k | x)
    # psi at the true label minus its class expectation
    hid = m[np.arange(n), t] - np.einsum("nk,nkh->nh", p, m)

    grad_b = resid.mean(axis=0)
    grad_c = hid.mean(axis=0)
    grad_W1 = x.T @ hid / n
    grad_W2 = np.einsum("nkh,nk->hk", m, resid) / n
    return DrbmGradient(grad_b, grad_c, grad_W1, grad_W2)


def train_drbm(model, x, labels, cfg, observer=None, rng=None):
    """Mini-batch gradient ascent on the exact DRBM gradient.

    Same loop contract as :func:`mvrbm.trainer.train`: the observer sees
    epoch 0 and then every completed epoch.
    """
    x, _ = _inputs(model, x)
    labels = _labels(model, labels, x.shape[0])
    rng = make_rng(cfg.seed) if rng is None else rng
    state = cfg.new_optimizer()
    params = model
    records = []

    def observe(epoch):
        if observer is not None:
            rec = observer(epoch, params)
            if rec is not None:
                records.append(rec)

    observe(0)
    for epoch in range(1, cfg.epochs + 1):
        for idx in minibatches(x.shape[0], cfg.batch_size, rng):
            grad = drbm_gradient(params, x[idx], labels[idx])
            arrays, state = optimizer_step(state, params.arrays, grad)
            params = params.with_arrays(arrays)
        observe(epoch)
    return params, records
