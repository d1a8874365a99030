"""RBM with multivalued hidden units: energy, marginals and exact inference.

Visible units are spins in {-1, +1}; hidden units live on the level grid of
:mod:`mvrbm.special`.  Exact quantities enumerate the 2^|V| visible states
only; hidden units are summed out analytically through ``log_phi``/``psi``,
so the cost does not depend on ``s`` and ``s = inf`` is exact.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .special import check_levels, log_phi, psi

MAX_ENUM_VISIBLE = 24

# visible states processed per block during enumeration
_CHUNK_BITS = 14


class CapacityError(ValueError):
    """Raised when exact enumeration is requested beyond MAX_ENUM_VISIBLE."""


@dataclass(frozen=True, eq=False)
class RbmParams:
    """Visible bias ``b`` (|V|), hidden bias ``c`` (|H|), couplings ``W`` (|V| x |H|)."""

    b: np.ndarray
    c: np.ndarray
    W: np.ndarray
    s: object = 1

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        c = np.array(self.c, dtype=np.float64).reshape(-1)
        W = np.array(self.W, dtype=np.float64)
        if W.ndim != 2 or W.shape != (b.size, c.size):
            raise ValueError(f"W shape {W.shape} does not match |V|={b.size}, |H|={c.size}")
        if b.size < 1 or c.size < 1:
            raise ValueError("need at least one visible and one hidden unit")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c)) and np.all(np.isfinite(W))):
            raise ValueError("parameters must be finite")
        for a in (b, c, W):
            a.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "s", check_levels(self.s))

    @property
    def n_visible(self):
        return self.b.size

    @property
    def n_hidden(self):
        return self.c.size

    @property
    def arrays(self):
        return (self.b, self.c, self.W)

    def with_arrays(self, arrays):
        b, c, W = arrays
        return RbmParams(b, c, W, self.s)

    @classmethod
    def zeros(cls, n_visible, n_hidden, s=1):
        return cls(np.zeros(n_visible), np.zeros(n_hidden), np.zeros((n_visible, n_hidden)), s)

    def __eq__(self, other):
        if not isinstance(other, RbmParams):
            return NotImplemented
        return self.s == other.s and all(
            np.array_equal(x, y) for x, y in zip(self.arrays, other.arrays))


class RbmGradient(NamedTuple):
    b: np.ndarray
    c: np.ndarray
    W: np.ndarray


class ExactMoments(NamedTuple):
    mean_v: np.ndarray
    mean_h: np.ndarray
    corr_vh: np.ndarray


def as_spins(data, n_visible=None):
    """Validate a (N, |V|) array of +-1 spins and return it as float64."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("spin dataset must be a non-empty (N, |V|) array")
    if n_visible is not None and arr.shape[1] != n_visible:
        raise ValueError(f"expected {n_visible} visible units, got {arr.shape[1]}")
    if not np.all(np.abs(arr) == 1.0):
        raise ValueError("visible entries must be exactly -1 or +1")
    return arr


def _vec(x, size, what):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != size:
        raise ValueError(f"{what} has length {x.shape[-1]}, expected {size}")
    return x


def energy(params, v, h):
    v = _vec(v, params.n_visible, "v")
    h = _vec(h, params.n_hidden, "h")
    return -(v @ params.b) - (h @ params.c) - np.einsum("...i,ij,...j->...", v, params.W, h)


def lambda_of(params, v):
    """Hidden fields c_j + sum_i w_ij v_i; works on single vectors or batches."""
    v = _vec(v, params.n_visible, "v")
    return params.c + v @ params.W


def xi_of(params, h):
    """Visible fields b_i + sum_j w_ij h_j."""
    h = _vec(h, params.n_hidden, "h")
    return params.b + h @ params.W.T


def log_marginal_unnormalized(params, v):
    v = _vec(v, params.n_visible, "v")
    return v @ params.b + np.sum(log_phi(params.s, lambda_of(params, v)), axis=-1)


def spin_states(n, start=0, stop=None):
    """Rows of {-1,+1}^n in binary-counting order (bit 0 = last unit)."""
    stop = 2 ** n if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return 2.0 * bits - 1.0


def _check_capacity(params):
    if params.n_visible > MAX_ENUM_VISIBLE:
        raise CapacityError(
            f"exact enumeration limited to |V| <= {MAX_ENUM_VISIBLE}, got {params.n_visible}")


def _chunks(n):
    total = 2 ** n
    step = 2 ** _CHUNK_BITS
    for start in range(0, total, step):
        yield spin_states(n, start, min(total, start + step))


def log_partition_exact(params):
    _check_capacity(params)
    parts = [logsumexp(log_marginal_unnormalized(params, v)) for v in _chunks(params.n_visible)]
    return float(logsumexp(parts))


def log_marginal(params, v, log_z=None):
    """Normalized ln P_s(v)."""
    if log_z is None:
        log_z = log_partition_exact(params)
    return log_marginal_unnormalized(params, v) - log_z


def exact_moments(params):
    _check_capacity(params)
    log_z = log_partition_exact(params)
    mean_v = np.zeros(params.n_visible)
    mean_h = np.zeros(params.n_hidden)
    corr = np.zeros((params.n_visible, params.n_hidden))
    for v in _chunks(params.n_visible):
        p = np.exp(log_marginal_unnormalized(params, v) - log_z)
        m = psi(params.s, lambda_of(params, v))
        mean_v += p @ v
        mean_h += p @ m
        corr += (v * p[:, None]).T @ m
    return ExactMoments(mean_v, mean_h, corr)


def data_statistics(params, data):
    """Data-side averages of v_i, psi(lambda_j) and v_i psi(lambda_j)."""
    data = as_spins(data, params.n_visible)
    m = psi(params.s, lambda_of(params, data))
    n = data.shape[0]
    return ExactMoments(data.mean(axis=0), m.mean(axis=0), data.T @ m / n)


def log_likelihood(params, data):
    data = as_spins(data, params.n_visible)
    return float(np.mean(log_marginal_unnormalized(params, data)) - log_partition_exact(params))


def exact_gradient(params, data):
    pos = data_statistics(params, data)
    neg = exact_moments(params)
    return RbmGradient(pos.mean_v - neg.mean_v, pos.mean_h - neg.mean_h, pos.corr_vh - neg.corr_vh)
