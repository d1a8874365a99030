"""Blocked Gibbs sampling for the multivalued-hidden RBM.

Every function takes a ``numpy.random.Generator`` and touches no other state,
so a seeded generator replays a trajectory exactly.  Inputs may be single
vectors or (batch, units) arrays; each row is an independent chain.
"""
import numpy as np

from .rbm import as_spins, lambda_of, xi_of
from .special import INF, sample_space

DEFAULT_BURN_IN = 1000
DEFAULT_THIN = 100

# below this |lambda| the continuous inverse CDF is replaced by its limit 2u - 1
_FLAT_FIELD = 1e-8


def make_rng(seed):
    return np.random.default_rng(np.random.PCG64(seed))


def sample_visible(xi, rng):
    """Spins with P(v = +1) = e^xi / (e^xi + e^-xi)."""
    xi = np.asarray(xi, dtype=np.float64)
    p_up = 0.5 * (1.0 + np.tanh(xi))
    return np.where(rng.random(xi.shape) < p_up, 1.0, -1.0)


def inverse_cdf_continuous(lam, u):
    """Inverse CDF of the density proportional to exp(lam * h) on [-1, 1]."""
    lam = np.asarray(lam, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    a = np.abs(lam)
    flat = a < _FLAT_FIELD
    a_safe = np.where(flat, 1.0, a)
    # sample for |lam| and mirror: h(-a, u) = -h(a, 1 - u)
    q = np.where(lam >= 0, 1.0 - u, u)
    # q = 1 with a huge field gives log1p(-1) = -inf, which clips to the -1 endpoint
    with np.errstate(divide="ignore"):
        h = 1.0 + np.log1p(q * np.expm1(-2.0 * a_safe)) / a_safe
    h = np.clip(h, -1.0, 1.0)
    h = np.where(lam >= 0, h, -h)
    return np.where(flat, 2.0 * u - 1.0, h)


def sample_hidden(s, lam, rng):
    """Draw h_j ~ exp(lam_j h) on the level grid of ``s``."""
    lam = np.asarray(lam, dtype=np.float64)
    u = rng.random(lam.shape)
    if s == INF:
        return inverse_cdf_continuous(lam, u)
    levels = sample_space(s)
    logits = lam[..., None] * levels
    logits -= logits.max(axis=-1, keepdims=True)
    cdf = np.cumsum(np.exp(logits), axis=-1)
    k = np.sum(cdf < (u * cdf[..., -1])[..., None], axis=-1)
    return levels[np.minimum(k, s)]


def sample_v_given_h(params, h, rng):
    return sample_visible(xi_of(params, h), rng)


def sample_h_given_v(params, v, rng):
    return sample_hidden(params.s, lambda_of(params, v), rng)


def gibbs_step(params, v, rng):
    """One blocked sweep v -> h -> v'; returns (v', h)."""
    h = sample_h_given_v(params, v, rng)
    return sample_v_given_h(params, h, rng), h


def run_chain(params, v, n_steps, rng):
    for _ in range(n_steps):
        v, _ = gibbs_step(params, v, rng)
    return v


def generate_dataset(params, n_points, rng, burn_in=DEFAULT_BURN_IN, thin=DEFAULT_THIN, v0=None):
    """Record every ``thin``-th state of a single chain after ``burn_in`` sweeps."""
    if n_points < 1 or burn_in < 0 or thin < 1:
        raise ValueError(f"invalid counts n_points={n_points} burn_in={burn_in} thin={thin}")
    if v0 is None:
        v = np.where(rng.random(params.n_visible) < 0.5, 1.0, -1.0)
    else:
        v = as_spins(v0, params.n_visible)[0]
    v = run_chain(params, v, burn_in, rng)
    out = np.empty((n_points, params.n_visible))
    for n in range(n_points):
        v = run_chain(params, v, thin, rng)
        out[n] = v
    return out
