"""Two-visible toy RBM: pair correlation alpha_s(w), its log-likelihood and maximizer.

The toy model has a single shared coupling ``w`` between both visible spins
and every hidden unit and no biases.  Its visible marginal is fixed by the
pair correlation ``alpha_s(w)``; fitting data with zero means and pair
correlation ``beta`` amounts to solving ``alpha_s(w) = beta``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .special import LN2, check_levels, log_phi

W_STAR_BRACKET = 64.0
W_STAR_TOL = 1e-10


@dataclass(frozen=True)
class ToySpec:
    s: object = 1
    n_hidden: int = 2
    beta: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "s", check_levels(self.s))
        if self.n_hidden < 1:
            raise ValueError("n_hidden must be >= 1")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")


def alpha(spec, w):
    """Visible pair correlation; tanh form of the ratio of exponentials."""
    w = np.asarray(w, dtype=np.float64)
    out = np.tanh(0.5 * spec.n_hidden * (log_phi(spec.s, 2.0 * w) - LN2))
    return float(out) if out.ndim == 0 else out


def solve_w_star(spec, tol=W_STAR_TOL):
    """Non-negative root of alpha_s(w) = beta by bisection on [0, 64]."""
    beta = spec.beta
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if beta == 0.0:
        return 0.0
    lo, hi = 0.0, W_STAR_BRACKET
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if alpha(spec, mid) < beta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def toy_log_likelihood(spec, w):
    a = np.asarray(alpha(spec, w))
    beta = spec.beta
    # v1 v2 = +1 for two of the four states, -1 for the other two
    out = (2.0 * (1.0 + beta) / 4.0 * np.log((1.0 + a) / 4.0)
           + 2.0 * (1.0 - beta) / 4.0 * np.log((1.0 - a) / 4.0))
    return float(out) if out.ndim == 0 else out


def optimum_log_likelihood(beta):
    """Toy log-likelihood at alpha = beta; independent of s and |H|."""
    if beta == 0.0:
        return math.log(0.25)
    return ((1 + beta) / 2) * math.log((1 + beta) / 4) + ((1 - beta) / 2) * math.log((1 - beta) / 4)
