"""Restricted Boltzmann machines with multivalued hidden units."""
from .drbm import DrbmParams, class_log_probs, drbm_gradient, drbm_log_likelihood, predict
from .rbm import (RbmParams, exact_gradient, exact_moments, log_likelihood, log_partition_exact,
                  log_marginal_unnormalized)
from .special import INF, log_phi, psi, sample_space
from .toy import ToySpec, alpha, solve_w_star, toy_log_likelihood

__version__ = "0.1.0"
