"""Generalization and error metrics."""
from dataclasses import astuple, dataclass

import numpy as np

from .drbm import predict
from .rbm import CapacityError, MAX_ENUM_VISIBLE, log_marginal, spin_states


@dataclass(frozen=True)
class MetricsRecord:
    epoch: int
    metric: str
    value: float
    seed: int
    config_id: str

    def row(self):
        return astuple(self)


def kld(gen, trained):
    """Per-visible-unit KL divergence from ``gen`` to ``trained``, exact."""
    if gen.n_visible != trained.n_visible:
        raise ValueError(f"|V| mismatch: {gen.n_visible} vs {trained.n_visible}")
    n = gen.n_visible
    if n > MAX_ENUM_VISIBLE:
        raise CapacityError(f"exact KLD limited to |V| <= {MAX_ENUM_VISIBLE}")
    v = spin_states(n)
    lp = log_marginal(gen, v)
    lq = log_marginal(trained, v)
    return float(np.exp(lp) @ (lp - lq)) / n


def misclassification_rate(predicted, labels):
    """Fraction of mismatches, computed from an exact integer count."""
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("empty dataset")
    if predicted.shape != labels.shape:
        raise ValueError("prediction/label length mismatch")
    return int(np.count_nonzero(predicted != labels)) / labels.size


def drbm_error_rate(params, x, labels):
    return misclassification_rate(predict(params, x), labels)


def mean_and_se(values, axis=0):
    """Mean and standard error (ddof=1); SE is 0 for a single repetition."""
    a = np.asarray(values, dtype=np.float64)
    n = a.shape[axis]
    mean = a.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, a.std(axis=axis, ddof=1) / np.sqrt(n)
