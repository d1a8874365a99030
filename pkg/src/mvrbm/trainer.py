"""Initialization, contrastive-divergence gradients, Adam/AdaMax and the training loop."""
from dataclasses import dataclass, field, replace

import numpy as np

from .rbm import RbmGradient, RbmParams, as_spins, data_statistics, lambda_of
from .sampler import make_rng, run_chain
from .special import psi


def xavier_bound(fan_in, fan_out):
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def xavier_uniform(rng, fan_in, fan_out):
    r = xavier_bound(fan_in, fan_out)
    return rng.uniform(-r, r, size=(fan_in, fan_out))


def init_generative(n_visible, n_hidden, s, rng, bias_sd=0.1):
    """Gaussian(0, 0.1^2) biases and Xavier-uniform couplings."""
    b = rng.normal(0.0, bias_sd, size=n_visible)
    c = rng.normal(0.0, bias_sd, size=n_hidden)
    W = xavier_uniform(rng, n_visible, n_hidden)
    return RbmParams(b, c, W, s)


def init_trainee(n_visible, n_hidden, s, rng):
    """Zero biases and Xavier-uniform couplings."""
    W = xavier_uniform(rng, n_visible, n_hidden)
    return RbmParams(np.zeros(n_visible), np.zeros(n_hidden), W, s)


def cd_gradient(params, batch, k, rng):
    """CD-k estimate of the log-likelihood gradient.

    Positive phase uses the data exactly.  Each negative chain starts at its
    data point and runs ``k`` blocked Gibbs sweeps; the hidden units of the
    final visible state enter through psi(lambda) rather than a sampled h.
    """
    if k < 1:
        raise ValueError(f"CD order must be >= 1, got {k}")
    batch = as_spins(batch, params.n_visible)
    pos = data_statistics(params, batch)
    v_neg = run_chain(params, batch, k, rng)
    m_neg = psi(params.s, lambda_of(params, v_neg))
    n = batch.shape[0]
    return RbmGradient(
        pos.mean_v - v_neg.mean(axis=0),
        pos.mean_h - m_neg.mean(axis=0),
        pos.corr_vh - v_neg.T @ m_neg / n,
    )


@dataclass
class OptimizerState:
    kind: str = "adam"
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    u: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("adam", "adamax"):
            raise ValueError(f"unknown optimizer {self.kind!r}")


def optimizer_step(state, params, grad):
    """One gradient-ascent update; returns (new_arrays, new_state).

    ``params`` and ``grad`` are sequences of arrays with matching shapes.
    The input state is left untouched, so a rejected gradient loses nothing.
    """
    grad = [np.asarray(g, dtype=np.float64) for g in grad]
    params = [np.asarray(p, dtype=np.float64) for p in params]
    if len(grad) != len(params) or any(g.shape != p.shape for g, p in zip(grad, params)):
        raise ValueError("gradient does not match parameter shapes")
    if not all(np.all(np.isfinite(g)) for g in grad):
        raise FloatingPointError("non-finite gradient")

    m = state.m or [np.zeros_like(p) for p in params]
    u = state.u or [np.zeros_like(p) for p in params]
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_u, new_p = [], [], []
    for p, g, m_i, u_i in zip(params, grad, m, u):
        m_i = b1 * m_i + (1.0 - b1) * g
        if state.kind == "adam":
            u_i = b2 * u_i + (1.0 - b2) * g * g
            m_hat = m_i / (1.0 - b1 ** t)
            u_hat = u_i / (1.0 - b2 ** t)
            p = p + state.alpha * m_hat / (np.sqrt(u_hat) + state.eps)
        else:
            u_i = np.maximum(b2 * u_i, np.abs(g))
            # coordinates that never saw a gradient have m = u = 0; leave them
            safe = np.where(u_i > 0, u_i, 1.0)
            p = p + (state.alpha / (1.0 - b1 ** t)) * m_i / safe
        new_m.append(m_i)
        new_u.append(u_i)
        new_p.append(p)
    return new_p, replace(state, step=t, m=new_m, u=new_u)


@dataclass
class TrainConfig:
    optimizer: str = "adam"
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 1000
    batch_size: int = 0  # 0 = full batch
    cd_k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.cd_k < 1:
            raise ValueError("cd_k must be >= 1")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")

    def new_optimizer(self):
        return OptimizerState(self.optimizer, self.alpha, self.beta1, self.beta2, self.eps)


def minibatches(n, batch_size, rng):
    """Index blocks for one epoch; full batch keeps data order."""
    if batch_size == 0 or batch_size >= n:
        return [np.arange(n)]
    order = rng.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def train(model, data, cfg, observer=None, rng=None):
    """CD training; returns (params, list of observer results).

    ``observer(epoch, params)`` is called with epoch 0 before any update and
    after every epoch; its non-None return values are collected.
    """
    data = as_spins(data, model.n_visible)
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
        for idx in minibatches(data.shape[0], cfg.batch_size, rng):
            grad = cd_gradient(params, data[idx], cfg.cd_k, rng)
            arrays, state = optimizer_step(state, params.arrays, grad)
            params = params.with_arrays(arrays)
        observe(epoch)
    return params, records
