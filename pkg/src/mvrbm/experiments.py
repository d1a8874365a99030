"""Experiment configs and runners: artificial-data over-fitting, toy curves, MNIST DRBM.

Runners write CSV files (header ``epoch,metric,value,seed,config_id``) plus a
``metadata.json`` echoing the full config.  Repetition ``r`` draws all of its
randomness from ``SeedSequence(seed).spawn(reps)[r]``, so output depends only
on the config and not on worker scheduling.  Within one repetition every
``s`` starts from the same initial couplings and noise stream.
"""
import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import data_io
from .drbm import init_drbm, train_drbm
from .metrics import MetricsRecord, drbm_error_rate, kld, mean_and_se
from .rbm import log_likelihood
from .sampler import DEFAULT_BURN_IN, DEFAULT_THIN, generate_dataset, make_rng
from .special import INF, check_levels, format_levels
from .toy import ToySpec, alpha, solve_w_star, toy_log_likelihood
from .trainer import TrainConfig, init_generative, init_trainee, train

log = logging.getLogger(__name__)

DEFAULT_REPS = {"artificial": 300, "mnist": 120}

MNIST_TRAIN_DEFAULTS = {"optimizer": "adamax", "batch_size": 100, "epochs": 100}


class ConfigError(ValueError):
    pass


class RepetitionError(RuntimeError):
    pass


@dataclass
class ModelShape:
    n_visible: int = 8
    gen_hidden: int = 4
    gen_s: object = 1
    extra_hidden: int = 5  # R: trainee has gen_hidden + R hidden units
    s_list: list = field(default_factory=lambda: [1, 2, 4, INF])


@dataclass
class DataParams:
    n_points: int = 200
    burn_in: int = DEFAULT_BURN_IN
    thin: int = DEFAULT_THIN


@dataclass
class ToyParams:
    n_hidden: int = 2
    s_list: list = field(default_factory=lambda: [1, 2, 4, INF])
    betas: list = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    curve_beta: float = 0.6
    w_min: float = -3.0
    w_max: float = 3.0
    w_points: int = 601


@dataclass
class MnistParams:
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    n_train: int = 1000
    n_test: int = 0  # 0 = whole test set
    n_hidden: int = 200
    sigma: float = 120.0
    s_list: list = field(default_factory=lambda: [1, INF])


@dataclass
class ExperimentConfig:
    kind: str = "artificial"
    seed: int = 0
    reps: int = 300
    out: str = "runs/artificial"
    workers: int = 1
    eval_every: int = 1
    model: ModelShape = field(default_factory=ModelShape)
    data: DataParams = field(default_factory=DataParams)
    train: TrainConfig = field(default_factory=TrainConfig)
    toy: ToyParams = field(default_factory=ToyParams)
    mnist: MnistParams = field(default_factory=MnistParams)

    def validate(self):
        if self.kind not in ("artificial", "toy", "mnist"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.eval_every < 1 or self.workers < 1:
            raise ConfigError("eval_every and workers must be >= 1")
        self.model.s_list = [check_levels(s) for s in self.model.s_list]
        self.model.gen_s = check_levels(self.model.gen_s)
        self.toy.s_list = [check_levels(s) for s in self.toy.s_list]
        self.mnist.s_list = [check_levels(s) for s in self.mnist.s_list]
        for sec in ("model", "toy", "mnist"):
            levels = getattr(self, sec).s_list
            if not levels or len(set(levels)) != len(levels):
                raise ConfigError(f"{sec}.s_list must be non-empty without repeats")
        for b in self.toy.betas + [self.toy.curve_beta]:
            if not 0 <= b < 1:
                raise ConfigError(f"beta {b} outside [0, 1)")
        if self.data.n_points < 1 or self.data.burn_in < 0 or self.data.thin < 1:
            raise ConfigError("invalid data counts")
        return self

    def to_dict(self):
        d = asdict(self)
        for sec in ("model", "toy", "mnist"):
            d[sec]["s_list"] = [format_levels(s) for s in d[sec]["s_list"]]
        d["model"]["gen_s"] = format_levels(d["model"]["gen_s"])
        return d

    def config_id(self):
        d = self.to_dict()
        # where and how fast a run executes does not change its numbers
        d.pop("out")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


_SECTIONS = {"model": ModelShape, "data": DataParams, "train": TrainConfig,
             "toy": ToyParams, "mnist": MnistParams}


def _build(cls, values, where):
    if not isinstance(values, dict):
        raise ConfigError(f"{where}: expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def config_from_dict(doc, kind=None):
    doc = dict(doc or {})
    if kind is not None:
        doc.setdefault("kind", kind)
    top = {k: v for k, v in doc.items() if k not in _SECTIONS}
    given = {k: dict(doc.get(k) or {}) for k in _SECTIONS}
    if top.get("kind") == "mnist":
        given["train"] = {**MNIST_TRAIN_DEFAULTS, **given["train"]}
    sections = {k: _build(cls, given[k], k) for k, cls in _SECTIONS.items()}
    cfg = _build(ExperimentConfig, {**top, **sections}, "config")
    if "reps" not in doc:
        cfg.reps = DEFAULT_REPS.get(cfg.kind, 1)
    if "out" not in doc:
        cfg.out = f"runs/{cfg.kind}"
    return cfg.validate()


def load_config(path, kind=None):
    with open(path, encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    return config_from_dict(doc, kind)


def rep_seeds(seed, reps):
    """One 64-bit seed per repetition, independent of worker count."""
    children = np.random.SeedSequence(seed).spawn(reps)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _tag(s):
    return "s" + format_levels(s)


def _map_reps(fn, cfg, args):
    """Run ``fn`` over repetitions, returning results in repetition order."""
    if cfg.workers == 1:
        results, errors = [], []
        for r, a in enumerate(args):
            try:
                results.append(fn(*a))
            except Exception as e:  # noqa: BLE001 - reported in aggregate
                errors.append((r, e))
    else:
        with ProcessPoolExecutor(cfg.workers) as pool:
            futures = [pool.submit(fn, *a) for a in args]
            results, errors = [], []
            for r, fut in enumerate(futures):
                try:
                    results.append(fut.result())
                except Exception as e:  # noqa: BLE001
                    errors.append((r, e))
    if errors:
        report = "; ".join(f"rep {r}: {type(e).__name__}: {e}" for r, e in errors)
        raise RepetitionError(f"{len(errors)} repetition(s) failed: {report}")
    return results


def _write_metadata(out, cfg, extra=None):
    meta = {"config": cfg.to_dict(), "config_id": cfg.config_id()}
    meta.update(extra or {})
    with open(out / "metadata.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def _summary_records(per_rep, seed, config_id):
    """Mean and SE across repetitions for each (metric, epoch) series."""
    series = {}
    for recs in per_rep:
        for rec in recs:
            series.setdefault((rec.metric, rec.epoch), []).append(rec.value)
    out = []
    for (metric, epoch) in sorted(series, key=lambda k: (k[0], k[1])):
        vals = series[(metric, epoch)]
        if len(vals) != len(per_rep):
            raise RepetitionError(f"{metric} at epoch {epoch} missing from some repetitions")
        mean, se = mean_and_se(vals)
        out.append(MetricsRecord(epoch, metric + ".mean", float(mean), seed, config_id))
        out.append(MetricsRecord(epoch, metric + ".se", float(se), seed, config_id))
    return out


def _write_outputs(cfg, per_rep, extra_meta=None):
    out = Path(cfg.out)
    (out / "raw").mkdir(parents=True, exist_ok=True)
    cid = cfg.config_id()
    for r, recs in enumerate(per_rep):
        data_io.write_metrics_csv(out / "raw" / f"rep{r:03d}.csv", recs)
    summary = _summary_records(per_rep, cfg.seed, cid)
    data_io.write_metrics_csv(out / "summary.csv", summary)
    _write_metadata(out, cfg, extra_meta)
    return summary


# -- artificial data ----------------------------------------------------------

def artificial_repetition(cfg, rep, rep_seed):
    m, d = cfg.model, cfg.data
    cid = cfg.config_id()
    rng = make_rng(rep_seed)
    gen = init_generative(m.n_visible, m.gen_hidden, m.gen_s, rng)
    data = generate_dataset(gen, d.n_points, rng, burn_in=d.burn_in, thin=d.thin)
    train_seed = int(rng.integers(2 ** 63))
    records = []
    for s in m.s_list:
        trng = make_rng(train_seed)
        model = init_trainee(m.n_visible, m.gen_hidden + m.extra_hidden, s, trng)
        tag = _tag(s)

        def observe(epoch, params, tag=tag):
            if epoch % cfg.eval_every and epoch != cfg.train.epochs:
                return None
            return [
                MetricsRecord(epoch, f"kld.{tag}", kld(gen, params), cfg.seed, cid),
                MetricsRecord(epoch, f"loglik_per_v.{tag}",
                              log_likelihood(params, data) / m.n_visible, cfg.seed, cid),
            ]

        _, recs = train(model, data, cfg.train, observe, trng)
        for pair in recs:
            records.extend(pair)
    return records


def run_artificial(cfg):
    """Fit trainee RBMs to Gibbs samples of a random generator RBM; log KLD and log-likelihood."""
    if cfg.kind != "artificial":
        raise ConfigError("run_artificial needs kind = artificial")
    seeds = rep_seeds(cfg.seed, cfg.reps)
    per_rep = _map_reps(artificial_repetition, cfg, [(cfg, r, s) for r, s in enumerate(seeds)])
    meta = {"defaults_chosen": {
        "burn_in": cfg.data.burn_in, "thin": cfg.data.thin,
        "note": "burn-in/thinning for synthetic data are not given by the source protocol"}}
    return _write_outputs(cfg, per_rep, meta)


# -- toy model ----------------------------------------------------------------

def toy_curves(n_hidden, s_list, beta, w_grid):
    """Rows (s, w, alpha, loglik) for each s over the grid."""
    rows = []
    for s in s_list:
        spec = ToySpec(s, n_hidden, beta)
        a = np.atleast_1d(alpha(spec, w_grid))
        ll = np.atleast_1d(toy_log_likelihood(spec, w_grid))
        rows.extend((s, float(w), float(x), float(y)) for w, x, y in zip(w_grid, a, ll))
    return rows


def toy_grid(t):
    grid = np.linspace(t.w_min, t.w_max, t.w_points)
    if t.w_min == -t.w_max:
        # mirror exactly so symmetric requests give exactly even curves
        grid = np.where(grid < 0, -grid[::-1], grid)
    if t.w_min < 0 < t.w_max:
        # make w = 0 exact so the origin row is present
        grid[np.argmin(np.abs(grid))] = 0.0
    return grid


def run_toy(cfg):
    """Write alpha/loglik curves and the w* table for the two-visible toy model."""
    if cfg.kind != "toy":
        raise ConfigError("run_toy needs kind = toy")
    t = cfg.toy
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = toy_curves(t.n_hidden, t.s_list, t.curve_beta, toy_grid(t))
    with open(out / "curves.csv", "w", encoding="utf-8", newline="") as f:
        f.write("s,w,alpha,loglik\n")
        for s, w, a, ll in rows:
            f.write(f"{format_levels(s)},{w!r},{a!r},{ll!r}\n")
    w_star = []
    with open(out / "w_star.csv", "w", encoding="utf-8", newline="") as f:
        f.write("s,n_hidden,beta,w_star,loglik_at_w_star\n")
        for beta in t.betas:
            for s in t.s_list:
                spec = ToySpec(s, t.n_hidden, beta)
                w = solve_w_star(spec)
                ll = toy_log_likelihood(spec, w)
                w_star.append((s, beta, w))
                f.write(f"{format_levels(s)},{t.n_hidden},{beta!r},{w!r},{ll!r}\n")
    _write_metadata(out, cfg)
    return w_star


# -- MNIST DRBM ---------------------------------------------------------------

def _load_mnist_split(m):
    for p in (m.train_images, m.train_labels, m.test_images, m.test_labels):
        if not p or not Path(p).exists():
            raise FileNotFoundError(f"MNIST file not found: {p!r}")
    train_x, train_t = data_io.load_mnist(m.train_images, m.train_labels)
    test_x, test_t = data_io.load_mnist(m.test_images, m.test_labels)
    if m.n_test:
        test_x, test_t = test_x[:m.n_test], test_t[:m.n_test]
    return train_x, train_t, test_x, test_t


def mnist_repetition(cfg, rep, rep_seed, arrays):
    train_x, train_t, test_x, test_t = arrays
    m = cfg.mnist
    cid = cfg.config_id()
    rng = make_rng(rep_seed)
    pick = rng.permutation(train_x.shape[0])[:m.n_train]
    x = data_io.preprocess_images(train_x[pick])
    t = train_t[pick]
    noisy = data_io.corrupt_gaussian(test_x, m.sigma, rng)
    x_test = noisy.reshape(noisy.shape[0], -1) / 255.0
    train_seed = int(rng.integers(2 ** 63))
    n_classes = int(max(train_t.max(), test_t.max())) + 1
    records = []
    for s in m.s_list:
        trng = make_rng(train_seed)
        model = init_drbm(x.shape[1], m.n_hidden, n_classes, s, trng)
        tag = _tag(s)

        def observe(epoch, params, tag=tag):
            if epoch % cfg.eval_every and epoch != cfg.train.epochs:
                return None
            return [
                MetricsRecord(epoch, f"train_error.{tag}", drbm_error_rate(params, x, t), cfg.seed, cid),
                MetricsRecord(epoch, f"test_error.{tag}", drbm_error_rate(params, x_test, test_t),
                              cfg.seed, cid),
            ]

        _, recs = train_drbm(model, x, t, cfg.train, observe, trng)
        for pair in recs:
            records.extend(pair)
    log.info("mnist repetition %d done", rep)
    return records


def run_mnist(cfg):
    """Train DRBMs on an MNIST subset; log train error and corrupted-test error per epoch."""
    if cfg.kind != "mnist":
        raise ConfigError("run_mnist needs kind = mnist")
    arrays = _load_mnist_split(cfg.mnist)
    seeds = rep_seeds(cfg.seed, cfg.reps)
    per_rep = _map_reps(mnist_repetition, cfg, [(cfg, r, s, arrays) for r, s in enumerate(seeds)])
    meta = {"defaults_chosen": {
        "xavier_fan": "per coupling block: n+|H| for W1, |H|+K for W2",
        "alpha": cfg.train.alpha,
        "test_noise": "drawn once per repetition from the repetition seed"}}
    return _write_outputs(cfg, per_rep, meta)


RUNNERS = {"artificial": run_artificial, "toy": run_toy, "mnist": run_mnist}


def run_experiment(cfg):
    return RUNNERS[cfg.kind](cfg)
