"""Command-line entry point: ``mvrbm <subcommand> [--config PATH] [--seed N] ...``.

Failures exit with status 1 and print one line ``error: <Kind>: <message>``
to stderr.
"""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import data_io
from .drbm import init_drbm, train_drbm
from .experiments import (config_from_dict, load_config, run_experiment,
                          toy_curves, toy_grid)
from .metrics import MetricsRecord, drbm_error_rate, kld
from .rbm import log_likelihood
from .sampler import generate_dataset, make_rng
from .special import format_levels, parse_levels
from .trainer import init_generative, init_trainee, train

log = logging.getLogger("mvrbm")


def _s_list(text):
    return [parse_levels(t) for t in text.split(",") if t.strip()]


def _config(args, kind):
    cfg = load_config(args.config, kind) if args.config else config_from_dict({}, kind)
    if cfg.kind != kind:
        raise ValueError(f"config is for {cfg.kind!r}, command needs {kind!r}")
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.train.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.reps is not None:
        cfg.reps = args.reps
    if getattr(args, "epochs", None) is not None:
        cfg.train.epochs = args.epochs
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if args.s is not None:
        section = {"artificial": cfg.model, "toy": cfg.toy, "mnist": cfg.mnist}[kind]
        section.s_list = args.s
    return cfg.validate()


def _out_dir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen_data(args):
    cfg = _config(args, "artificial")
    m, d = cfg.model, cfg.data
    rng = make_rng(cfg.seed)
    gen = init_generative(m.n_visible, m.gen_hidden, m.gen_s, rng)
    data = generate_dataset(gen, d.n_points, rng, burn_in=d.burn_in, thin=d.thin)
    out = _out_dir(cfg)
    data_io.save_model(out / "generator.json", gen)
    data_io.save_spins(out / "data.csv", data)
    print(out / "data.csv")


def cmd_train_rbm(args):
    cfg = _config(args, "artificial")
    data = data_io.load_spins(args.data)
    gen = data_io.load_model(args.generator) if args.generator else None
    out = _out_dir(cfg)
    cid = cfg.config_id()
    records = []
    for s in cfg.model.s_list:
        rng = make_rng(cfg.seed)
        n_hidden = cfg.model.gen_hidden + cfg.model.extra_hidden
        model = init_trainee(data.shape[1], n_hidden, s, rng)
        tag = "s" + format_levels(s)

        def observe(epoch, params, tag=tag):
            if epoch % cfg.eval_every and epoch != cfg.train.epochs:
                return None
            recs = [MetricsRecord(epoch, f"loglik_per_v.{tag}",
                                  log_likelihood(params, data) / data.shape[1], cfg.seed, cid)]
            if gen is not None:
                recs.append(MetricsRecord(epoch, f"kld.{tag}", kld(gen, params), cfg.seed, cid))
            return recs

        params, recs = train(model, data, cfg.train, observe, rng)
        data_io.save_model(out / f"model_{tag}.json", params)
        for r in recs:
            records.extend(r)
    data_io.write_metrics_csv(out / "metrics.csv", records)
    print(out / "metrics.csv")


def cmd_eval_kld(args):
    gen = data_io.load_model(args.gen)
    trained = data_io.load_model(args.trained)
    print(repr(kld(gen, trained)))


def cmd_toy_curves(args):
    cfg = _config(args, "toy")
    t = cfg.toy
    if args.beta is not None:
        t.curve_beta = args.beta
    rows = toy_curves(t.n_hidden, t.s_list, t.curve_beta, toy_grid(t))
    lines = ["s,w,alpha,loglik"] + [f"{format_levels(s)},{w!r},{a!r},{ll!r}" for s, w, a, ll in rows]
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = _out_dir(cfg)
        (out / "curves.csv").write_text(text, encoding="utf-8")
        print(out / "curves.csv")


def _mnist_train_arrays(cfg, rng):
    m = cfg.mnist
    images, labels = data_io.load_mnist(m.train_images, m.train_labels)
    pick = rng.permutation(images.shape[0])[:m.n_train]
    return data_io.preprocess_images(images[pick]), labels[pick]


def cmd_train_drbm(args):
    cfg = _config(args, "mnist")
    out = _out_dir(cfg)
    rng = make_rng(cfg.seed)
    x, t = _mnist_train_arrays(cfg, rng)
    train_seed = int(rng.integers(2 ** 63))
    cid = cfg.config_id()
    records = []
    for s in cfg.mnist.s_list:
        trng = make_rng(train_seed)
        model = init_drbm(x.shape[1], cfg.mnist.n_hidden, 10, s, trng)
        tag = "s" + format_levels(s)

        def observe(epoch, params, tag=tag):
            if epoch % cfg.eval_every and epoch != cfg.train.epochs:
                return None
            return MetricsRecord(epoch, f"train_error.{tag}", drbm_error_rate(params, x, t), cfg.seed, cid)

        params, recs = train_drbm(model, x, t, cfg.train, observe, trng)
        records.extend(recs)
        data_io.save_model(out / f"drbm_{tag}.json", params)
    data_io.write_metrics_csv(out / "metrics.csv", records)
    print(out / "metrics.csv")


def cmd_eval_drbm(args):
    params = data_io.load_model(args.model)
    images, labels = data_io.load_mnist(args.images, args.labels)
    if args.sigma:
        images = data_io.corrupt_gaussian(images, args.sigma, make_rng(args.seed or 0))
    x = np.asarray(images, dtype=np.float64).reshape(images.shape[0], -1) / 255.0
    print(repr(drbm_error_rate(params, x, labels)))


def _run(kind):
    def cmd(args):
        cfg = _config(args, kind)
        run_experiment(cfg)
        if args.plot:
            from .plotting import plot_run
            plot_run(cfg)
        print(cfg.out)
    return cmd


def build_parser():
    p = argparse.ArgumentParser(prog="mvrbm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--config", help="YAML/JSON experiment config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--s", type=_s_list, help="comma-separated level counts, e.g. 1,2,4,inf")
        sp.set_defaults(func=fn)
        return sp

    add("gen-data", cmd_gen_data, "draw a generator RBM and sample a dataset")
    sp = add("train-rbm", cmd_train_rbm, "CD-train RBMs on a spin dataset")
    sp.add_argument("--data", required=True)
    sp.add_argument("--generator", help="generator model file; enables KLD logging")
    sp.add_argument("--epochs", type=int)
    sp = add("eval-kld", cmd_eval_kld, "exact KLD between two RBM model files")
    sp.add_argument("--gen", required=True)
    sp.add_argument("--trained", required=True)
    sp = add("toy-curves", cmd_toy_curves, "alpha/log-likelihood grids for the toy RBM")
    sp.add_argument("--beta", type=float)
    sp = add("train-drbm", cmd_train_drbm, "train DRBMs on an MNIST subset")
    sp.add_argument("--epochs", type=int)
    sp = add("eval-drbm", cmd_eval_drbm, "misclassification rate of a DRBM model file")
    sp.add_argument("--model", required=True)
    sp.add_argument("--images", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--sigma", type=float, default=0.0)
    for name, kind in (("run-artificial", "artificial"), ("run-toy", "toy"), ("run-mnist", "mnist")):
        sp = add(name, _run(kind), f"run the {kind} experiment")
        sp.add_argument("--plot", action="store_true", help="also write SVG plots")
        sp.add_argument("--workers", type=int)
        if kind != "toy":
            sp.add_argument("--epochs", type=int)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        msg = " ".join(str(e).split())
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
