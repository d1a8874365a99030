"""DRBM on MNIST with Gaussian-corrupted test images.

MNIST is not downloaded; point --data-dir at a directory holding the four
IDX files (optionally .gz).

    python scripts/run_mnist.py --data-dir ~/data/mnist --reps 10
"""
import argparse
import logging
from pathlib import Path

from mvrbm.experiments import load_config, run_mnist
from mvrbm.plotting import plot_run

NAMES = {"train_images": "train-images-idx3-ubyte", "train_labels": "train-labels-idx1-ubyte",
         "test_images": "t10k-images-idx3-ubyte", "test_labels": "t10k-labels-idx1-ubyte"}


def locate(directory, name):
    for p in (directory / name, directory / f"{name}.gz"):
        if p.exists():
            return str(p)
    raise SystemExit(f"missing {name}[.gz] in {directory}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/mnist_acceptance.yaml")
    ap.add_argument("--data-dir", type=Path)
    ap.add_argument("--reps", type=int)
    ap.add_argument("--epochs", type=int)
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = load_config(args.config, "mnist")
    if args.data_dir:
        for field, name in NAMES.items():
            setattr(cfg.mnist, field, locate(args.data_dir, name))
    for opt in ("reps", "workers"):
        if getattr(args, opt):
            setattr(cfg, opt, getattr(args, opt))
    if args.epochs:
        cfg.train.epochs = args.epochs
    summary = run_mnist(cfg)
    plot_run(cfg)
    last = cfg.train.epochs
    for r in summary:
        if r.epoch == last and r.metric.endswith(".mean"):
            print(f"epoch {last}  {r.metric:<22} {r.value:.4f}")


if __name__ == "__main__":
    main()
