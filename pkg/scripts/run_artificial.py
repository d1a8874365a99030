"""Over-fitting study on Gibbs samples of a random binary RBM.

Runs the R = 0 and R = 5 configs (or the ones given) and writes SVG plots
next to the CSV output.

    python scripts/run_artificial.py [--reps 30] [--workers 4] [config.yaml ...]
"""
import argparse
import logging
import time

from mvrbm.experiments import load_config, run_artificial
from mvrbm.plotting import plot_run

DEFAULT_CONFIGS = ["configs/artificial_r0.yaml", "configs/artificial_r5.yaml"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("configs", nargs="*", default=DEFAULT_CONFIGS)
    ap.add_argument("--reps", type=int)
    ap.add_argument("--epochs", type=int)
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    for path in args.configs:
        cfg = load_config(path, "artificial")
        if args.reps:
            cfg.reps = args.reps
        if args.epochs:
            cfg.train.epochs = args.epochs
        if args.workers:
            cfg.workers = args.workers
        t0 = time.time()
        summary = run_artificial(cfg)
        plot_run(cfg)
        last = max(r.epoch for r in summary)
        logging.info("%s: %d reps in %.0f s -> %s", path, cfg.reps, time.time() - t0, cfg.out)
        for r in summary:
            if r.epoch == last and r.metric.startswith("kld") and r.metric.endswith(".mean"):
                print(f"{cfg.out}  epoch {last}  {r.metric:<18} {r.value:.5f}")


if __name__ == "__main__":
    main()
