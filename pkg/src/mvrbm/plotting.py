"""Optional SVG line plots drawn from a run's CSV output."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .data_io import read_metrics_csv  # noqa: E402


def _series(records, suffix=".mean"):
    out = {}
    for r in records:
        if r.metric.endswith(suffix):
            out.setdefault(r.metric[: -len(suffix)], []).append((r.epoch, r.value))
    return out


def plot_summary(summary_csv, out_dir):
    series = _series(read_metrics_csv(summary_csv))
    groups = {}
    for name, pts in series.items():
        metric, tag = name.rsplit(".", 1)
        groups.setdefault(metric, {})[tag] = sorted(pts)
    for metric, curves in groups.items():
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for tag, pts in sorted(curves.items()):
            ax.plot([e for e, _ in pts], [v for _, v in pts], label=tag.replace("s", "s=", 1))
        ax.set_xlabel("epoch")
        ax.set_ylabel(metric)
        ax.legend()
        fig.tight_layout()
        fig.savefig(Path(out_dir) / f"{metric}.svg")
        plt.close(fig)


def plot_toy(curves_csv, out_dir):
    with open(curves_csv, encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    for col in ("alpha", "loglik"):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for s in dict.fromkeys(r["s"] for r in rows):
            sel = [r for r in rows if r["s"] == s]
            ax.plot([float(r["w"]) for r in sel], [float(r[col]) for r in sel], label=f"s={s}")
        ax.set_xlabel("w")
        ax.set_ylabel(col)
        ax.legend()
        fig.tight_layout()
        fig.savefig(Path(out_dir) / f"toy_{col}.svg")
        plt.close(fig)


def plot_run(cfg):
    out = Path(cfg.out)
    if cfg.kind == "toy":
        plot_toy(out / "curves.csv", out)
    else:
        plot_summary(out / "summary.csv", out)
