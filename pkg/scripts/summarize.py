"""Print mean +- SE of every metric at chosen epochs of a run's summary.csv."""
import argparse
from collections import defaultdict

from mvrbm.data_io import read_metrics_csv

ap = argparse.ArgumentParser()
ap.add_argument("summary_csv")
ap.add_argument("--epochs", type=int, nargs="*", help="default: first and last")
args = ap.parse_args()

table = defaultdict(dict)
for r in read_metrics_csv(args.summary_csv):
    base, stat = r.metric.rsplit(".", 1)
    table[(base, r.epoch)][stat] = r.value
epochs = sorted({e for _, e in table})
wanted = args.epochs or [epochs[0], epochs[-1]]
for base in sorted({b for b, _ in table}):
    cells = [f"{e}: {table[(base, e)]['mean']:.5f} +- {table[(base, e)]['se']:.5f}"
             for e in wanted if (base, e) in table]
    print(f"{base:<22} " + "   ".join(cells))
