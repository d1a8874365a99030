"""alpha_s(w) and toy log-likelihood curves plus the w* table."""
import sys

from mvrbm.experiments import load_config, run_toy
from mvrbm.plotting import plot_run
from mvrbm.special import format_levels

cfg = load_config(sys.argv[1] if len(sys.argv) > 1 else "configs/toy.yaml", "toy")
rows = run_toy(cfg)
plot_run(cfg)
print(f"{'beta':>5} " + " ".join(f"{'s=' + format_levels(s):>9}" for s in cfg.toy.s_list))
for beta in cfg.toy.betas:
    ws = [w for s, b, w in rows if b == beta]
    print(f"{beta:5.2f} " + " ".join(f"{w:9.4f}" for w in ws))
print(f"curves and table in {cfg.out}")
