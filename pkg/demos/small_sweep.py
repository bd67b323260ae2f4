"""A coarse phase diagram: how often does the bilayer reach balance?

Writes demo_out/results.csv and one heatmap per system size.
Run: python3 demos/small_sweep.py
"""
from pathlib import Path

from multiplex_balance.output import render_heatmap, render_montage, write_results_csv
from multiplex_balance.sweep import GridSpec, grid_mean, sweep

out = Path("demo_out")
out.mkdir(exist_ok=True)

betas = (0.0, 1.0, 2.0)
spec = GridSpec(betas, betas, sizes=(4, 6), trials_per_cell=40, master_seed=3)
cells = sweep(spec)

for c in cells:
    print(f"n={c.n} beta=({c.beta1:g},{c.beta2:g})  p_hb={c.p_hb:.3f} +- {c.std_err:.3f}")

for n in spec.sizes:
    mean, se = grid_mean(cells, n)
    print(f"n={n}: grid-mean p_hb = {mean:.3f} +- {se:.3f}")
    render_heatmap(cells, n, out / f"heatmap_n{n}.pgm")

write_results_csv(cells, out / "results.csv")
render_montage(cells, spec.sizes, out / "montage.pgm")
print("wrote", sorted(p.name for p in out.iterdir()))
