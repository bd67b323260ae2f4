"""Follow one coupled trajectory until it locks in.

Run: python3 demos/single_trial.py
"""
import numpy as np

from multiplex_balance import CouplingParams, DynamicsConfig, init_random_state, run_trial, sign_pattern
from multiplex_balance.dynamics import run_trials

cfg = DynamicsConfig(n=5)
p = CouplingParams(beta1=1.0, beta2=0.25)
seed = 42

m = init_random_state(cfg.n, seed)
print("initial layer 1 weights:\n", np.round(m.layer1.w, 2))

# Distance of the least saturated link from |w| = 1 at each check.
gaps = []
iu = np.triu_indices(cfg.n, 1)


def observer(step, ids, w1, w2):
    if ids.size and step % cfg.check_interval == 0:
        gaps.append(float(np.max(1 - np.abs(np.concatenate([w1[0][iu], w2[0][iu]])))))


run_trials(p, cfg, [seed], observer=observer)
print("largest distance from saturation at each check:", np.round(gaps, 4))

out = run_trial(p, cfg, seed)
print(f"status={out.status.value}  t_final={out.t_final:g}  steps={out.steps}")
print("per-layer balance:", out.report.layer_balanced)
print("layers share their sign pattern:", out.layers_sign_identical)

# Same seed, same answer.
assert run_trial(p, cfg, seed) == out
print("initial signs, layer 1 (eps = 0.5, 0 = undecided):\n", sign_pattern(m.layer1.w).s)
