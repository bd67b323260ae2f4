"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the pytest terminal
summary. Run with ``--runslow`` to include the full 9x9 grid and the n=6
oracle tier.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from multiplex_balance.cli import main
from multiplex_balance.dynamics import (
    CouplingParams,
    DynamicsConfig,
    audit_trajectory,
    init_random_state,
    integrate,
)
from multiplex_balance.output import read_pgm, read_results_csv
from multiplex_balance.signed import MultiplexState, enumerate_balanced_configs, layer_balanced_cycles, layer_balanced_triads
from multiplex_balance.sweep import GridSpec, default_grid, derive_trial_seed, estimate_cell, grid_mean, sweep

from conftest import all_sign_matrices
from test_dynamics import flat_rhs, state_vector

CI_BETAS = (0.0, 0.5, 1.0, 1.5, 2.0)


def _oracle(n):
    agree = all(layer_balanced_triads(a) == layer_balanced_cycles(a) for a in all_sign_matrices(n))
    return agree, enumerate_balanced_configs(n)


def test_c1_oracle_suite(criterion):
    t0 = time.perf_counter()
    rows = {n: _oracle(n) for n in (3, 4, 5)}
    elapsed = time.perf_counter() - t0
    ok = all(agree and count == 2 ** (n - 1) for n, (agree, count) in rows.items()) and elapsed < 10
    counts = ", ".join(f"n={n}: {c}" for n, (_, c) in rows.items())
    assert criterion(ok, f"checkers agree on all K_3..K_5, balanced counts {counts}, {elapsed:.1f}s < 10s")


@pytest.mark.slow
def test_c1_oracle_suite_n6(criterion):
    agree, count = _oracle(6)
    assert criterion(agree and count == 32, f"n=6: checkers agree={agree}, balanced={count} (expect 32)")


def test_c2_decoupled_regime(criterion):
    t0 = time.perf_counter()
    c = estimate_cell(0.0, 0.0, 4, 500, default_grid())
    elapsed = time.perf_counter() - t0
    ok = c.p_hb >= 0.95 and c.undecided == 0 and elapsed < 120
    assert criterion(ok, f"n=4 beta=(0,0) 500 trials: p_hb={c.p_hb:.3f} undecided={c.undecided} {elapsed:.1f}s")


def test_c3_dominant_layer(criterion):
    g = GridSpec((5.0,), (0.0,), (6,), 300)
    t0 = time.perf_counter()
    c = estimate_cell(5.0, 0.0, 6, 300, g)
    elapsed = time.perf_counter() - t0
    identical = c.balanced_identical / c.balanced if c.balanced else 0.0
    ok = c.p_hb >= 0.90 and identical >= 0.99 and elapsed < 300
    assert criterion(
        ok,
        f"n=6 beta=(5,0) 300 trials: p_hb={c.p_hb:.3f}, identical signs among balanced "
        f"{c.balanced_identical}/{c.balanced}, {elapsed:.1f}s",
    )


def test_c4_intermediate_non_balance(criterion):
    g = default_grid()
    found = None
    tried = []
    for b in g.beta1_values:
        if not 0.1 <= b <= 2.0:
            continue
        c = estimate_cell(b, b, 9, 200, g)
        tried.append(f"{b:g}:{c.p_hb:.3f}")
        if c.p_hb <= 0.9 - 3 * c.std_err:
            found = c
            break
    detail = "scanned " + " ".join(tried)
    if found:
        detail += f"; cell beta1=beta2={found.beta1:g} n=9 p_hb={found.p_hb:.3f} se={found.std_err:.3f}"
    assert criterion(found is not None, detail)


@pytest.fixture(scope="module")
def ci_sweep():
    g = GridSpec(CI_BETAS, CI_BETAS, (4, 6, 9), 100)
    t0 = time.perf_counter()
    cells = sweep(g)
    return cells, time.perf_counter() - t0


def _trend(cells):
    stats = {n: grid_mean(cells, n) for n in (4, 6, 9)}
    (m4, s4), (m6, _), (m9, s9) = stats[4], stats[6], stats[9]
    drop = m4 - m9
    pooled = math.sqrt(s4**2 + s9**2)
    ok = m4 > m6 > m9 and drop > 3 * pooled
    text = ", ".join(f"n={n}: {m:.3f}" for n, (m, _) in stats.items())
    return ok, f"mean p_hb {text}; drop {drop:.3f} vs 3*pooled se {3 * pooled:.4f}"


def test_c5_size_trend_ci_grid(ci_sweep, criterion):
    cells, elapsed = ci_sweep
    ok, detail = _trend(cells)
    assert criterion(ok and elapsed < 600, f"5x5 grid, 100 trials: {detail}; {elapsed:.0f}s < 600s")


@pytest.mark.slow
def test_c5_size_trend_full_grid(criterion):
    t0 = time.perf_counter()
    cells = sweep(default_grid())
    elapsed = time.perf_counter() - t0
    ok, detail = _trend(cells)
    assert criterion(ok and elapsed < 3600, f"9x9 grid, 200 trials: {detail}; {elapsed:.0f}s < 3600s")


def test_c6_layer_swap_symmetry(criterion):
    g = default_grid()
    rng = np.random.default_rng(2024)
    pairs = [(a, b) for a in g.beta1_values for b in g.beta2_values if a < b]
    picks = [pairs[i] for i in rng.choice(len(pairs), size=5, replace=False)]
    sizes = rng.choice(g.sizes, size=5)
    lines = []
    ok = True
    for (a, b), n in zip(picks, sizes):
        x = estimate_cell(a, b, int(n), 200, g)
        y = estimate_cell(b, a, int(n), 200, g)
        bound = 3 * math.sqrt(x.std_err**2 + y.std_err**2)
        diff = abs(x.p_hb - y.p_hb)
        ok &= diff <= bound
        lines.append(f"({a:g},{b:g},n={n}) {x.p_hb:.3f}/{y.p_hb:.3f}")
    assert criterion(ok, "; ".join(lines))


def _audit_population():
    # pre-registered: n=4, default dynamics, 4 trials in each 5x5 CI-grid cell
    cells = [(b1, b2) for b1 in CI_BETAS for b2 in CI_BETAS]
    for k, (b1, b2) in enumerate(cells):
        for t in range(4):
            yield CouplingParams(b1, b2), derive_trial_seed(7, k, t)


@pytest.fixture(scope="module")
def audits():
    cfg = DynamicsConfig(n=4)
    return [audit_trajectory(p, cfg, seed) for p, seed in _audit_population()]


def test_c7_rk4_convergence_order(criterion):
    horizon = 0.5
    dts = [0.05, 0.025, 0.0125, 0.00625]
    slopes = []
    for seed, p in [(1, CouplingParams(0.0, 0.0)), (2, CouplingParams(0.5, 1.5)), (3, CouplingParams(2.0, 0.25))]:
        m = init_random_state(4, seed)
        rhs, _ = flat_rhs(4, p, True)
        ref = solve_ivp(rhs, (0, horizon), state_vector(m), method="DOP853", rtol=1e-13, atol=1e-14).y[:, -1]
        errs = []
        for dt in dts:
            cfg = DynamicsConfig(n=4, dt=dt, t_max=horizon)
            errs.append(np.max(np.abs(state_vector(integrate(m, p, cfg, cfg.n_steps)) - ref)))
        slopes.append(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    ok = min(slopes) >= 3.5
    assert criterion(ok, "observed orders " + ", ".join(f"{s:.2f}" for s in slopes) + " (need >= 3.5)")


def test_c7_symmetry_and_boundedness(audits, criterion):
    steps = sum(a.steps for a in audits)
    good = sum(a.well_formed for a in audits)
    detail = (
        f"{good}/{len(audits)} audited trials ({steps} steps) exactly symmetric, zero diagonal, |w| <= 1; "
        f"max |w| = {max(a.max_abs_weight for a in audits)!r}"
    )
    assert criterion(good == len(audits) == 100, detail)


def test_c7_exact_saturation_is_absorbing(audits, criterion):
    clean = sum(a.sign_flips[1.0] == 0 for a in audits)
    reached = sum(a.locked_links[1.0] for a in audits)
    # the audits rarely touch exactly 1, so also pin links at +-1 against strong opposing coupling
    pinned_ok = True
    rng = np.random.default_rng(5)
    for b1, b2 in [(0, 0), (5, 0), (2, 2), (0, 5)]:
        m = init_random_state(4, int(rng.integers(2**32)))
        w1, w2 = m.layer1.w.copy(), m.layer2.w.copy()
        for w, sign in ((w1, 1.0), (w2, -1.0)):
            w[0, 1] = w[1, 0] = sign
            w[2, 3] = w[3, 2] = -sign
        cfg = DynamicsConfig(n=4)
        out = integrate(MultiplexState.from_arrays(w1, w2), CouplingParams(b1, b2), cfg, 2000)
        for w, sign in ((out.layer1.w, 1.0), (out.layer2.w, -1.0)):
            pinned_ok &= w[0, 1] == sign and w[2, 3] == -sign
    detail = (
        f"{clean}/100 audited trials without a flip after |w| == 1 ({reached} links reached it); "
        f"links pinned at exactly +-1 stay there over 2000 steps: {pinned_ok}"
    )
    assert criterion(clean == 100 and pinned_ok, detail)


@pytest.mark.xfail(
    strict=True,
    reason="links past |w| = 0.99 can still reverse under the triadic and cross-layer drive; "
    "only |w| = 1 is a fixed point",
)
def test_c7_saturation_invariance_at_099(audits, criterion):
    clean = sum(a.sign_flips[0.99] == 0 for a in audits)
    flipped = [
        f"({p.beta1:g},{p.beta2:g})"
        for (p, _), a in zip(_audit_population(), audits)
        if a.sign_flips[0.99]
    ]
    detail = f"{clean}/100 audited trials free of sign flips after |w| >= 0.99"
    if flipped:
        detail += "; flips at beta " + " ".join(flipped)
    assert criterion(clean == 100, detail)


def test_c8_determinism(tmp_path, monkeypatch, criterion):
    outputs = {}
    for workers in (1, 4, 16):
        out = tmp_path / f"w{workers}"
        monkeypatch.setenv("MULTIPLEX_BALANCE_WORKERS", str(workers))
        code = main(
            ["sweep", "--beta1", "0,1,2", "--beta2", "0,1,2", "--sizes", "4,6", "--trials", "16", "--seed", "11",
             "--out", str(out)]
        )
        assert code == 0
        outputs[workers] = (out / "results.csv").read_bytes()
    identical = outputs[1] == outputs[4] == outputs[16]
    cells = read_results_csv(tmp_path / "w1" / "results.csv")
    law = True
    for n in (4, 6):
        px = read_pgm(tmp_path / "w1" / f"heatmap_n{n}.pgm")
        for c in (c for c in cells if c.n == n):
            row, col = 2 - int(c.beta2), int(c.beta1)
            law &= int(px[row, col]) == math.floor(255 * c.p_hb + 0.5)
    assert criterion(identical and law, f"CSV byte-identical for 1/4/16 workers: {identical}; pixel law: {law}")
