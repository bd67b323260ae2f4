"""Monte Carlo estimates of the probability of reaching multiplex balance.

Every trial gets its own seed, derived by counter mixing from
``(master_seed, cell_index, trial_index)``; nothing depends on the order in
which cells or trials are executed, so a sweep gives identical results for
any number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import CouplingParams, DynamicsConfig, NumericalFailure, Status, run_trials

__all__ = [
    "WORKERS_ENV",
    "derive_trial_seed",
    "derive_trial_seeds",
    "GridSpec",
    "CellEstimate",
    "default_grid",
    "estimate_cell",
    "sweep",
    "grid_mean",
]

WORKERS_ENV = "MULTIPLEX_BALANCE_WORKERS"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _splitmix(z: int) -> int:
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, cell_index: int, trial_index: int) -> int:
    """Seed for one trial: ``mix(mix(mix(master) ^ cell) ^ trial)``.

    ``mix`` is the SplitMix64 output function applied after adding the
    golden-ratio increment. Each stage is a bijection on 64-bit words, so
    trials of one cell never collide.
    """
    if cell_index < 0 or trial_index < 0:
        raise ValueError("cell and trial indices must be >= 0")
    z = _splitmix(master_seed & _MASK)
    z = _splitmix(z ^ (cell_index & _MASK))
    return _splitmix(z ^ (trial_index & _MASK))


def _splitmix_array(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_trial_seeds(master_seed: int, cell_index: int, trial_indices) -> np.ndarray:
    """Vectorised :func:`derive_trial_seed` over an array of trial indices."""
    if cell_index < 0:
        raise ValueError("cell and trial indices must be >= 0")
    z = _splitmix(_splitmix(master_seed & _MASK) ^ (cell_index & _MASK))
    t = np.asarray(trial_indices)
    if t.size and t.min() < 0:
        raise ValueError("cell and trial indices must be >= 0")
    t = t.astype(np.uint64)
    with np.errstate(over="ignore"):
        return _splitmix_array(np.uint64(z) ^ t)


def _betas(values, name) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError(f"{name} must not be empty")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"{name} must be finite")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError(f"{name} must be strictly ascending")
    return vals


@dataclass(frozen=True)
class GridSpec:
    """A ``(beta1, beta2, n)`` lattice.

    Cells are indexed in row-major order: sizes outermost, then ``beta1``,
    then ``beta2`` innermost. The cell index feeds the trial seeds.
    """

    beta1_values: Sequence[float]
    beta2_values: Sequence[float]
    sizes: Sequence[int]
    trials_per_cell: int = 200
    master_seed: int = 1
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)

    def __post_init__(self):
        object.__setattr__(self, "beta1_values", _betas(self.beta1_values, "beta1_values"))
        object.__setattr__(self, "beta2_values", _betas(self.beta2_values, "beta2_values"))
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes:
            raise ValueError("sizes must not be empty")
        if any(n < 3 for n in sizes):
            raise ValueError(f"sizes must be >= 3, got {sizes}")
        if len(set(sizes)) != len(sizes):
            raise ValueError(f"sizes must be distinct, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        if int(self.trials_per_cell) != self.trials_per_cell or self.trials_per_cell < 1:
            raise ValueError(f"trials_per_cell must be an integer >= 1, got {self.trials_per_cell}")
        if not 0 <= self.master_seed <= _MASK:
            raise ValueError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")

    def cells(self) -> list[tuple[int, float, float, int]]:
        """``(cell_index, beta1, beta2, n)`` in grid order."""
        out = []
        for n in self.sizes:
            for b1 in self.beta1_values:
                for b2 in self.beta2_values:
                    out.append((len(out), b1, b2, n))
        return out

    def cell_index(self, beta1: float, beta2: float, n: int) -> int:
        try:
            s = self.sizes.index(n)
            i = self.beta1_values.index(float(beta1))
            j = self.beta2_values.index(float(beta2))
        except ValueError:
            raise KeyError(f"cell (beta1={beta1}, beta2={beta2}, n={n}) is not on the grid") from None
        return (s * len(self.beta1_values) + i) * len(self.beta2_values) + j


def default_grid() -> GridSpec:
    betas = tuple(0.25 * i for i in range(9))
    return GridSpec(betas, betas, (4, 6, 9))


@dataclass(frozen=True)
class CellEstimate:
    """Tally of one grid cell.

    ``failures`` counts trials lost to numerical failure (already included
    in ``undecided``) and ``balanced_identical`` the balanced trials whose
    two layers ended with identical sign patterns. Neither is written to CSV.
    """

    beta1: float
    beta2: float
    n: int
    trials: int
    balanced: int
    jammed: int
    undecided: int
    p_hb: float
    std_err: float
    failures: int = 0
    balanced_identical: int = 0

    @classmethod
    def from_counts(cls, beta1, beta2, n, balanced, jammed, undecided, failures=0, balanced_identical=0):
        trials = balanced + jammed + undecided
        if trials < 1:
            raise ValueError("a cell needs at least one trial")
        p = balanced / trials
        return cls(
            beta1=float(beta1),
            beta2=float(beta2),
            n=int(n),
            trials=trials,
            balanced=balanced,
            jammed=jammed,
            undecided=undecided,
            p_hb=p,
            std_err=math.sqrt(p * (1.0 - p) / trials),
            failures=failures,
            balanced_identical=balanced_identical,
        )


def estimate_cell(
    beta1: float,
    beta2: float,
    n: int,
    trials: int,
    spec: GridSpec,
    *,
    cell_index: int | None = None,
) -> CellEstimate:
    """Run ``trials`` seeded trials for one cell and tally the outcomes.

    ``cell_index`` defaults to the cell's position in ``spec``; pass it
    explicitly to evaluate a point that is not on the grid.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if cell_index is None:
        cell_index = spec.cell_index(beta1, beta2, n)
    seeds = [int(s) for s in derive_trial_seeds(spec.master_seed, cell_index, np.arange(trials))]
    results = run_trials(
        CouplingParams(beta1, beta2), spec.dynamics.with_n(n), seeds, return_exceptions=True
    )
    counts = {s: 0 for s in Status}
    failures = identical = 0
    for r in results:
        if isinstance(r, NumericalFailure):
            failures += 1
            counts[Status.UNDECIDED] += 1
            continue
        counts[r.status] += 1
        if r.status is Status.BALANCED and r.layers_sign_identical:
            identical += 1
    return CellEstimate.from_counts(
        beta1,
        beta2,
        n,
        counts[Status.BALANCED],
        counts[Status.JAMMED],
        counts[Status.UNDECIDED],
        failures=failures,
        balanced_identical=identical,
    )


def _cell_job(args) -> CellEstimate:
    spec, (index, b1, b2, n) = args
    return estimate_cell(b1, b2, n, spec.trials_per_cell, spec, cell_index=index)


def _workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def sweep(spec: GridSpec, workers: int | None = None) -> list[CellEstimate]:
    """Estimate every cell of ``spec``, returned in grid order.

    ``workers`` defaults to the ``MULTIPLEX_BALANCE_WORKERS`` environment
    variable (1 if unset). It only changes wall time, never the results.
    """
    if workers is None:
        workers = _workers_from_env()
    jobs = [(spec, cell) for cell in spec.cells()]
    if workers <= 1 or len(jobs) <= 1:
        return [_cell_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cell_job, jobs, chunksize=1))


def grid_mean(cells: Sequence[CellEstimate], n: int) -> tuple[float, float]:
    """Mean ``p_hb`` over the cells of size ``n`` and its pooled standard error."""
    sel = [c for c in cells if c.n == n]
    if not sel:
        raise ValueError(f"no cells for n={n}")
    mean = sum(c.p_hb for c in sel) / len(sel)
    se = math.sqrt(sum(c.std_err**2 for c in sel)) / len(sel)
    return mean, se
