"""Heider balance dynamics on two-layer multiplex networks.

The pieces, bottom-up:

* :mod:`.signed` -- weight/sign matrices, balance checkers, exhaustive oracle
* :mod:`.graphtext` -- edge-list text format
* :mod:`.dynamics` -- coupled ODE system, RK4 integrator, trial classification
* :mod:`.sweep` -- seeded Monte Carlo estimates over a coupling grid
* :mod:`.output` -- CSV tables and PGM/SVG heatmaps
* :mod:`.cli` -- the ``multiplex-balance`` command
"""

from .dynamics import (
    CouplingParams,
    DynamicsConfig,
    NumericalFailure,
    Status,
    TrialOutcome,
    audit_trajectory,
    derivative,
    init_random_state,
    integrate,
    integrate_step,
    run_trial,
    run_trials,
)
from .signed import (
    BalanceReport,
    IndeterminateSignError,
    LayerWeights,
    MultiplexState,
    OracleDisagreement,
    SignPattern,
    enumerate_balanced_configs,
    layer_balanced_cycles,
    layer_balanced_triads,
    multiplex_balance_report,
    node_balanced,
    sign_pattern,
    triad_balance_fraction,
    triad_balanced,
)
from .sweep import CellEstimate, GridSpec, default_grid, derive_trial_seed, estimate_cell, grid_mean, sweep

__version__ = "0.1.0"
