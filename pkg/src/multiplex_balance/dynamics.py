"""Coupled link-weight dynamics on a bilayer multiplex.

For layer ``a`` with partner layer ``b`` every link obeys::

    dw_ij(a)/dt = (1 - w_ij(a)**2) * (T_ij(a) + beta_a * w_ij(b))
    T_ij(a)     = sum over k != i, j of w_ik(a) * w_kj(a)

``T`` is optionally divided by ``n - 2``. The factor ``1 - w**2`` keeps
weights inside ``[-1, 1]`` and makes ``+-1`` absorbing.

Trajectories are integrated with fixed-step RK4. The integrator works on
stacks of states of shape ``(trials, n, n)`` and only uses elementwise
array operations in a fixed order, so the trajectory of a trial does not
depend on which other trials share its batch. ``run_trial`` and
``run_trials`` are therefore interchangeable bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .graphtext import write_weights
from .signed import BalanceReport, LayerWeights, MultiplexState, multiplex_balance_report

__all__ = [
    "Status",
    "CouplingParams",
    "DynamicsConfig",
    "TrialOutcome",
    "NumericalFailure",
    "TrajectoryAudit",
    "init_random_state",
    "derivative",
    "integrate_step",
    "integrate",
    "run_trial",
    "run_trials",
    "audit_trajectory",
]

SEED_MAX = 2**64 - 1
_CLAMP = 1.0 - np.finfo(float).eps


class Status(str, enum.Enum):
    BALANCED = "balanced"
    JAMMED = "jammed"
    UNDECIDED = "undecided"


class NumericalFailure(ArithmeticError):
    """Non-finite weights appeared during integration."""

    def __init__(self, step: int, seed: int | None = None):
        self.step = step
        self.seed = seed
        where = f"at step {step}" if seed is None else f"at step {step} (seed {seed})"
        super().__init__(f"non-finite link weight {where}")


@dataclass(frozen=True)
class CouplingParams:
    """Interlayer coupling.

    ``beta1`` scales the pull of layer-2 weights on layer 1, ``beta2`` the
    reverse. Negative values are accepted but lie outside the validated range.
    """

    beta1: float
    beta2: float

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @property
    def in_validated_range(self) -> bool:
        return self.beta1 >= 0 and self.beta2 >= 0

    def swapped(self) -> "CouplingParams":
        return CouplingParams(self.beta2, self.beta1)


@dataclass(frozen=True)
class DynamicsConfig:
    n: int = 4
    dt: float = 0.01
    t_max: float = 100.0
    saturation_floor: float = 0.99
    stationarity_window: int = 3
    normalize_triadic_sum: bool = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not (math.isfinite(self.t_max) and self.t_max >= self.dt):
            raise ValueError(f"t_max must be >= dt, got {self.t_max}")
        if not 0 < self.saturation_floor < 1:
            raise ValueError(f"saturation_floor must lie in (0, 1), got {self.saturation_floor}")
        if int(self.stationarity_window) != self.stationarity_window or self.stationarity_window < 1:
            raise ValueError(f"stationarity_window must be an integer >= 1, got {self.stationarity_window}")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_max / self.dt))

    @property
    def check_interval(self) -> int:
        # round() first so that 1/0.01 == 100 rather than 101 from float noise
        return max(1, math.ceil(round(1.0 / self.dt, 9)))

    @property
    def triadic_scale(self) -> float:
        return float(self.n - 2) if self.normalize_triadic_sum else 1.0

    def with_n(self, n: int) -> "DynamicsConfig":
        return replace(self, n=n)


@dataclass(frozen=True)
class TrialOutcome:
    status: Status
    t_final: float
    report: BalanceReport
    seed: int | None = None
    steps: int = 0
    layers_sign_identical: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "layers_sign_identical", self.report.layers_sign_identical)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _random_layers(n: int, seeds: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(n, 1)
    w = np.zeros((2, len(seeds), n, n))
    for b, seed in enumerate(seeds):
        rng = np.random.default_rng(_check_seed(seed))
        w[:, b, iu, ju] = rng.uniform(-1.0, 1.0, size=(2, len(iu)))
    w[:, :, ju, iu] = w[:, :, iu, ju]
    return w[0], w[1]


def init_random_state(n: int, seed: int) -> MultiplexState:
    """Random bilayer state with i.i.d. uniform(-1, 1) link weights.

    Layer 1's upper triangle is drawn first (row-major), then layer 2's,
    from ``numpy.random.default_rng(seed)``.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    w1, w2 = _random_layers(n, [seed])
    return MultiplexState.from_arrays(w1[0], w2[0])


def _triadic(w: np.ndarray) -> np.ndarray:
    # w @ w with an explicit, fixed summation order. Diagonal terms vanish
    # (w_ii == 0), so the k == i, j exclusion is automatic off the diagonal.
    n = w.shape[-1]
    t = w[..., :, 0:1] * w[..., 0:1, :]
    for k in range(1, n):
        t += w[..., :, k : k + 1] * w[..., k : k + 1, :]
    return t


def _rates(w1, w2, beta1: float, beta2: float, scale: float):
    t1 = _triadic(w1)
    t2 = _triadic(w2)
    if scale != 1.0:
        t1 /= scale
        t2 /= scale
    d1 = (1.0 - w1 * w1) * (t1 + beta1 * w2)
    d2 = (1.0 - w2 * w2) * (t2 + beta2 * w1)
    diag = np.arange(w1.shape[-1])
    d1[..., diag, diag] = 0.0
    d2[..., diag, diag] = 0.0
    return d1, d2


def _mirror_upper(w: np.ndarray) -> np.ndarray:
    u = np.triu(w, 1)
    return u + np.swapaxes(u, -1, -2)


def _rk4(w1, w2, beta1, beta2, dt, scale):
    # overflow surfaces as non-finite weights, which callers turn into NumericalFailure
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_unchecked(w1, w2, beta1, beta2, dt, scale)


def _rk4_unchecked(w1, w2, beta1, beta2, dt, scale):
    f = _rates
    a1, a2 = f(w1, w2, beta1, beta2, scale)
    h = 0.5 * dt
    b1, b2 = f(w1 + h * a1, w2 + h * a2, beta1, beta2, scale)
    c1, c2 = f(w1 + h * b1, w2 + h * b2, beta1, beta2, scale)
    e1, e2 = f(w1 + dt * c1, w2 + dt * c2, beta1, beta2, scale)
    g = dt / 6.0
    n1 = w1 + g * (a1 + 2.0 * b1 + 2.0 * c1 + e1)
    n2 = w2 + g * (a2 + 2.0 * b2 + 2.0 * c2 + e2)
    out = []
    for w in (n1, n2):
        w = _mirror_upper(w)
        over = np.abs(w) > 1.0
        if over.any():
            w = np.where(over, np.copysign(_CLAMP, w), w)
        out.append(w)
    return out[0], out[1]


def _finite_rows(w1, w2) -> np.ndarray:
    return np.isfinite(w1).all(axis=(-2, -1)) & np.isfinite(w2).all(axis=(-2, -1))


def derivative(m: MultiplexState, p: CouplingParams, cfg: DynamicsConfig):
    """Time derivative of both layers as a pair of ``n x n`` arrays."""
    d1, d2 = _rates(m.layer1.w[None], m.layer2.w[None], p.beta1, p.beta2, _scale_for(m.n, cfg))
    return d1[0], d2[0]


def _scale_for(n: int, cfg: DynamicsConfig) -> float:
    return float(n - 2) if cfg.normalize_triadic_sum else 1.0


def integrate_step(m: MultiplexState, p: CouplingParams, cfg: DynamicsConfig, step: int = 1) -> MultiplexState:
    """One RK4 step of size ``cfg.dt``.

    ``step`` is only used to label a :class:`NumericalFailure`.
    """
    w1, w2 = _rk4(m.layer1.w[None], m.layer2.w[None], p.beta1, p.beta2, cfg.dt, _scale_for(m.n, cfg))
    if not _finite_rows(w1, w2)[0]:
        raise NumericalFailure(step)
    return MultiplexState.from_arrays(w1[0], w2[0])


def integrate(m: MultiplexState, p: CouplingParams, cfg: DynamicsConfig, steps: int) -> MultiplexState:
    """Apply ``steps`` RK4 steps without classification."""
    w1, w2 = m.layer1.w[None], m.layer2.w[None]
    scale = _scale_for(m.n, cfg)
    for step in range(1, steps + 1):
        w1, w2 = _rk4(w1, w2, p.beta1, p.beta2, cfg.dt, scale)
        if not _finite_rows(w1, w2)[0]:
            raise NumericalFailure(step)
    return MultiplexState.from_arrays(w1[0], w2[0])


# observer(step, trial_ids, w1, w2) is called after every step on the active trials
Observer = Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]


def _joint_signs(w1, w2) -> np.ndarray:
    iu, ju = np.triu_indices(w1.shape[-1], 1)
    return np.concatenate([np.sign(w1[:, iu, ju]), np.sign(w2[:, iu, ju])], axis=1).astype(np.int8)


def _saturated(w1, w2, floor: float) -> np.ndarray:
    iu, ju = np.triu_indices(w1.shape[-1], 1)
    return (np.abs(w1[:, iu, ju]) >= floor).all(axis=1) & (np.abs(w2[:, iu, ju]) >= floor).all(axis=1)


def _outcome(status, t_final, w1, w2, seed, steps) -> TrialOutcome:
    report = multiplex_balance_report(MultiplexState.from_arrays(w1, w2), eps=0.0)
    return TrialOutcome(status=status, t_final=t_final, report=report, seed=seed, steps=steps)


def _simulate(w1, w2, p: CouplingParams, cfg: DynamicsConfig, seeds, observer: Observer | None):
    """Integrate a stack of trials until each is classified or ``t_max`` hits."""
    total = w1.shape[0]
    results: list = [None] * total
    active = np.arange(total)
    streak = np.zeros(total, dtype=int)
    prev = None
    scale = cfg.triadic_scale
    interval = cfg.check_interval
    n_steps = cfg.n_steps
    for step in range(1, n_steps + 1):
        if active.size == 0:
            break
        w1, w2 = _rk4(w1, w2, p.beta1, p.beta2, cfg.dt, scale)
        ok = _finite_rows(w1, w2)
        if not ok.all():
            for t in active[~ok]:
                results[t] = NumericalFailure(step, seeds[t])
            active, w1, w2, streak = active[ok], w1[ok], w2[ok], streak[ok]
            if prev is not None:
                prev = prev[ok]
        if observer is not None:
            observer(step, active, w1, w2)
        if step % interval:
            continue
        signs = _joint_signs(w1, w2)
        if prev is None:
            streak[:] = 0
        else:
            same = (signs == prev).all(axis=1)
            streak = np.where(same, streak + 1, 0)
        prev = signs
        done = _saturated(w1, w2, cfg.saturation_floor) & (streak >= cfg.stationarity_window)
        if done.any():
            t_final = step * cfg.dt
            for row in np.flatnonzero(done):
                o = _outcome(Status.JAMMED, t_final, w1[row], w2[row], seeds[active[row]], step)
                if o.report.multiplex_balanced:
                    o = replace(o, status=Status.BALANCED)
                results[active[row]] = o
            keep = ~done
            active, w1, w2, streak, prev = active[keep], w1[keep], w2[keep], streak[keep], prev[keep]
    for row, t in enumerate(active):
        results[t] = _outcome(Status.UNDECIDED, cfg.t_max, w1[row], w2[row], seeds[t], n_steps)
    return results


def run_trials(
    p: CouplingParams,
    cfg: DynamicsConfig,
    seeds: Sequence[int],
    *,
    return_exceptions: bool = False,
    observer: Observer | None = None,
) -> list:
    """Run one trial per seed as a single vectorised batch.

    With ``return_exceptions`` a failed trial yields its
    :class:`NumericalFailure` in place of an outcome; otherwise the first
    failure is raised.
    """
    seeds = [_check_seed(s) for s in seeds]
    if not seeds:
        return []
    w1, w2 = _random_layers(cfg.n, seeds)
    results = _simulate(w1, w2, p, cfg, seeds, observer)
    if not return_exceptions:
        for r in results:
            if isinstance(r, NumericalFailure):
                raise r
    return results


def run_trial(
    p: CouplingParams,
    cfg: DynamicsConfig,
    seed: int,
    *,
    snapshot_dir=None,
    snapshot_every: int | None = None,
) -> TrialOutcome:
    """Integrate one random initial state until it is classified.

    A trial is classified at a check (every ``ceil(1/dt)`` steps) once all
    links of both layers satisfy ``|w| >= saturation_floor`` and the joint
    sign pattern has equalled the previous check's pattern for
    ``stationarity_window`` checks in a row. It is then BALANCED if both
    layers are balanced and JAMMED otherwise. Trials still running at
    ``t_max`` are UNDECIDED.

    If ``snapshot_dir`` is given, both layers are written there in the
    weights text format every ``snapshot_every`` steps (default: every check).
    """
    observer = None
    if snapshot_dir is not None:
        out = Path(snapshot_dir)
        out.mkdir(parents=True, exist_ok=True)
        every = snapshot_every or cfg.check_interval

        def observer(step, ids, w1, w2):
            if step % every == 0 and ids.size:
                write_weights(LayerWeights(w1[0]), out / f"step{step:08d}_layer1.txt")
                write_weights(LayerWeights(w2[0]), out / f"step{step:08d}_layer2.txt")

    return run_trials(p, cfg, [seed], observer=observer)[0]


@dataclass
class TrajectoryAudit:
    """Invariant bookkeeping over every step of one trajectory.

    ``sign_flips[floor]`` counts link-steps at which a link that had once
    reached ``|w| >= floor`` showed the opposite sign, and
    ``locked_links[floor]`` counts the links that ever reached the floor.
    """

    steps: int = 0
    max_asymmetry: float = 0.0
    max_abs_weight: float = 0.0
    max_abs_diagonal: float = 0.0
    sign_flips: dict[float, int] = field(default_factory=dict)
    locked_links: dict[float, int] = field(default_factory=dict)
    outcome: TrialOutcome | None = None

    @property
    def well_formed(self) -> bool:
        """Exact symmetry, zero diagonal and ``|w| <= 1`` at every step."""
        return self.max_asymmetry == 0.0 and self.max_abs_weight <= 1.0 and self.max_abs_diagonal == 0.0


def audit_trajectory(
    p: CouplingParams, cfg: DynamicsConfig, seed: int, floors: Sequence[float] = (0.99, 1.0)
) -> TrajectoryAudit:
    """Run a trial while checking symmetry, bounds and sign locking."""
    audit = TrajectoryAudit(sign_flips={float(f): 0 for f in floors}, locked_links={float(f): 0 for f in floors})
    locked = {f: np.zeros((2, cfg.n, cfg.n), dtype=np.int8) for f in audit.sign_flips}

    def observer(step, ids, w1, w2):
        if not ids.size:
            return
        audit.steps = step
        for k, w in enumerate((w1[0], w2[0])):
            audit.max_asymmetry = max(audit.max_asymmetry, float(np.max(np.abs(w - w.T))))
            audit.max_abs_weight = max(audit.max_abs_weight, float(np.max(np.abs(w))))
            audit.max_abs_diagonal = max(audit.max_abs_diagonal, float(np.max(np.abs(np.diag(w)))))
            s = np.sign(w).astype(np.int8)
            for f, lk in locked.items():
                audit.sign_flips[f] += int(np.count_nonzero((lk[k] != 0) & (s != lk[k])))
                fresh = (lk[k] == 0) & (np.abs(w) >= f)
                lk[k][fresh] = s[fresh]
                # each link appears twice in the symmetric matrix
                audit.locked_links[f] += int(np.count_nonzero(fresh)) // 2

    audit.outcome = run_trials(p, cfg, [seed], observer=observer)[0]
    return audit
