"""Command-line front end.

Commands::

    multiplex-balance trial   run one trajectory, print the outcome as key=value lines
    multiplex-balance sweep   run a grid, write results.csv and heatmaps to --out
    multiplex-balance render  turn a results CSV into heatmaps
    multiplex-balance oracle  exhaustive balance-count self test

Configuration files are flat ``key = value`` text, one entry per line, ``#``
starts a comment. Keys are the :class:`RunConfig` field names. Flags
override file values. List values are comma separated (``0,0.5,1``) or an
inclusive range ``start:stop:step``.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical
failure, 4 oracle FAIL, 5 I/O error. The worker count comes from the
``MULTIPLEX_BALANCE_WORKERS`` environment variable and never changes results.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dynamics import CouplingParams, DynamicsConfig, NumericalFailure, run_trial
from .output import ResultsIOError, read_results_csv, render_heatmap, write_results_csv
from .signed import ORACLE_MAX_N, OracleDisagreement, enumerate_balanced_configs
from .sweep import GridSpec, sweep

__all__ = ["ConfigError", "RunConfig", "parse_config", "format_config", "run_oracle_command", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE_FAIL = 4
EXIT_IO = 5

RESULTS_NAME = "results.csv"

_DEFAULT_BETAS = tuple(0.25 * i for i in range(9))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    beta1: tuple[float, ...] = _DEFAULT_BETAS
    beta2: tuple[float, ...] = _DEFAULT_BETAS
    sizes: tuple[int, ...] = (4, 6, 9)
    trials: int = 200
    seed: int = 1
    dt: float = 0.01
    t_max: float = 100.0
    saturation_floor: float = 0.99
    stationarity_window: int = 3
    normalize_triadic_sum: bool = True
    out: str = "results"
    heatmaps: bool = True
    csv: str = ""
    dump_dir: str = ""

    def __post_init__(self):
        _validate(self)

    def dynamics(self, n: int | None = None) -> DynamicsConfig:
        return DynamicsConfig(
            n=self.sizes[0] if n is None else n,
            dt=self.dt,
            t_max=self.t_max,
            saturation_floor=self.saturation_floor,
            stationarity_window=self.stationarity_window,
            normalize_triadic_sum=self.normalize_triadic_sum,
        )

    def grid(self) -> GridSpec:
        return GridSpec(self.beta1, self.beta2, self.sizes, self.trials, self.seed, self.dynamics())


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _fail(key, value, msg):
    raise ConfigError(f"{key} {msg} (got {key}={_show(value)})")


def _validate(c: RunConfig) -> None:
    for key in ("beta1", "beta2"):
        vals = getattr(c, key)
        if not vals:
            _fail(key, vals, "must not be empty")
        if not all(math.isfinite(v) for v in vals):
            _fail(key, vals, "must be finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            _fail(key, vals, "must be strictly ascending")
    if not c.sizes or any(n < 3 for n in c.sizes):
        _fail("sizes", c.sizes, "must be non-empty with every size >= 3")
    if len(set(c.sizes)) != len(c.sizes):
        _fail("sizes", c.sizes, "must be distinct")
    if c.trials < 1:
        _fail("trials", c.trials, "must be >= 1")
    if not 0 <= c.seed < 2**64:
        _fail("seed", c.seed, "must be an unsigned 64-bit integer")
    if not (math.isfinite(c.dt) and c.dt > 0):
        _fail("dt", c.dt, "must be > 0")
    if not (math.isfinite(c.t_max) and c.t_max >= c.dt):
        _fail("t_max", c.t_max, "must be >= dt")
    if not 0 < c.saturation_floor < 1:
        _fail("saturation_floor", c.saturation_floor, "must lie in (0, 1)")
    if c.stationarity_window < 1:
        _fail("stationarity_window", c.stationarity_window, "must be >= 1")


def _show(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_show(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if not step > 0:
            raise ValueError("range step must be > 0")
        if stop < start:
            raise ValueError("range stop must be >= start")
        count = math.floor((stop - start) / step + 1e-9) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    return tuple(float(p) for p in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    text = text.strip()
    return tuple(int(p) for p in text.split(",")) if text else ()


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


_PARSERS = {
    "beta1": _parse_floats,
    "beta2": _parse_floats,
    "sizes": _parse_ints,
    "trials": int,
    "seed": int,
    "dt": float,
    "t_max": float,
    "saturation_floor": float,
    "stationarity_window": int,
    "normalize_triadic_sum": _parse_bool,
    "out": str,
    "heatmaps": _parse_bool,
    "csv": str,
    "dump_dir": str,
}


def _convert(key: str, raw: str):
    try:
        return _PARSERS[key](raw)
    except ValueError as e:
        raise ConfigError(f"invalid value for {key}: {raw!r} ({e})") from None


def read_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}") from None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, value)
    return values


def format_config(c: RunConfig) -> str:
    """Effective configuration in config-file syntax; re-parses to ``c``."""
    return "".join(f"{name} = {_show(getattr(c, name))}\n" for name in _FIELDS)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value configuration file")
    p.add_argument("--seed", metavar="U64", help="master seed (sweep) or trial seed (trial)")
    p.add_argument("--trials", metavar="INT", help="trials per grid cell")
    p.add_argument("--beta1", metavar="LIST", help="comma list or start:stop:step")
    p.add_argument("--beta2", metavar="LIST", help="comma list or start:stop:step")
    p.add_argument("--sizes", metavar="LIST", help="comma list of node counts")
    p.add_argument("--dt", metavar="REAL")
    p.add_argument("--t-max", dest="t_max", metavar="REAL")
    p.add_argument("--saturation-floor", dest="saturation_floor", metavar="REAL")
    p.add_argument("--stationarity-window", dest="stationarity_window", metavar="INT")
    p.add_argument(
        "--normalize-triadic-sum",
        dest="normalize_triadic_sum",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="divide the triadic sum by n-2 (default: on)",
    )
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiplex-balance", description="Heider balance dynamics on bilayer multiplex networks."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("trial", help="run a single trajectory")
    _add_common(p)
    p.add_argument("--dump-dir", dest="dump_dir", metavar="DIR", help="write weight snapshots here")
    p = sub.add_parser("sweep", help="Monte Carlo grid over (beta1, beta2, n)")
    _add_common(p)
    p.add_argument("--heatmaps", dest="heatmaps", action=argparse.BooleanOptionalAction, default=None)
    p = sub.add_parser("render", help="render heatmaps from a results CSV")
    _add_common(p)
    p.add_argument("--csv", metavar="FILE", help="results CSV (default: <out>/results.csv)")
    p = sub.add_parser("oracle", help="exhaustive balanced-configuration count")
    p.add_argument("n", nargs="*", type=int, default=[3, 4, 5], help=f"node counts in [3, {ORACLE_MAX_N}]")
    return parser


def parse_config(args: argparse.Namespace | Sequence[str], config_file=None) -> RunConfig:
    """Merge defaults, an optional config file and flags into a RunConfig.

    ``args`` is either parsed flags or a raw flag list (using the ``sweep``
    flag set). Flags win over the file.
    """
    if not isinstance(args, argparse.Namespace):
        args = build_parser().parse_args(["sweep", *args])
    values = {}
    path = config_file or getattr(args, "config", None)
    if path:
        values.update(read_config_file(path))
    for key in _FIELDS:
        raw = getattr(args, key, None)
        if raw is None:
            continue
        values[key] = raw if isinstance(raw, bool) else _convert(key, raw)
    try:
        return RunConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def run_oracle_command(n: int, stream=None) -> bool:
    """Print the balanced count on ``K_n`` and whether it equals ``2**(n-1)``."""
    stream = sys.stdout if stream is None else stream
    if not 3 <= n <= ORACLE_MAX_N:
        raise ConfigError(f"oracle n must be in [3, {ORACLE_MAX_N}] (got n={n})")
    total = 2 ** (n * (n - 1) // 2)
    try:
        balanced = enumerate_balanced_configs(n)
    except OracleDisagreement as e:
        print(f"n={n}: {e}, FAIL", file=stream)
        return False
    ok = balanced == 2 ** (n - 1)
    print(f"n={n}: {total} total, {balanced} balanced, {'PASS' if ok else 'FAIL'}", file=stream)
    return ok


def _cmd_trial(cfg: RunConfig) -> int:
    for key in ("beta1", "beta2", "sizes"):
        if len(getattr(cfg, key)) != 1:
            raise ConfigError(f"trial needs a single value for {key} (got {key}={_show(getattr(cfg, key))})")
    p = CouplingParams(cfg.beta1[0], cfg.beta2[0])
    o = run_trial(p, cfg.dynamics(), cfg.seed, snapshot_dir=cfg.dump_dir or None)
    r = o.report
    lines = {
        "status": o.status.value,
        "t_final": repr(o.t_final),
        "steps": o.steps,
        "seed": cfg.seed,
        "beta1": repr(p.beta1),
        "beta2": repr(p.beta2),
        "n": cfg.sizes[0],
        "multiplex_balanced": _show(r.multiplex_balanced),
        "layer1_balanced": _show(r.layer_balanced[0]),
        "layer2_balanced": _show(r.layer_balanced[1]),
        "layer1_triad_fraction": "indeterminate" if r.triad_fraction[0] is None else repr(r.triad_fraction[0]),
        "layer2_triad_fraction": "indeterminate" if r.triad_fraction[1] is None else repr(r.triad_fraction[1]),
        "layers_sign_identical": _show(o.layers_sign_identical),
    }
    for k, v in lines.items():
        print(f"{k}={v}")
    return EXIT_OK


def _render(cells, sizes, out: Path) -> None:
    for n in sizes:
        render_heatmap(cells, n, out / f"heatmap_n{n}.pgm")


def _cmd_sweep(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    cells = sweep(cfg.grid())
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ResultsIOError(f"cannot create {out}: {e.strerror or e}") from e
    write_results_csv(cells, out / RESULTS_NAME)
    if cfg.heatmaps:
        _render(cells, cfg.sizes, out)
    failures = sum(c.failures for c in cells)
    if failures:
        print(f"warning: {failures} trial(s) hit a numerical failure and were counted undecided", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_render(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    src = Path(cfg.csv) if cfg.csv else out / RESULTS_NAME
    cells = read_results_csv(src)
    out.mkdir(parents=True, exist_ok=True)
    _render(cells, sorted({c.n for c in cells}), out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        if args.command == "oracle":
            ok = True
            for n in args.n:
                ok &= run_oracle_command(n)
            return EXIT_OK if ok else EXIT_ORACLE_FAIL
        cfg = parse_config(args)
        if args.print_config:
            sys.stdout.write(format_config(cfg))
            return EXIT_OK
        return {"trial": _cmd_trial, "sweep": _cmd_sweep, "render": _cmd_render}[args.command](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ResultsIOError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def run() -> None:
    sys.exit(main())
