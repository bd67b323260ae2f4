import io

import numpy as np
import pytest

from multiplex_balance.cli import (
    ConfigError,
    RunConfig,
    format_config,
    main,
    parse_config,
    read_config_file,
    run_oracle_command,
)
from multiplex_balance.output import read_pgm, read_results_csv
from multiplex_balance.sweep import default_grid


def test_defaults_are_default_grid():
    cfg = parse_config([])
    assert cfg == RunConfig()
    g, d = cfg.grid(), default_grid()
    assert (g.beta1_values, g.beta2_values, g.sizes, g.trials_per_cell) == (
        d.beta1_values,
        d.beta2_values,
        d.sizes,
        d.trials_per_cell,
    )
    assert g.dynamics == d.dynamics


def test_flag_overrides_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\ntrials = 100\nbeta1 = 0:1:0.5  # inline\n")
    cfg = parse_config(["--config", str(f), "--trials", "500"])
    assert cfg.trials == 500
    assert cfg.beta1 == (0.0, 0.5, 1.0)


def test_dt_zero_rejected(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("dt = 0\n")
    with pytest.raises(ConfigError, match="dt must be > 0"):
        parse_config(["--config", str(f)])


@pytest.mark.parametrize(
    "text, msg",
    [
        ("bogus = 1\n", "unknown key 'bogus'"),
        ("trials\n", "expected key = value"),
        ("trials = many\n", "invalid value for trials"),
        ("trials = 1\ntrials = 2\n", "duplicate"),
        ("sizes = 2,4\n", "sizes"),
        ("beta1 = 1,0\n", "beta1 must be strictly ascending"),
        ("normalize_triadic_sum = maybe\n", "normalize_triadic_sum"),
    ],
)
def test_config_errors(tmp_path, text, msg):
    f = tmp_path / "run.cfg"
    f.write_text(text)
    with pytest.raises(ConfigError, match=msg):
        parse_config(["--config", str(f)])


def test_range_syntax():
    cfg = parse_config(["--beta1", "0:2:0.25", "--beta2", "0.5", "--sizes", "4,9"])
    assert cfg.beta1 == tuple(0.25 * i for i in range(9))
    assert cfg.beta2 == (0.5,)
    assert cfg.sizes == (4, 9)


def test_print_config_round_trip(tmp_path, capsys):
    args = ["sweep", "--beta1", "0,0.1,0.3", "--trials", "7", "--no-normalize-triadic-sum", "--print-config"]
    assert main(args) == 0
    text = capsys.readouterr().out
    f = tmp_path / "echo.cfg"
    f.write_text(text)
    again = parse_config(["--config", str(f)])
    assert again == parse_config(args[1:-1])
    assert format_config(again) == text
    assert read_config_file(f)["normalize_triadic_sum"] is False


def test_oracle_command():
    out = io.StringIO()
    assert run_oracle_command(3, out)
    assert run_oracle_command(4, out)
    assert out.getvalue().splitlines() == ["n=3: 8 total, 4 balanced, PASS", "n=4: 64 total, 8 balanced, PASS"]
    with pytest.raises(ConfigError):
        run_oracle_command(7, out)


def test_oracle_exit_codes(capsys):
    assert main(["oracle", "3", "4"]) == 0
    assert main(["oracle", "7"]) == 2
    assert "must be in [3, 6]" in capsys.readouterr().err


def test_trial_command(capsys):
    assert main(["trial", "--beta1", "0", "--beta2", "0", "--sizes", "4", "--seed", "3"]) == 0
    lines = dict(l.split("=", 1) for l in capsys.readouterr().out.splitlines())
    assert lines["status"] in {"balanced", "jammed", "undecided"}
    assert lines["n"] == "4"
    assert {"t_final", "layers_sign_identical", "multiplex_balanced"} <= set(lines)


def test_trial_needs_single_values(capsys):
    assert main(["trial"]) == 2
    assert "single value for beta1" in capsys.readouterr().err


def test_trial_numerical_failure(capsys):
    assert main(["trial", "--beta1", "1e308", "--beta2", "0", "--sizes", "4"]) == 3


def test_sweep_and_render(tmp_path):
    out = tmp_path / "run"
    args = ["sweep", "--beta1", "0,1", "--beta2", "0,0.5,2", "--sizes", "4,5", "--trials", "6", "--out", str(out)]
    assert main(args) == 0
    cells = read_results_csv(out / "results.csv")
    assert len(cells) == 12
    for n in (4, 5):
        px = read_pgm(out / f"heatmap_n{n}.pgm")
        assert px.shape == (3, 2)
        assert (out / f"heatmap_n{n}.svg").exists()
    rendered = tmp_path / "again"
    assert main(["render", "--csv", str(out / "results.csv"), "--out", str(rendered)]) == 0
    for n in (4, 5):
        assert (rendered / f"heatmap_n{n}.pgm").read_bytes() == (out / f"heatmap_n{n}.pgm").read_bytes()


def test_sweep_reports_numerical_failure(tmp_path):
    args = ["sweep", "--beta1", "1e308", "--beta2", "0", "--sizes", "4", "--trials", "2", "--out", str(tmp_path)]
    assert main(args) == 3
    assert read_results_csv(tmp_path / "results.csv")[0].undecided == 2


def test_render_missing_csv(tmp_path):
    assert main(["render", "--csv", str(tmp_path / "nothing.csv"), "--out", str(tmp_path)]) == 5


def test_usage_error_exit_code():
    assert main(["frobnicate"]) == 2
