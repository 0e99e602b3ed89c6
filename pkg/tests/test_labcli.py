import json
import math
import os

import numpy as np
import pytest

from sqvar import cli
from sqvar.labcli import (
    CSV_COLUMNS,
    ExperimentConfig,
    InvariantViolation,
    TrialRecord,
    _check_record,
    emit_plotdata,
    format_summary,
    parse_config,
    records_from_csv,
    records_to_csv,
    run_experiment,
    run_trial,
    summarize,
    write_outputs,
)
from sqvar.seqcore import DistributionSpec

CONFIG_TEXT = """
[experiment]
spec = gaussian:sigma=1
n_grid = 64, 128
trials = 3
master_seed = 99
algorithms = exact, blocked:4, dyadic_upper, greedy
output = {out}

[classify]
eps = 0.1
b = 8

[greedy]
s = 2
c = 4
alpha = 0.25
eps3 = 0.5
"""


def _config(tmp_path, **overrides):
    out = str(tmp_path / "records.csv") if tmp_path is not None else "records.csv"
    kwargs = dict(
        spec=DistributionSpec("gaussian"),
        n_grid=(64, 128),
        trials=3,
        master_seed=99,
        algorithms=("exact", "blocked", "dyadic_upper"),
        block=4,
        class_eps=0.1,
        class_b=8.0,
        output_path=out,
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def test_config_validation():
    with pytest.raises(ValueError):
        _config(None, n_grid=(128, 64))
    with pytest.raises(ValueError):
        _config(None, trials=-1)
    with pytest.raises(ValueError):
        _config(None, algorithms=("exact", "magic"))
    with pytest.raises(ValueError, match="cap"):
        _config(None, n_grid=(1 << 16,))
    with pytest.raises(ValueError, match="greedy"):
        _config(None, algorithms=("greedy",))


def test_run_trial_fields_and_ordering(tmp_path):
    cfg = _config(tmp_path)
    records = run_experiment(cfg)
    assert [(r.n, r.trial_index) for r in records] == [
        (64, 0), (64, 1), (64, 2), (128, 0), (128, 1), (128, 2)]
    for r in records:
        assert r.v2_blocked <= r.v2_exact <= r.v2_dyadic_upper
        assert r.s_n_sq <= r.v2_exact + 1e-9
        assert r.ratio == pytest.approx(r.v2_exact / (2 * r.n * math.log(math.log(r.n))))
        assert r.ratio_lo == pytest.approx(r.ratio) and r.ratio_hi == pytest.approx(r.ratio)
        assert r.good_len + r.medium_len + r.bad_len == r.n
        assert r.wall_time_ms > 0


def test_trials_zero_gives_header_only(tmp_path):
    cfg = _config(tmp_path, trials=0)
    records = run_experiment(cfg)
    assert records == []
    write_outputs(records, cfg)
    text = open(cfg.output_path).read()
    assert text == ",".join(CSV_COLUMNS) + "\n"


def test_determinism_under_thread_counts(tmp_path):
    cfg = _config(tmp_path)
    outputs = []
    for threads in ("1", "8"):
        os.environ["SQVAR_THREADS"] = threads
        try:
            records = run_experiment(cfg)
        finally:
            del os.environ["SQVAR_THREADS"]
        outputs.append(records_to_csv(records))
    assert outputs[0] == outputs[1]


def test_csv_round_trip(tmp_path):
    cfg = _config(tmp_path)
    records = run_experiment(cfg)
    text = records_to_csv(records)
    back = records_from_csv(text)
    for a, b in zip(records, back):
        for col in CSV_COLUMNS:
            assert getattr(a, col) == getattr(b, col), col
    assert records_to_csv(back) == text


def test_jsonl_mirror(tmp_path):
    cfg = _config(tmp_path, jsonl_mirror=True, trials=1)
    records = run_experiment(cfg)
    write_outputs(records, cfg)
    lines = open(cfg.output_path + ".jsonl").read().splitlines()
    assert len(lines) == len(records)
    row = json.loads(lines[0])
    assert row["n"] == 64 and row["v2_exact"] == records[0].v2_exact


def test_invariant_violation_detected():
    rec = TrialRecord(
        trial_index=0, n=64, seed=1,
        v2_exact=10.0, v2_blocked=11.0, v2_dyadic_upper=100.0, v2_greedy=None,
        ratio=None, ratio_lo=None, ratio_hi=None, s_n_sq=1.0,
    )
    with pytest.raises(InvariantViolation, match="blocked"):
        _check_record(rec)


def test_parse_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG_TEXT.format(out=tmp_path / "r.csv"))
    cfg = parse_config(str(path))
    assert cfg.spec == DistributionSpec("gaussian")
    assert cfg.n_grid == (64, 128)
    assert cfg.algorithms == ("exact", "blocked", "dyadic_upper", "greedy")
    assert cfg.block == 4
    assert cfg.greedy_params.c_copies == 4
    assert cfg.class_b == 8.0


def test_summarize_single_and_synthetic():
    base = dict(seed=0, v2_blocked=None, v2_dyadic_upper=None, v2_greedy=None,
                ratio_lo=None, ratio_hi=None, s_n_sq=0.0)
    one = TrialRecord(trial_index=0, n=64, v2_exact=5.0, ratio=1.5, **base)
    rows = summarize([one])
    assert rows[0]["ratio_median"] == 1.5
    assert rows[0]["ratio_q1"] == 1.5 and rows[0]["ratio_q3"] == 1.5

    recs = [TrialRecord(trial_index=i, n=64, v2_exact=1.0, ratio=r, **base)
            for i, r in enumerate([1.0, 2.0, 3.0, 4.0])]
    rows = summarize(recs)
    # linear-interpolation quartiles of [1,2,3,4]
    assert rows[0]["ratio_q1"] == 1.75
    assert rows[0]["ratio_median"] == 2.5
    assert rows[0]["ratio_q3"] == 3.25
    # permutation invariance
    rows_perm = summarize(list(reversed(recs)))
    assert rows_perm == rows
    with pytest.raises(ValueError):
        summarize([])
    assert "ratio_median" in format_summary(rows)


def test_emit_plotdata_kinds(tmp_path):
    cfg = _config(tmp_path, trials=2)
    records = run_experiment(cfg)
    ratio = emit_plotdata(records, "ratio_vs_n")
    lines = ratio.strip().split("\n")
    assert lines[0] == "n ratio"
    assert len(lines) == 1 + len(records)
    n0, r0 = lines[1].split()
    assert int(n0) == records[0].n and float(r0) == records[0].ratio

    cls = emit_plotdata(records, "class_vs_n")
    assert cls.splitlines()[0] == "n medium_frac bad_stat"
    assert all(len(ln.split()) == 3 for ln in cls.strip().splitlines()[1:])

    gap = emit_plotdata(records, "bound_gap")
    assert gap.splitlines()[0] == "n dyadic_over_exact blocked_over_exact"
    vals = gap.strip().splitlines()[1].split()
    assert float(vals[1]) >= 1.0 >= float(vals[2]) - 1e-9

    with pytest.raises(ValueError):
        emit_plotdata(records, "nope")
    single = emit_plotdata(records[:1], "ratio_vs_n")
    assert len(single.strip().split("\n")) == 2


# --- CLI ----------------------------------------------------------------------

def test_cli_compute(tmp_path, capsys):
    path = tmp_path / "x.csv"
    path.write_text("2\n1\n-3\n")
    assert cli.main(["compute", "--input", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"value": 18.0, "breakpoints": [0, 2, 3]}


def test_cli_compute_p1(tmp_path, capsys):
    path = tmp_path / "x.csv"
    path.write_text("1, -1\n")
    assert cli.main(["compute", "--input", str(path), "--p", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 2.0


def test_cli_simulate_identical_bytes(tmp_path, capsys):
    out = tmp_path / "records.csv"
    ini = tmp_path / "exp.ini"
    ini.write_text(CONFIG_TEXT.format(out=out))
    assert cli.main(["simulate", "--config", str(ini)]) == 0
    first = out.read_bytes()
    assert cli.main(["simulate", "--config", str(ini)]) == 0
    assert out.read_bytes() == first
    capsys.readouterr()
    assert cli.main(["summarize", "--input", str(out)]) == 0
    assert "ratio_median" in capsys.readouterr().out


def test_cli_plotdata(tmp_path, capsys):
    out = tmp_path / "records.csv"
    ini = tmp_path / "exp.ini"
    ini.write_text(CONFIG_TEXT.format(out=out))
    cli.main(["simulate", "--config", str(ini)])
    capsys.readouterr()
    assert cli.main(["plotdata", "--input", str(out), "--kind", "ratio_vs_n"]) == 0
    assert capsys.readouterr().out.startswith("n ratio\n")


def test_cli_families(capsys):
    assert cli.main(["families", "check", "--scheme", "dyadic", "--n", "5"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert cli.main(["families", "check", "--scheme", "h", "--n", "5", "--eps", "0.5"]) == 0
    assert cli.main(["families", "check", "--scheme", "l", "--s", "2", "--c", "4"]) == 0


def test_cli_greedy(capsys):
    rc = cli.main(["greedy", "--n", "256", "--spec", "gaussian:sigma=1", "--seed", "5"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("value=") and "ratio=" in out and "breakpoints=" in out


def test_cli_bounds_small(tmp_path):
    grid = tmp_path / "grid.csv"
    grid.write_text("t,L\n8,16\n10,32\n")
    out = tmp_path / "bounds.csv"
    rc = cli.main(["bounds", "--check", "bernstein", "--spec", "rademacher:sigma=1",
                   "--grid", str(grid), "--trials", "4000", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "threshold,empirical,bound,std_err,pass"
    assert len(lines) == 3
    assert all(ln.endswith("true") for ln in lines[1:])


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["compute", "--input", str(tmp_path / "missing.csv")]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("1 2 3\n")
    assert cli.main(["compute", "--input", str(bad), "--p", "0.5"]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["compute"])  # missing required --input
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == 1
    capsys.readouterr()
