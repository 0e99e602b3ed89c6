"""Configuration-driven experiment harness and record persistence.

A run samples one sequence per (n, trial) cell of the grid, applies the
requested variation algorithms plus classification, and emits one CSV row
per trial. Per-trial seeds are derived from (master_seed, n, trial_index),
so records are reproducible cell by cell and identical under any degree of
parallelism; rows are always ordered by (n, trial_index).
"""

from __future__ import annotations

import configparser
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import classify, greedy, variation
from .classify import ClassParams
from .greedy import GreedyParams
from .seqcore import DistributionSpec, mix_seed, sample_sequence


class InvariantViolation(RuntimeError):
    """A runtime sandwich/ordering contract failed on an emitted record."""


@dataclass(frozen=True)
class ExperimentConfig:
    spec: DistributionSpec
    n_grid: tuple[int, ...]
    trials: int
    master_seed: int
    algorithms: tuple[str, ...] = ("exact",)
    block: int = 4
    greedy_params: GreedyParams | None = None
    class_eps: float | None = None
    class_b: float | None = None
    output_path: str = "records.csv"
    jsonl_mirror: bool = False
    allow_large: bool = False

    def __post_init__(self):
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if list(self.n_grid) != sorted(set(self.n_grid)) or any(n < 1 for n in self.n_grid):
            raise ValueError("n_grid must be strictly increasing positive integers")
        bad = set(self.algorithms) - {"exact", "blocked", "dyadic_upper", "greedy"}
        if bad:
            raise ValueError(f"unknown algorithms: {sorted(bad)}")
        if "exact" in self.algorithms and not self.allow_large:
            over = [n for n in self.n_grid if n > variation.EXACT_SIZE_CAP]
            if over:
                raise ValueError(
                    f"exact algorithm requested for n={over} above the cap "
                    f"{variation.EXACT_SIZE_CAP}; set allow_large"
                )
        if "greedy" in self.algorithms and self.greedy_params is None:
            raise ValueError("greedy requested but no greedy parameters given")


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    n: int
    seed: int
    v2_exact: float | None
    v2_blocked: float | None
    v2_dyadic_upper: float | None
    v2_greedy: float | None
    ratio: float | None
    ratio_lo: float | None
    ratio_hi: float | None
    s_n_sq: float
    good_sum: float | None = None
    medium_sum: float | None = None
    bad_sum: float | None = None
    good_len: int | None = None
    medium_len: int | None = None
    bad_len: int | None = None
    b_param: float | None = None
    eps_param: float | None = None
    wall_time_ms: float | None = None


# wall_time_ms varies between reruns, so the byte-identical CSV contract
# keeps it out of the persisted header.
CSV_COLUMNS = [f.name for f in fields(TrialRecord) if f.name != "wall_time_ms"]
_INT_COLUMNS = {"trial_index", "n", "seed", "good_len", "medium_len", "bad_len"}


def _norm(n: int, sigma: float) -> float:
    return 2.0 * sigma * sigma * n * math.log(math.log(n))


def run_trial(config: ExperimentConfig, n: int, trial_index: int) -> TrialRecord:
    """One grid cell: sample, run the requested algorithms, classify."""
    t0 = time.perf_counter()
    seed = mix_seed(config.master_seed, n, trial_index)
    seq = sample_sequence(config.spec, n, seed)
    denom = _norm(n, config.spec.sigma) if n >= 16 else None

    exact = blocked = dyadic = greedy_v = None
    part = None
    if "exact" in config.algorithms:
        res = variation.sq_variation_exact(seq, allow_large=config.allow_large)
        exact, part = res.value, res.partition
    if "blocked" in config.algorithms:
        res = variation.sq_variation_blocked(seq, min(config.block, n))
        blocked = res.value
        if part is None:
            part = res.partition
    if "dyadic_upper" in config.algorithms:
        dyadic = variation.sq_variation_upper_dyadic(seq)
    if "greedy" in config.algorithms:
        greedy_v = greedy.greedy_partition(seq, config.greedy_params).value

    sn = float(np.sum(seq.samples)) ** 2
    lows = [v for v in (exact, blocked, greedy_v, sn) if v is not None]
    highs = [v for v in (exact, dyadic) if v is not None]
    ratio = exact / denom if (exact is not None and denom) else None
    ratio_lo = max(lows) / denom if denom else None
    ratio_hi = min(highs) / denom if (highs and denom) else None

    cls = {}
    if config.class_eps is not None and part is not None and n >= 16:
        br = classify.classify_partition(
            seq, part, ClassParams(config.class_eps, config.class_b, n)
        )
        cls = dict(
            good_sum=br.good_sum, medium_sum=br.medium_sum, bad_sum=br.bad_sum,
            good_len=br.good_len, medium_len=br.medium_len, bad_len=br.bad_len,
            b_param=config.class_b, eps_param=config.class_eps,
        )

    rec = TrialRecord(
        trial_index=trial_index, n=n, seed=seed,
        v2_exact=exact, v2_blocked=blocked, v2_dyadic_upper=dyadic, v2_greedy=greedy_v,
        ratio=ratio, ratio_lo=ratio_lo, ratio_hi=ratio_hi, s_n_sq=sn,
        wall_time_ms=(time.perf_counter() - t0) * 1e3, **cls,
    )
    _check_record(rec)
    return rec


def _check_record(rec: TrialRecord) -> None:
    tol = 1e-9 * max(1.0, *(v for v in (rec.v2_exact, rec.v2_dyadic_upper, rec.s_n_sq)
                            if v is not None))
    pairs = [
        ("blocked <= exact", rec.v2_blocked, rec.v2_exact),
        ("greedy <= exact", rec.v2_greedy, rec.v2_exact),
        ("exact <= dyadic_upper", rec.v2_exact, rec.v2_dyadic_upper),
        ("s_n_sq <= exact", rec.s_n_sq, rec.v2_exact),
    ]
    for name, lo, hi in pairs:
        if lo is not None and hi is not None and lo > hi + tol:
            raise InvariantViolation(
                f"record (n={rec.n}, trial={rec.trial_index}) breaks {name}: {lo} > {hi}"
            )


def _worker(args) -> TrialRecord:
    config, n, t = args
    return run_trial(config, n, t)


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    """All grid cells, ordered by (n, trial_index) regardless of scheduling."""
    tasks = [(config, n, t) for n in config.n_grid for t in range(config.trials)]
    workers = max(1, int(os.environ.get("SQVAR_THREADS", "1")))
    if workers == 1 or len(tasks) <= 1:
        return [run_trial(c, n, t) for c, n, t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_worker, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# --- persistence -------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def records_to_csv(records: list[TrialRecord]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join(_cell(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def records_from_csv(text: str) -> list[TrialRecord]:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    header = lines[0].split(",")
    if header != CSV_COLUMNS:
        raise ValueError("unexpected CSV header; not a sqvar records file")
    out = []
    for ln in lines[1:]:
        vals = ln.split(",")
        kwargs = {}
        for col, raw in zip(header, vals):
            if raw == "":
                kwargs[col] = None
            elif col in _INT_COLUMNS:
                kwargs[col] = int(raw)
            else:
                kwargs[col] = float(raw)
        out.append(TrialRecord(wall_time_ms=None, **kwargs))
    return out


def write_outputs(records: list[TrialRecord], config: ExperimentConfig) -> None:
    with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(records_to_csv(records))
    if config.jsonl_mirror:
        path = config.output_path + ".jsonl"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for r in records:
                fh.write(json.dumps({c: getattr(r, c) for c in CSV_COLUMNS}) + "\n")


# --- config files ------------------------------------------------------------

def parse_config(path_or_text: str, is_text: bool = False) -> ExperimentConfig:
    """Read the INI-style experiment description (see README for the schema)."""
    cp = configparser.ConfigParser()
    if is_text:
        cp.read_file(io.StringIO(path_or_text))
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            cp.read_file(fh)
    exp = cp["experiment"]
    algorithms = []
    block = 4
    for token in exp.get("algorithms", "exact").split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("blocked"):
            algorithms.append("blocked")
            if ":" in token:
                block = int(token.split(":", 1)[1])
        else:
            algorithms.append(token)
    gp = None
    if cp.has_section("greedy"):
        g = cp["greedy"]
        gp = GreedyParams(
            s=g.getint("s", 2),
            c_copies=g.getint("c", 4),
            alpha=g.getfloat("alpha", 0.25),
            epsilon3=g.getfloat("eps3", 0.5),
        )
    class_eps = class_b = None
    if cp.has_section("classify"):
        c = cp["classify"]
        class_eps = c.getfloat("eps", 0.1)
        class_b = c.getfloat("b", classify.default_bad_threshold())
    return ExperimentConfig(
        spec=DistributionSpec.from_string(exp.get("spec", "gaussian:sigma=1")),
        n_grid=tuple(int(v) for v in exp.get("n_grid").replace(",", " ").split()),
        trials=exp.getint("trials"),
        master_seed=exp.getint("master_seed", 0),
        algorithms=tuple(algorithms),
        block=block,
        greedy_params=gp,
        class_eps=class_eps,
        class_b=class_b,
        output_path=exp.get("output", "records.csv"),
        jsonl_mirror=exp.getboolean("jsonl", False),
        allow_large=exp.getboolean("allow_large", False),
    )


# --- summaries ---------------------------------------------------------------

def _quartiles(vals: list[float]) -> tuple[float, float, float]:
    q1, q2, q3 = np.percentile(np.asarray(vals), [25.0, 50.0, 75.0], method="linear")
    return float(q1), float(q2), float(q3)


def summarize(records: list[TrialRecord]) -> list[dict]:
    """Per-n quartiles of the ratio, class statistics, and the greedy gap."""
    if not records:
        raise ValueError("no records to summarize")
    rows = []
    for n in sorted({r.n for r in records}):
        grp = [r for r in records if r.n == n]
        row: dict = {"n": n, "count": len(grp)}
        ratios = [r.ratio for r in grp if r.ratio is not None]
        if ratios:
            row["ratio_q1"], row["ratio_median"], row["ratio_q3"] = _quartiles(ratios)
        bad = [r.bad_sum / (n * math.log(math.log(n)))
               for r in grp if r.bad_sum is not None]
        if bad:
            row["bad_stat_median"] = _quartiles(bad)[1]
        med = [r.medium_len / n for r in grp if r.medium_len is not None]
        if med:
            row["medium_frac_median"] = _quartiles(med)[1]
        gaps = [r.v2_greedy / r.v2_exact for r in grp
                if r.v2_greedy is not None and r.v2_exact]
        if gaps:
            row["greedy_over_exact_median"] = _quartiles(gaps)[1]
        rows.append(row)
    return rows


def format_summary(rows: list[dict]) -> str:
    keys = ["n", "count", "ratio_q1", "ratio_median", "ratio_q3",
            "bad_stat_median", "medium_frac_median", "greedy_over_exact_median"]
    out = ["  ".join(f"{k:>24s}" for k in keys)]
    for row in rows:
        cells = []
        for k in keys:
            v = row.get(k)
            if v is None:
                cells.append(f"{'-':>24s}")
            elif isinstance(v, int):
                cells.append(f"{v:>24d}")
            else:
                cells.append(f"{v:>24.6g}")
        out.append("  ".join(cells))
    return "\n".join(out)


PLOT_KINDS = ("ratio_vs_n", "class_vs_n", "bound_gap")


def emit_plotdata(records: list[TrialRecord], kind: str) -> str:
    """Tidy whitespace-separated numeric text, one row per applicable record."""
    if not records:
        raise ValueError("no records to emit")
    if kind == "ratio_vs_n":
        header = "n ratio"
        rows = [(r.n, r.ratio) for r in records if r.ratio is not None]
    elif kind == "class_vs_n":
        header = "n medium_frac bad_stat"
        rows = [
            (r.n, r.medium_len / r.n, r.bad_sum / (r.n * math.log(math.log(r.n))))
            for r in records
            if r.medium_len is not None and r.bad_sum is not None
        ]
    elif kind == "bound_gap":
        header = "n dyadic_over_exact blocked_over_exact"
        rows = [
            (r.n, r.v2_dyadic_upper / r.v2_exact, r.v2_blocked / r.v2_exact)
            for r in records
            if r.v2_exact and r.v2_dyadic_upper is not None and r.v2_blocked is not None
        ]
    else:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    lines = [header]
    for row in rows:
        lines.append(" ".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"
