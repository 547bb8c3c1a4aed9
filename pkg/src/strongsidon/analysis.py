"""Counting functions, growth exponents and the experiment pipelines behind the CLI."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .construction import (
    ConstructedSet,
    build_set,
    greedy_strong_bh,
    optimal_c,
    pruning_report,
)
from .errors import InsufficientData
from .params import StrongParams, as_fraction, jint
from .prime_tools import basis_primes, prime_partition
from .random_sets import (
    find_i0,
    interval_of,
    max_per_interval,
    monte_carlo_hits,
    random_exponent,
    sample_r_delta,
    transfer,
)
from .verification import (
    DEFAULT_MEM_BUDGET,
    check_strong_bh,
    classify_violation,
    infinite_upper_constant,
    upper_bound_checks,
)

MODES = ("construct", "greedy", "verify", "random-transfer", "partition", "analyze")

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


@dataclass
class CountingProfile:
    checkpoints: list[int]
    counts: list[int]
    fitted_exponent: Optional[float] = None
    window: Optional[tuple[int, int]] = None

    def rows(self):
        return list(zip(self.checkpoints, self.counts))


def geometric_checkpoints(n_max: int) -> list[int]:
    """``floor(2**(j/2))`` up to ``n_max``, deduplicated, with ``n_max`` appended."""
    out = []
    j = 0
    while True:
        n = math.floor(2 ** (j / 2))
        if n > n_max:
            break
        if not out or n != out[-1]:
            out.append(n)
        j += 1
    if not out or out[-1] != n_max:
        out.append(n_max)
    return out


def default_window(profile: CountingProfile) -> tuple[int, int]:
    """Drop the first decade above the first non-zero count."""
    nz = [n for n, c in zip(profile.checkpoints, profile.counts) if c >= 1]
    if not nz:
        raise InsufficientData("every count is zero")
    return 10 * nz[0], profile.checkpoints[-1]


def counting_function(
    elements: Sequence[int], checkpoints: Optional[Sequence[int]] = None
) -> CountingProfile:
    xs = sorted(int(x) for x in elements)
    if checkpoints is None:
        checkpoints = geometric_checkpoints(xs[-1] if xs else 1)
    cps = [int(n) for n in checkpoints]
    if any(b < a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be sorted ascending")
    counts = [bisect_right(xs, n) for n in cps]
    return CountingProfile(cps, counts)


def estimate_exponent(
    profile: CountingProfile, window: Optional[tuple[int, int]] = None
) -> float:
    """OLS slope of ``log S(n)`` against ``log n`` over the window (inclusive)."""
    if window is None:
        window = default_window(profile)
    lo, hi = window
    pts = [
        (n, c) for n, c in zip(profile.checkpoints, profile.counts) if lo <= n <= hi and c >= 1
    ]
    if len({n for n, _ in pts}) < 2:
        raise InsufficientData(f"fewer than two usable checkpoints in [{lo}, {hi}]")
    x = np.array([math.log(n) for n, _ in pts])
    y = np.array([math.log(c) for _, c in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    profile.fitted_exponent = slope
    profile.window = (lo, hi)
    return slope


def length_window(cset: ConstructedSet, n_lengths: int = 2) -> tuple[int, int]:
    """From the smallest element of the ``n_lengths`` longest lengths to the maximum."""
    lengths = sorted({d.length for d in cset.digits.values()})
    if not lengths:
        raise InsufficientData("the set carries no digit data")
    keep = set(lengths[-n_lengths:])
    vals = [cset.elements[p] for p, d in cset.digits.items() if d.length in keep]
    return min(vals), max(cset.elements.values())


@dataclass
class ExperimentConfig:
    mode: str
    params: StrongParams = field(default_factory=StrongParams)
    c: Union[float, str, None] = None
    k_max: Optional[int] = None
    n_max: Optional[int] = None
    delta: Optional[float] = None
    seed: int = 0
    basis: str = "smallest"
    f_log_base: str = "e"
    out: Path = Path("out")
    input: Optional[Path] = None
    mem_budget: int = DEFAULT_MEM_BUDGET
    mc_trials: int = 0
    i_max: int = 50
    explicit: set = field(default_factory=set)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        need = {
            "construct": ("k_max",),
            "greedy": ("n_max",),
            "verify": ("input",),
            "random-transfer": ("delta", "n_max"),
            "partition": ("k_max",),
            "analyze": ("input",),
        }[self.mode]
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"mode {self.mode} needs --{name.replace('_', '-')}")
        if self.mode in ("construct", "partition") and self.c is None:
            self.c = "optimal"
        self.out = Path(self.out)

    def resolved_c(self) -> float:
        if self.c == "optimal" or self.c is None:
            return optimal_c(float(self.params.alpha), self.params.h)
        return float(self.c)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            **self.params.to_json(),
            "c": self.c,
            "k_max": self.k_max,
            "n_max": self.n_max,
            "delta": self.delta,
            "seed": self.seed,
            "basis": self.basis,
            "f_log_base": self.f_log_base,
            "input": str(self.input) if self.input else None,
            "mem_budget": self.mem_budget,
            "mc_trials": self.mc_trials,
            "i_max": self.i_max,
        }


# ---- file formats -------------------------------------------------------


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def write_jsonl(path: Path, rows) -> None:
    with open(path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_set_file(path: Path) -> tuple[list[int], Optional[ConstructedSet]]:
    """Elements from a set JSON, a plain JSON list, or whitespace-separated text."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return sorted({int(tok) for tok in text.split()}), None
    if isinstance(data, dict):
        cset = ConstructedSet.from_json(data)
        return cset.values(), cset
    if isinstance(data, list):
        return sorted({int(x) for x in data}), None
    if isinstance(data, int):
        return [data], None
    raise ValueError(f"{path}: expected a JSON object or list")


# ---- pipelines ----------------------------------------------------------


def _bounds_summary(values, alpha, h) -> dict:
    top = max(values, default=1)
    checks = upper_bound_checks(values, alpha, h, geometric_checkpoints(max(top, 1)))
    return {
        "finite_upper_bound_ok": all(c.ok for c in checks if c.kind == "slice"),
        "counting_upper_bound_ok": all(c.ok for c in checks if c.kind == "count"),
        "infinite_upper_constant": infinite_upper_constant(alpha, h),
        "dyadic_slices": [
            {"i": int(math.log2(c.n)), "size": c.observed, "bound": c.bound}
            for c in checks
            if c.kind == "slice"
        ],
    }


def _profile_summary(values, window=None) -> tuple[CountingProfile, dict]:
    prof = counting_function(values)
    try:
        slope = estimate_exponent(prof, window)
    except InsufficientData:
        slope = None
    return prof, {"fitted_exponent": slope, "window": list(prof.window) if prof.window else None}


def _run_construct(cfg: ExperimentConfig, summary: dict) -> int:
    p = cfg.params
    c = cfg.resolved_c()
    seed = cfg.seed if cfg.basis != "smallest" else None
    basis = basis_primes(cfg.k_max, p.h, cfg.basis, seed)
    raw = build_set(c, p, basis, cfg.k_max, cfg.f_log_base)
    found = check_strong_bh(raw.values(), p, cfg.mem_budget)
    keys = raw.key_of_value()
    bad = {keys[max(v.left)] for v in found}
    rows = []
    n_inapplicable = n_failed = 0
    for v in found:
        diag = classify_violation(v, raw)
        r = v.to_json()
        r.update(
            ell=diag.ell,
            t_index=diag.t,
            check_i=diag.check_i,
            check_ii=diag.check_ii,
            check_iii=diag.check_iii,
            check_iv=diag.check_iv,
            applicable=diag.applicable,
        )
        rows.append(r)
        if not diag.applicable:
            n_inapplicable += 1
        elif not diag.ok:
            n_failed += 1
    pruned = raw.without(bad)
    after = check_strong_bh(pruned.values(), p, cfg.mem_budget)
    write_jsonl(cfg.out / "violations.jsonl", rows)
    write_json(cfg.out / "set.json", pruned.to_json())
    write_csv(
        cfg.out / "pruning.csv",
        ("k", "part_size", "bad_count", "fraction"),
        pruning_report(raw, bad),
    )
    values = pruned.values()
    prof, fit = _profile_summary(values, _safe_length_window(pruned))
    write_csv(cfg.out / "counting.csv", ("n", "count"), prof.rows())
    e_upper = (1 - float(p.alpha)) / p.h
    summary.update(
        c=c,
        optimal_c=optimal_c(float(p.alpha), p.h),
        basis=basis.to_json(),
        size_before=len(raw),
        size_after=len(pruned),
        skipped=[jint(x) for x in sorted(raw.skipped)],
        violations_before=len(found),
        violations_after=len(after),
        bad_primes=len(bad),
        classify_failures=n_failed,
        classify_inapplicable=n_inapplicable,
        upper_exponent=e_upper,
        **fit,
        **_bounds_summary(values, float(p.alpha), p.h),
    )
    if fit["fitted_exponent"] is not None:
        # informational: the o(1) terms are far from negligible at small k_max
        summary["exponent_below_upper"] = fit["fitted_exponent"] <= e_upper + 0.05
        summary["exponent_above_lower"] = fit["fitted_exponent"] >= summary["optimal_c"] - 0.10
    ok = not after and not n_failed and summary["finite_upper_bound_ok"]
    return EXIT_OK if ok else EXIT_VIOLATED


def _safe_length_window(cset):
    try:
        return length_window(cset)
    except InsufficientData:
        return None


def _run_greedy(cfg: ExperimentConfig, summary: dict) -> int:
    p = cfg.params
    s = greedy_strong_bh(p, cfg.n_max)
    values = s.values()
    found = check_strong_bh(values, p, cfg.mem_budget)
    write_json(cfg.out / "set.json", s.to_json())
    write_jsonl(cfg.out / "violations.jsonl", [v.to_json() for v in found])
    prof, fit = _profile_summary(values)
    write_csv(cfg.out / "counting.csv", ("n", "count"), prof.rows())
    summary.update(
        size=len(values),
        violations=len(found),
        optimal_c=optimal_c(float(p.alpha), p.h),
        upper_exponent=(1 - float(p.alpha)) / p.h,
        **fit,
        **_bounds_summary(values, float(p.alpha), p.h),
    )
    ok = not found and summary["finite_upper_bound_ok"] and summary["counting_upper_bound_ok"]
    return EXIT_OK if ok else EXIT_VIOLATED


def _params_with_file(cfg: ExperimentConfig, cset: Optional[ConstructedSet]) -> StrongParams:
    if cset is None:
        return cfg.params
    fp = cset.params
    p = cfg.params
    return StrongParams(
        p.h if "h" in cfg.explicit else fp.h,
        p.alpha if "alpha" in cfg.explicit else fp.alpha,
        p.gamma if "gamma" in cfg.explicit else fp.gamma,
    )


def _run_verify(cfg: ExperimentConfig, summary: dict) -> int:
    values, cset = read_set_file(cfg.input)
    p = _params_with_file(cfg, cset)
    found = check_strong_bh(values, p, cfg.mem_budget)
    rows = []
    for v in found:
        r = v.to_json()
        if cset is not None and cset.digits:
            diag = classify_violation(v, cset)
            r.update(ell=diag.ell, t_index=diag.t, applicable=diag.applicable)
        rows.append(r)
    write_jsonl(cfg.out / "violations.jsonl", rows)
    summary.update(**p.to_json(), size=len(values), violations=len(found))
    return EXIT_OK if not found else EXIT_VIOLATED


def _run_analyze(cfg: ExperimentConfig, summary: dict) -> int:
    values, cset = read_set_file(cfg.input)
    p = _params_with_file(cfg, cset)
    window = _safe_length_window(cset) if cset is not None and cset.digits else None
    prof, fit = _profile_summary(values, window)
    write_csv(cfg.out / "counting.csv", ("n", "count"), prof.rows())
    summary.update(
        **p.to_json(),
        size=len(values),
        optimal_c=optimal_c(float(p.alpha), p.h),
        upper_exponent=(1 - float(p.alpha)) / p.h,
        **fit,
        **_bounds_summary(values, float(p.alpha), p.h),
    )
    return EXIT_OK


def _run_partition(cfg: ExperimentConfig, summary: dict) -> int:
    c = cfg.resolved_c()
    part = prime_partition(c, cfg.k_max, cfg.f_log_base)
    write_csv(cfg.out / "partition.csv", ("k", "lower", "upper", "count"), part.rows())
    summary.update(
        c=c,
        f_log_base=cfg.f_log_base,
        parts={str(k): len(v) for k, v in sorted(part.parts.items())},
        int_bounds={str(k): [jint(a), jint(b)] for k, (a, b) in sorted(part.int_bounds.items())},
    )
    return EXIT_OK


def _run_transfer(cfg: ExperimentConfig, summary: dict) -> int:
    delta = float(cfg.delta)
    h = cfg.params.h
    alpha = cfg.params.alpha if "alpha" in cfg.explicit else float(1 - as_fraction(delta))
    gamma = cfg.params.gamma if "gamma" in cfg.explicit else 2 * h * 2 ** (1 + 1 / delta)
    p = StrongParams(h, alpha, gamma)
    strong = greedy_strong_bh(p, cfg.n_max)
    sample = sample_r_delta(delta, cfg.n_max, cfg.seed)
    out = transfer(strong, sample)
    plain = StrongParams(h, 0.0, 1.0)
    found = check_strong_bh(out, plain, cfg.mem_budget)
    members = set(sample.members.tolist())
    write_json(cfg.out / "sample.json", sample.to_json())
    write_json(
        cfg.out / "set.json",
        ConstructedSet(plain, "transfer", elements={v: v for v in out}).to_json(),
    )
    write_jsonl(cfg.out / "violations.jsonl", [v.to_json() for v in found])
    if cfg.mc_trials > 0:
        write_csv(
            cfg.out / "replications.csv",
            ("i", "exact_p", "empirical_p", "n_trials"),
            monte_carlo_hits(delta, cfg.i_max, cfg.mc_trials, cfg.seed),
        )
    prof, fit = _profile_summary(out)
    write_csv(cfg.out / "counting.csv", ("n", "count"), prof.rows())
    summary.update(
        **{"strong_" + k: v for k, v in p.to_json().items()},
        delta=delta,
        strong_size=len(strong),
        sample_size=int(len(sample.members)),
        transferred_size=len(out),
        i0=find_i0(delta, interval_of(cfg.n_max, delta)),
        max_per_interval=max_per_interval(strong.values(), delta),
        subset_of_sample=all(v in members for v in out),
        violations=len(found),
        random_exponent=random_exponent(delta, h),
        **fit,
    )
    ok = not found and summary["subset_of_sample"] and summary["max_per_interval"] <= 2
    return EXIT_OK if ok else EXIT_VIOLATED


_PIPELINES = {
    "construct": _run_construct,
    "greedy": _run_greedy,
    "verify": _run_verify,
    "random-transfer": _run_transfer,
    "partition": _run_partition,
    "analyze": _run_analyze,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run one pipeline, write its artifacts under ``cfg.out`` and return the exit code.

    Errors propagate; the CLI maps them to exit codes and ``error.json``.
    """
    os.makedirs(cfg.out, exist_ok=True)
    summary: dict = {"config": cfg.to_json()}
    code = _PIPELINES[cfg.mode](cfg, summary)
    summary["exit_code"] = code
    summary["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    write_json(cfg.out / "summary.json", summary)
    return code
