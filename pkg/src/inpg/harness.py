"""Experiment orchestration: run files, aggregation, audits, and figures.

One learning run produces three files in the output directory:

  run_<method>_tau<tau>_seed<seed>.csv         iteration log, header
      iter,phi_tau,ne_gap,qre_gap,jeffrey_step,avg_ne_gap,avg_qre_gap
      (floats rendered with 17 significant digits; undefined cells are "nan")
  run_<method>_tau<tau>_seed<seed>.meta.json   run-level scalars used by audits
  run_<method>_tau<tau>_seed<seed>.policy.csv  final policy, one row per agent

A multi-seed experiment additionally writes agg_<method>_tau<tau>.csv with the
same columns averaged across seeds at matched iterations. Everything written
here is a pure function of the inputs, so repeated invocations are
byte-identical.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import svg
from .dynamics import (
    IterateLog,
    MonotonicityError,
    RunConfig,
    default_learning_rate,
    initial_distance_bound_sides,
    jeffrey_sum_sides,
    predicted_iterations,
    run,
    theorem_average_gap_sides,
)
from .game import PotentialGame, load_game, make_general_potential, make_identical_interest
from .policy import policy_to_csv
from .rng import run_seed

CSV_HEADER = "iter,phi_tau,ne_gap,qre_gap,jeffrey_step,avg_ne_gap,avg_qre_gap"
CHECK_NAMES = ("monotone", "theorem1", "sandwich")
SANDWICH_TOL = 1e-10

_META_FIELDS = (
    "method", "tau", "eta", "seed", "num_agents", "num_actions", "phi_max",
    "game_kind", "game_seed", "num_steps", "phi_tau_initial", "phi_tau_final",
    "sum_ne_gap", "sum_qre_gap", "min_ne_gap", "min_qre_gap", "sum_jeffrey",
    "initial_br_log_distance", "min_monotonicity_slack", "max_sandwich_slack",
    "stopped_early",
)


def _f17(x: float) -> str:
    return format(x, ".17g")


def run_basename(method: str, tau: float, seed: int) -> str:
    return f"run_{method}_tau{tau:g}_seed{seed}"


def agg_basename(method: str, tau: float) -> str:
    return f"agg_{method}_tau{tau:g}"


def write_run_csv(log: IterateLog, path) -> None:
    lines = [CSV_HEADER]
    for k in range(len(log.iters)):
        lines.append(
            f"{int(log.iters[k])},{_f17(log.phi_tau[k])},{_f17(log.ne_gap[k])},"
            f"{_f17(log.qre_gap[k])},{_f17(log.jeffrey_step[k])},"
            f"{_f17(log.avg_ne_gap[k])},{_f17(log.avg_qre_gap[k])}"
        )
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_csv_columns(path) -> dict[str, np.ndarray]:
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = [line.split(",") for line in f.read().splitlines() if line]
    names = header.split(",")
    data = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    if data.size == 0:
        data = data.reshape(0, len(names))
    return {name: data[:, j] for j, name in enumerate(names)}


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, np.integer):
        return int(v)
    return v


def meta_from_log(log: IterateLog) -> dict:
    return {name: _jsonable(getattr(log, name)) for name in _META_FIELDS}


def write_run_meta(log: IterateLog, path) -> None:
    with open(path, "w") as f:
        json.dump(meta_from_log(log), f, sort_keys=True, indent=1)
        f.write("\n")


@dataclass
class RunSummary:
    """Run-level scalars, reconstructable from a meta file; duck-types IterateLog for audits."""

    method: str
    tau: float
    eta: float
    seed: int
    num_agents: int
    num_actions: int
    phi_max: float
    game_kind: str
    game_seed: int
    num_steps: int
    phi_tau_initial: float
    phi_tau_final: float
    sum_ne_gap: float
    sum_qre_gap: float
    min_ne_gap: float
    min_qre_gap: float
    sum_jeffrey: float
    initial_br_log_distance: float
    min_monotonicity_slack: float
    max_sandwich_slack: float
    stopped_early: bool


def read_run_meta(path) -> RunSummary:
    with open(path) as f:
        raw = json.load(f)
    nan = float("nan")
    kwargs = {name: (nan if raw.get(name) is None else raw[name]) for name in _META_FIELDS}
    return RunSummary(**kwargs)


# ---------------------------------------------------------------------------
# Theorem-level checks
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    applicable: bool
    passed: bool
    detail: str

    @property
    def ok(self) -> bool:
        return self.passed or not self.applicable


def _eta_compliant(summary) -> bool:
    bound = default_learning_rate(summary.num_agents, summary.phi_max, summary.tau)
    return summary.eta <= bound * (1.0 + 1e-12)


def check_monotone(summary, tol: float = 1e-9) -> CheckResult:
    if summary.method != "npg" or not _eta_compliant(summary):
        return CheckResult("monotone", False, False,
                           "monotone: not applicable (needs npg with compliant eta)")
    slack = summary.min_monotonicity_slack
    if summary.num_steps == 0:
        return CheckResult("monotone", True, True, "monotone: no steps taken, trivially pass")
    if math.isnan(slack):
        return CheckResult("monotone", False, False,
                           "monotone: not tracked during this run (monotonicity_check was off)")
    passed = bool(slack >= -tol)
    return CheckResult("monotone", True, passed,
                       f"monotone: min per-step slack {slack:.3e} (tol {tol:g}): "
                       f"{'pass' if passed else 'FAIL'}")


def check_theorem1(summary) -> CheckResult:
    sides = theorem_average_gap_sides(summary)
    if sides is None or not _eta_compliant(summary):
        return CheckResult("theorem1", False, False,
                           "theorem1: skipped (needs a completed npg run with compliant eta)")
    lhs, rhs = sides
    passed = bool(lhs <= rhs * (1.0 + 1e-12) + 1e-15)
    return CheckResult("theorem1", True, passed,
                       f"theorem1: avg qre_gap {lhs:.6e} <= bound {rhs:.6e}: "
                       f"{'pass' if passed else 'FAIL'}")


def check_sandwich(summary, tol: float = SANDWICH_TOL) -> CheckResult:
    if summary.tau <= 0:
        return CheckResult("sandwich", False, False,
                           "sandwich: not applicable (needs tau > 0)")
    slack = summary.max_sandwich_slack
    passed = bool(slack <= tol)
    return CheckResult("sandwich", True, passed,
                       f"sandwich: max (ne_gap - qre_gap - tau*log|A|) = {slack:.3e} "
                       f"(tol {tol:g}): {'pass' if passed else 'FAIL'}")


def evaluate_checks(summary, which: set[str]) -> list[CheckResult]:
    out = []
    if "monotone" in which:
        out.append(check_monotone(summary))
    if "theorem1" in which:
        out.append(check_theorem1(summary))
    if "sandwich" in which:
        out.append(check_sandwich(summary))
    return out


def audit_lines(summary) -> tuple[list[str], bool]:
    """Report for one completed run; returns (lines, all enabled checks passed)."""
    head = (f"{run_basename(summary.method, summary.tau, summary.seed)}: "
            f"eta={summary.eta:g} T={summary.num_steps}")
    lines = [head]
    if summary.method == "pg_direct":
        lines.append(f"  final avg ne_gap {summary.sum_ne_gap / max(summary.num_steps, 1):.6e}; "
                     "regularized checks skipped (unregularized baseline)")
        return lines, True
    results = evaluate_checks(summary, set(CHECK_NAMES))
    ok = True
    if summary.tau > 0 and summary.num_steps:
        avg = summary.sum_qre_gap / summary.num_steps
        lines.append(f"  measured avg qre_gap (iterates 1..T): {avg:.6e}; "
                     f"best single iterate: {summary.min_qre_gap:.6e}")
        sides = theorem_average_gap_sides(summary)
        if sides is not None:
            lines.append(f"  guaranteed upper bound on that average: {sides[1]:.6e}")
        if avg > 0:
            lines.append(
                f"  iteration-count scale to reach eps = this average: "
                f"{predicted_iterations(summary, avg):.4g}"
            )
        d0, bound = initial_distance_bound_sides(summary)
        lines.append(
            f"  initial best-response log-distance {d0:.6g} <= 2/tau = {bound:.6g}: "
            f"{'pass' if d0 <= bound else 'FAIL'}"
        )
        ok &= d0 <= bound
    js = jeffrey_sum_sides(summary)
    if js is not None and _eta_compliant(summary) and summary.method == "npg":
        lines.append(f"  total step movement sum_t J = {js[0]:.6e} <= 2*eta*dPhi = {js[1]:.6e}: "
                     f"{'pass' if js[0] <= js[1] * (1 + 1e-12) + 1e-15 else 'FAIL'}")
        ok &= js[0] <= js[1] * (1 + 1e-12) + 1e-15
    for res in results:
        lines.append("  " + res.detail)
        ok &= res.ok
    return lines, bool(ok)


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameSpec:
    """Where a run's game comes from: a generator call or a file."""

    source: str  # "identical" | "general" | "file"
    num_agents: int = 0
    num_actions: int = 0
    seed: int = 0
    path: str = ""

    def build(self) -> PotentialGame:
        if self.source == "identical":
            return make_identical_interest(self.num_agents, self.num_actions, self.seed)
        if self.source == "general":
            return make_general_potential(self.num_agents, self.num_actions, self.seed)
        return load_game(self.path)


def _execute_one(task: tuple[GameSpec, RunConfig, str]) -> tuple[str, dict | None, str | None]:
    """Worker: run one config, write its CSV, meta, and final policy; returns (basename, meta, error)."""
    spec, config, out_dir = task
    base = run_basename(config.method, config.tau, config.seed)
    game = spec.build()
    try:
        log = run(game, config)
    except MonotonicityError as exc:
        return base, None, str(exc)
    write_run_csv(log, os.path.join(out_dir, base + ".csv"))
    write_run_meta(log, os.path.join(out_dir, base + ".meta.json"))
    policy_to_csv(log.final_policy, os.path.join(out_dir, base + ".policy.csv"))
    return base, meta_from_log(log), None


def execute_runs(
    tasks: list[tuple[GameSpec, RunConfig, str]], jobs: int = 1
) -> list[tuple[str, dict | None, str | None]]:
    """Run tasks (optionally in parallel); output files are per-task, order-independent."""
    if jobs <= 1 or len(tasks) <= 1:
        return [_execute_one(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_execute_one, tasks))


def aggregate_csvs(csv_paths: list[str], out_path: str) -> None:
    """Average matched-iteration columns across runs of one variant."""
    columns = [read_csv_columns(p) for p in sorted(csv_paths)]
    iters = columns[0]["iter"]
    for cols in columns[1:]:
        if len(cols["iter"]) != len(iters) or np.any(cols["iter"] != iters):
            raise ValueError("aggregate requires identical iteration grids across seeds")
    names = CSV_HEADER.split(",")[1:]
    means = {name: np.mean([cols[name] for cols in columns], axis=0) for name in names}
    lines = [CSV_HEADER]
    for k in range(len(iters)):
        lines.append(
            f"{int(iters[k])}," + ",".join(_f17(means[name][k]) for name in names)
        )
    with open(out_path, "w") as f:
        f.write("\n".join(lines) + "\n")


def run_experiment(
    out_dir: str,
    game_specs: list[GameSpec],
    variants: list[RunConfig],
    jobs: int = 1,
) -> list[tuple[str, dict | None, str | None]]:
    """All (variant x game) runs, then one aggregate CSV per variant."""
    os.makedirs(out_dir, exist_ok=True)
    tasks = []
    for variant in variants:
        for spec in game_specs:
            tasks.append((spec, replace(variant, seed=spec.seed), out_dir))
    results = execute_runs(tasks, jobs=jobs)
    failures = {base for base, _, err in results if err is not None}
    for variant in variants:
        paths = []
        for spec in game_specs:
            base = run_basename(variant.method, variant.tau, spec.seed)
            if base not in failures:
                paths.append(os.path.join(out_dir, base + ".csv"))
        if paths:
            aggregate_csvs(paths, os.path.join(out_dir, agg_basename(variant.method, variant.tau) + ".csv"))
    return results


def seeded_game_specs(kind: str, agents: int, actions: int, base_seed: int, runs: int) -> list[GameSpec]:
    return [
        GameSpec(source=kind, num_agents=agents, num_actions=actions,
                 seed=run_seed(base_seed, k))
        for k in range(runs)
    ]


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

FIGURES = (
    ("fig_potential.svg", "phi_tau", "regularized potential", False),
    ("fig_ne_gap.svg", "ne_gap", "NE-gap", True),
    ("fig_qre_gap.svg", "qre_gap", "QRE-gap", True),
)


def _series_label(filename: str) -> str:
    stem = os.path.basename(filename)
    stem = stem.removesuffix(".csv").removeprefix("agg_").removeprefix("run_")
    method, _, rest = stem.partition("_tau")
    tau = rest.split("_seed")[0]
    return f"{method} tau={tau}" if float(tau) > 0 else method


def plot_directory(out_dir: str) -> list[str]:
    """Render the three standard figures from the aggregate (or per-run) CSVs in out_dir."""
    if not os.path.isdir(out_dir):
        raise ValueError(f"no run or aggregate CSVs found: {out_dir} is not a directory")
    files = sorted(
        f for f in os.listdir(out_dir) if f.startswith("agg_") and f.endswith(".csv")
    )
    if not files:
        files = sorted(
            f for f in os.listdir(out_dir)
            if f.startswith("run_") and f.endswith(".csv") and not f.endswith(".policy.csv")
        )
    if not files:
        raise ValueError(f"no run or aggregate CSVs found in {out_dir}")
    loaded = [(name, read_csv_columns(os.path.join(out_dir, name))) for name in files]
    written = []
    for fig_name, column, ylabel, ylog in FIGURES:
        series = []
        for name, cols in loaded:
            y = cols[column]
            keep = np.isfinite(y)
            if ylog:
                keep &= y > 0
            if not np.any(keep):
                continue  # e.g. qre_gap of an unregularized method is all-nan
            series.append((_series_label(name), cols["iter"], y))
        chart = svg.line_chart(series, title=f"{ylabel} vs iteration",
                               xlabel="iteration", ylabel=ylabel, ylog=ylog)
        path = os.path.join(out_dir, fig_name)
        with open(path, "w") as f:
            f.write(chart)
        written.append(path)
    return written


def audit_directory(out_dir: str) -> tuple[list[str], bool]:
    """Audit every run meta file in a directory; returns (report lines, all passed)."""
    if not os.path.isdir(out_dir):
        raise ValueError(f"no run meta files found: {out_dir} is not a directory")
    metas = sorted(f for f in os.listdir(out_dir) if f.endswith(".meta.json"))
    if not metas:
        raise ValueError(f"no run meta files found in {out_dir}")
    lines: list[str] = []
    all_ok = True
    for name in metas:
        summary = read_run_meta(os.path.join(out_dir, name))
        run_lines, ok = audit_lines(summary)
        lines.extend(run_lines)
        all_ok &= ok
    lines.append("audit: " + ("all checks passed" if all_ok else "SOME CHECKS FAILED"))
    return lines, bool(all_ok)
