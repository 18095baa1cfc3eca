"""Monte-Carlo experiment harness and CLI.

Five experiments mirror the evaluation suite:

==========  ==========================  ==============================
figure id   sweep variable              fixed settings
==========  ==========================  ==============================
iters       user count 2K               P = 20 dBm; trajectory rows
users       user count 2K               P = 20 dBm
power       transmit power P (dBm)      2K = 8
runtime     user count 2K               P = 20 dBm; wall-clock column
epsilon     barrier accuracy epsilon    2K = 8, P = 20 dBm
==========  ==========================  ==============================

Every trial samples one scenario (seed = base seed XOR trial index) and
feeds the SAME scenario to all five schemes, so comparisons are paired.
CSV schema is fixed: ``scheme,sweep,mean_rate,std_rate,mean_iters,runtime_s``
with rates in bits/s/Hz (multiply by the configured bandwidth for bits/s).

Reruns with identical arguments produce byte-identical CSVs; the only
nondeterministic quantity, wall-clock time, is reported only by the
``runtime`` experiment (other experiments write 0 in that column) and
can be suppressed there with ``--no-timing``.

Environment overrides: any flag can also be set via ``NOMA_SIM_<NAME>``
(e.g. ``NOMA_SIM_TRIALS=50``); explicit flags win.
"""

import argparse
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import gale_shapley_pairing, random_pairing
from .errors import SolverError
from .optimizer import OptimizeParams, matched_pairs, optimize, sum_secrecy
from .pairing_lp import BarrierParams
from .power_alloc import calibrate_dual, epa_allocation
from .scenario import SystemConfig, load_config, sample_scenario, trial_config

FIGURES = ("iters", "users", "power", "runtime", "epsilon")
SCHEMES = ("proposed", "epa", "rp", "gs", "simplex")
CSV_HEADER = "scheme,sweep,mean_rate,std_rate,mean_iters,runtime_s"
ENV_PREFIX = "NOMA_SIM_"

# Substream constant for the random-pairing baseline (scenario uses 0).
_RP_STREAM = 1

DEFAULT_SWEEPS = {
    "iters": [6, 8, 10],
    "users": [4, 6, 8, 10, 12],
    "power": [10, 15, 20, 25, 30],
    "runtime": [4, 6, 8, 10, 12],
    "epsilon": [1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6, 1e8],
}


@dataclass
class ExperimentSpec:
    figure: str
    sweep: list
    trials: int
    base: SystemConfig
    out: str
    trace: bool = False
    timing: bool = True
    workers: int = 1
    eta: float = 1e-6
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ValueError(f"unknown experiment {self.figure!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sweep:
            raise ValueError("sweep must be nonempty")


@dataclass
class ResultRow:
    scheme: str
    sweep: float
    mean_rate: float
    std_rate: float
    mean_iters: float
    runtime_s: float

    def render(self) -> str:
        return (
            f"{self.scheme},{_fmt(self.sweep)},{self.mean_rate:.12g},"
            f"{self.std_rate:.12g},{self.mean_iters:.6g},{self.runtime_s:.6f}"
        )


def _fmt(value) -> str:
    if float(value).is_integer():
        return str(int(value))
    return f"{value:g}"


def _config_for_point(spec: ExperimentSpec, value):
    config = spec.base
    if spec.figure in ("iters", "users", "runtime"):
        users = int(value)
        if users % 2 or users < 2:
            raise ValueError(f"user-count sweep values must be even, got {value}")
        config = replace(config, num_pairs=users // 2)
    elif spec.figure == "power":
        config = replace(config, total_power_dbm=float(value))
    return config


def _barrier_epsilon(spec: ExperimentSpec, value) -> float:
    return float(value) if spec.figure == "epsilon" else spec.epsilon


@dataclass
class TrialResult:
    rates: dict = field(default_factory=dict)
    iters: dict = field(default_factory=dict)
    runtimes: dict = field(default_factory=dict)
    trajectory: list = field(default_factory=list)
    trace_rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def _timed(fn, timing):
    start = time.perf_counter() if timing else 0.0
    out = fn()
    elapsed = time.perf_counter() - start if timing else 0.0
    return out, elapsed


def run_trial(spec: ExperimentSpec, value, trial: int) -> TrialResult:
    """All five schemes on one shared scenario; failures are recorded, not raised."""
    config = _config_for_point(spec, value)
    scenario = sample_scenario(trial_config(config, trial))
    noise, budget = scenario.noise_power, scenario.budget
    barrier = BarrierParams(epsilon=_barrier_epsilon(spec, value),
                            collect_trace=spec.trace)
    result = TrialResult()

    def record(scheme, rate, iters, runtime):
        result.rates[scheme] = rate
        result.iters[scheme] = iters
        result.runtimes[scheme] = runtime

    proposed = None
    try:
        proposed, elapsed = _timed(
            lambda: optimize(scenario, OptimizeParams(eta=spec.eta, barrier=barrier)),
            spec.timing,
        )
        record("proposed", proposed.sum_secrecy, proposed.iterations, elapsed)
        result.trajectory = proposed.trajectory
        result.trace_rows = proposed.trace_rows
    except SolverError as exc:
        result.failures.append(("proposed", str(exc)))

    if proposed is not None:
        try:
            allocs = epa_allocation(
                matched_pairs(scenario, proposed.pairing), budget, noise
            )
            record("epa", sum_secrecy(proposed.pairing, allocs), 1, 0.0)
        except SolverError as exc:
            result.failures.append(("epa", str(exc)))
    else:
        result.failures.append(("epa", "proposed pairing unavailable"))

    try:
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([trial_config(config, trial).rng_seed, _RP_STREAM])
        ))
        def run_rp():
            pairing = random_pairing(scenario, rng)
            _, allocs = calibrate_dual(matched_pairs(scenario, pairing), budget, noise)
            return pairing, allocs
        (pairing, allocs), elapsed = _timed(run_rp, spec.timing)
        record("rp", sum_secrecy(pairing, allocs), 1, elapsed)
    except SolverError as exc:
        result.failures.append(("rp", str(exc)))

    try:
        def run_gs():
            pairing = gale_shapley_pairing(scenario)
            _, allocs = calibrate_dual(matched_pairs(scenario, pairing), budget, noise)
            return pairing, allocs
        (pairing, allocs), elapsed = _timed(run_gs, spec.timing)
        record("gs", sum_secrecy(pairing, allocs), 1, elapsed)
    except SolverError as exc:
        result.failures.append(("gs", str(exc)))

    try:
        sol, elapsed = _timed(
            lambda: optimize(scenario, OptimizeParams(
                eta=spec.eta, lp_solver="simplex", barrier=barrier)),
            spec.timing,
        )
        record("simplex", sol.sum_secrecy, sol.iterations, elapsed)
    except SolverError as exc:
        result.failures.append(("simplex", str(exc)))

    return result


def _aggregate(values):
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def _rows_for_point(spec, value, trials):
    rows = []
    report_time = spec.figure == "runtime" and spec.timing
    for scheme in SCHEMES:
        rates = [t.rates[scheme] for t in trials if scheme in t.rates]
        if not rates:
            rows.append(ResultRow(scheme, value, float("nan"), 0.0, 0.0, 0.0))
            continue
        iters = [t.iters[scheme] for t in trials if scheme in t.iters]
        mean, std = _aggregate(rates)
        runtime = (
            statistics.median(t.runtimes[scheme] for t in trials if scheme in t.runtimes)
            if report_time else 0.0
        )
        rows.append(ResultRow(scheme, value, mean, std, statistics.fmean(iters), runtime))
    return rows


def _trajectory_rows(value, trials):
    """Per-iteration mean trajectory rows; shorter runs repeat their last value."""
    rows = []
    series = [t.trajectory for t in trials if t.trajectory]
    if not series:
        return rows
    depth = max(len(s) for s in series)
    iters = [len(s) - 1 for s in series]
    for i in range(depth):
        level = [s[min(i, len(s) - 1)] for s in series]
        mean, std = _aggregate(level)
        rows.append(ResultRow(
            f"proposed_2K{int(value)}", i + 1, mean, std, statistics.fmean(iters), 0.0
        ))
    return rows


def run_experiment(spec: ExperimentSpec):
    """Execute the sweep and return (rows, failures, total_runs, trace_rows)."""
    if spec.figure == "runtime" and spec.timing:
        # touch the LU kernels so JIT compilation stays out of the medians
        from .dense_linalg import lu_factor, lu_solve

        lu_solve(lu_factor(np.eye(3)), np.ones(3))
    all_rows = []
    failures = []
    trace_rows = []
    total_runs = 0
    for value in spec.sweep:
        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                trials = list(pool.map(
                    lambda i: run_trial(spec, value, i), range(spec.trials)
                ))
        else:
            trials = [run_trial(spec, value, i) for i in range(spec.trials)]
        total_runs += spec.trials * len(SCHEMES)
        for t in trials:
            failures.extend((value, scheme, msg) for scheme, msg in t.failures)
            trace_rows.extend(t.trace_rows)
        if spec.figure == "iters":
            all_rows.extend(_trajectory_rows(value, trials))
        else:
            all_rows.extend(_rows_for_point(spec, value, trials))
    return all_rows, failures, total_runs, trace_rows


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.render() + "\n")


def _env_default(name, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper(), fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-sim",
        description="Monte-Carlo harness for the pairing/power-allocation simulator",
        epilog=f"Every flag has an env override {ENV_PREFIX}<NAME>; flags win.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment sweep and write a CSV")
    run.add_argument("--experiment", choices=FIGURES,
                     default=_env_default("experiment"), required=_env_default("experiment") is None)
    run.add_argument("--config", default=_env_default("config"),
                     help="flat key=value SystemConfig file (defaults otherwise)")
    run.add_argument("--seed", type=int, default=_env_default("seed"),
                     help="base RNG seed (overrides the config file)")
    run.add_argument("--trials", type=int,
                     default=int(_env_default("trials", 200)))
    run.add_argument("--out", default=_env_default("out"), required=_env_default("out") is None)
    run.add_argument("--sweep", default=_env_default("sweep"),
                     help="comma-separated sweep override")
    run.add_argument("--eta", type=float, default=float(_env_default("eta", 1e-6)))
    run.add_argument("--epsilon", type=float,
                     default=float(_env_default("epsilon", 1e-4)),
                     help="barrier accuracy for non-epsilon experiments")
    run.add_argument("--workers", type=int, default=int(_env_default("workers", 1)))
    run.add_argument("--trace", action="store_true",
                     default=_env_default("trace", "") not in ("", "0", "false"),
                     help="write newton iteration traces to <out>.trace.csv")
    run.add_argument("--no-timing", action="store_true",
                     default=_env_default("no_timing", "") not in ("", "0", "false"),
                     help="report 0 in runtime_s even for the runtime experiment")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args.config) if args.config else SystemConfig()
    if args.seed is not None:
        config = replace(config, rng_seed=int(args.seed))
    sweep = (
        [float(v) for v in str(args.sweep).split(",")]
        if args.sweep else list(DEFAULT_SWEEPS[args.experiment])
    )
    spec = ExperimentSpec(
        figure=args.experiment,
        sweep=sweep,
        trials=args.trials,
        base=config,
        out=args.out,
        trace=args.trace,
        timing=not args.no_timing,
        workers=args.workers,
        eta=args.eta,
        epsilon=args.epsilon,
    )
    rows, failures, total_runs, trace_rows = run_experiment(spec)
    write_csv(rows, spec.out)
    if spec.trace:
        with open(spec.out + ".trace.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,j_norm,step,min_slack\n")
            for t, j_norm, step, slack in trace_rows:
                fh.write(f"{t:g},{j_norm:.12g},{step:g},{slack:.12g}\n")
    print(f"wrote {len(rows)} rows to {spec.out} "
          f"(rates in bits/s/Hz; bandwidth {config.bandwidth:g} Hz)")
    if failures:
        for value, scheme, msg in failures:
            print(f"warning: sweep={value} scheme={scheme} failed: {msg}",
                  file=sys.stderr)
        if len(failures) > 0.01 * total_runs:
            print(f"error: {len(failures)}/{total_runs} runs failed", file=sys.stderr)
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
