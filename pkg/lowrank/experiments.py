"""
Monte Carlo experiment runner and its CSV outputs.

An experiment runs every method on every (rank, trial) instance. Instances
are generated from per-(rank, trial) sub-seeds, so adding or removing methods
never changes the matrices the other methods see. Rows come back ordered by
(method, rank, trial) whatever order the workers finish in.
"""
import csv
import enum
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from .baselines import column_sampling_l1, svd_baseline
from .exceptions import ArgumentError, LowRankError
from .generators import derive_seed, gen_quantized, gen_sign, gen_uniform
from .matrix_market import MAX_DENSE_CELLS, load_matrix_market
from .solvers import PracticalParams, TheoryParams, solve_l1, solve_linf

logger = logging.getLogger(__name__)

CSV_VERSION = '# lowrank-experiment-rows v1'
CSV_FIELDS = ('method', 'rank', 'trial', 'lp_error', 'wall_time_seconds', 'iterations_run', 'seed', 'status', 'error')
SUMMARY_VERSION = '# lowrank-experiment-summary v1'
SUMMARY_FIELDS = (
    'method', 'rank', 'count', 'failures',
    'error_min', 'error_mean', 'error_median',
    'time_min', 'time_mean', 'time_median',
)


class Method(str, enum.Enum):
    L1 = 'l1'
    LINF = 'linf'
    SVD = 'svd'
    COLSAMPLE = 'colsample'


# methods run in this order on each instance; l1 goes first so its time can be matched
RUN_ORDER = {method: index for index, method in enumerate(Method)}


class InstanceKind(str, enum.Enum):
    UNIFORM = 'uniform'
    SIGN = 'sign'
    QUANTIZED = 'quantized'
    FILE = 'file'


def parse_norm(value):
    """1, 'l1', 'inf', 'linf' or math.inf to 1 or math.inf."""
    text = str(value).lower()
    if text in ('1', '1.0', 'l1'):
        return 1
    if text in ('inf', 'linf', 'infinity'):
        return math.inf
    raise ArgumentError(f"norm must be 1 or inf, got {value!r}")


def norm_label(p):
    return 'inf' if p == math.inf else '1'


@dataclass(frozen=True)
class InstanceSource:
    kind: InstanceKind
    m: Optional[int] = None
    n: Optional[int] = None
    r_true: Optional[int] = None
    path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', InstanceKind(self.kind))
        if self.kind is InstanceKind.FILE:
            if not self.path:
                raise ArgumentError("a file instance needs a path")
            return
        if not (self.m and self.n and self.m >= 1 and self.n >= 1):
            raise ArgumentError(f"{self.kind.value} instances need positive m and n")
        if self.kind is InstanceKind.QUANTIZED and not (self.r_true and 1 <= self.r_true <= min(self.m, self.n)):
            raise ArgumentError(f"quantized instances need r_true in [1, {min(self.m, self.n)}]")

    def build(self, seed):
        if self.kind is InstanceKind.UNIFORM:
            return gen_uniform(self.m, self.n, seed)
        if self.kind is InstanceKind.SIGN:
            return gen_sign(self.m, self.n, seed)
        if self.kind is InstanceKind.QUANTIZED:
            return gen_quantized(self.m, self.n, self.r_true, seed).matrix
        raise ArgumentError("file instances are loaded, not generated")


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One experiment: `trials` instances per rank, every method on each.

    `norm` is the norm the SVD baseline is scored in. With `time_matched`, the
    column-sampling baseline keeps drawing trials until it has used at least
    the l1 solver's wall time on the same instance.
    """
    source: InstanceSource
    ranks: tuple
    trials: int = 10
    methods: tuple = (Method.L1, Method.SVD)
    mode: Union[TheoryParams, PracticalParams] = field(default_factory=PracticalParams)
    seed: int = 0
    norm: float = 1
    workers: int = 1
    time_matched: bool = False
    colsample_trials: int = 10
    max_cells: int = MAX_DENSE_CELLS

    def __post_init__(self):
        object.__setattr__(self, 'ranks', tuple(int(rank) for rank in self.ranks))
        methods = sorted({Method(method) for method in self.methods}, key=RUN_ORDER.get)
        object.__setattr__(self, 'methods', tuple(methods))
        object.__setattr__(self, 'norm', parse_norm(self.norm))
        if not self.ranks or min(self.ranks) < 1:
            raise ArgumentError("ranks must be a non-empty list of positive integers")
        if self.source.kind is not InstanceKind.FILE and max(self.ranks) > min(self.source.m, self.source.n):
            raise ArgumentError(f"every rank must be at most min(m, n) = {min(self.source.m, self.source.n)}")
        if self.trials < 1:
            raise ArgumentError(f"trials must be at least 1, got {self.trials}")
        if not self.methods:
            raise ArgumentError("at least one method is required")
        if not 0 <= self.seed < 2 ** 64:
            raise ArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ArgumentError(f"workers must be at least 1, got {self.workers}")
        if self.colsample_trials < 1:
            raise ArgumentError(f"colsample_trials must be at least 1, got {self.colsample_trials}")
        if self.time_matched and not {Method.L1, Method.COLSAMPLE} <= set(self.methods):
            raise ArgumentError("time-matched runs need both the l1 and colsample methods")

    def as_dict(self):
        """JSON-ready description, as stored with a run."""
        return {
            'source': {key: value for key, value in asdict(self.source).items() if value is not None}
            | {'kind': self.source.kind.value},
            'ranks': list(self.ranks),
            'trials': self.trials,
            'methods': [method.value for method in self.methods],
            'mode': {'theory' if isinstance(self.mode, TheoryParams) else 'practical': asdict(self.mode)},
            'seed': self.seed,
            'norm': norm_label(self.norm),
            'workers': self.workers,
            'time_matched': self.time_matched,
            'colsample_trials': self.colsample_trials,
        }


@dataclass(frozen=True)
class ExperimentRow:
    method: Method
    rank: int
    trial: int
    lp_error: Optional[float]
    wall_time_seconds: float
    iterations_run: int
    seed: int
    status: str = 'ok'
    error: str = ''

    @property
    def ok(self):
        return self.status == 'ok'


@dataclass(frozen=True)
class SummaryRow:
    method: Method
    rank: int
    count: int
    failures: int
    error_min: Optional[float]
    error_mean: Optional[float]
    error_median: Optional[float]
    time_min: Optional[float]
    time_mean: Optional[float]
    time_median: Optional[float]


def _run_method(method, spec, M, rank, seed, l1_time):
    """Returns (lp_error, iterations_run, wall_time)."""
    started = time.perf_counter()
    if method is Method.L1:
        report = solve_l1(M, rank, spec.mode, seed=seed)
        return report.final_error, report.iterations_run, time.perf_counter() - started
    if method is Method.LINF:
        report = solve_linf(M, rank, spec.mode, seed=seed)
        return report.final_error, report.iterations_run, time.perf_counter() - started
    if method is Method.SVD:
        result = svd_baseline(M, rank, spec.norm)
        return result.lp_error, 0, time.perf_counter() - started
    budget = l1_time if spec.time_matched else None
    result = column_sampling_l1(M, rank, trials=spec.colsample_trials, seed=seed, time_budget=budget)
    return result.lp_error, result.trials_run, time.perf_counter() - started


def _run_task(spec, rank, trial, matrix=None):
    """Every method on the (rank, trial) instance. Top level so worker processes can pickle it."""
    instance_seed = derive_seed(spec.seed, rank, trial)
    M = matrix if matrix is not None else spec.source.build(instance_seed)
    rows = []
    l1_time = None
    for method in spec.methods:
        method_seed = derive_seed(spec.seed, rank, trial, method.value)
        try:
            error, iterations, wall_time = _run_method(method, spec, M, rank, method_seed, l1_time)
        except (LowRankError, np.linalg.LinAlgError, FloatingPointError) as exc:
            logger.exception("%s failed on rank %d trial %d", method.value, rank, trial)
            rows.append(ExperimentRow(method, rank, trial, None, 0.0, 0, instance_seed, 'error', str(exc)))
            continue
        if method is Method.L1:
            l1_time = wall_time
        rows.append(ExperimentRow(method, rank, trial, error, wall_time, iterations, instance_seed))
    return rows


def run_experiment(spec):
    """
    Run `spec` and return its rows ordered by (method, rank, trial).
    Method failures become error rows; the run continues.
    """
    matrix = None
    if spec.source.kind is InstanceKind.FILE:
        matrix = load_matrix_market(spec.source.path, max_cells=spec.max_cells)
        m, n = matrix.shape
        if max(spec.ranks) > min(m, n):
            raise ArgumentError(f"every rank must be at most min(m, n) = {min(m, n)} for {spec.source.path}")

    tasks = [(rank, trial) for rank in spec.ranks for trial in range(spec.trials)]
    logger.info(
        "experiment: %s, ranks %s, %d trials, methods %s, %d worker(s)",
        spec.source.kind.value, list(spec.ranks), spec.trials,
        [method.value for method in spec.methods], spec.workers,
    )
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_run_task, spec, rank, trial, matrix) for rank, trial in tasks]
            results = [future.result() for future in futures]
    else:
        results = [_run_task(spec, rank, trial, matrix) for rank, trial in tasks]

    rows = [row for result in results for row in result]
    rows.sort(key=lambda row: (Method(row.method).value, row.rank, row.trial))
    return rows


def _stats(values):
    if not values:
        return None, None, None
    return min(values), statistics.mean(values), statistics.median(values)


def summarize(rows):
    """[min, mean, median] of error and wall time per (method, rank), over successful rows."""
    groups = {}
    for row in rows:
        groups.setdefault((Method(row.method), row.rank), []).append(row)
    summary = []
    for (method, rank), group in sorted(groups.items(), key=lambda item: (item[0][0].value, item[0][1])):
        ok = [row for row in group if row.ok]
        error_stats = _stats([row.lp_error for row in ok])
        time_stats = _stats([row.wall_time_seconds for row in ok])
        summary.append(SummaryRow(method, rank, len(group), len(group) - len(ok), *error_stats, *time_stats))
    return summary


def _number(value, spec='%.6e'):
    return '' if value is None else spec % value


def _require_rows(rows):
    if not rows:
        raise ArgumentError("no rows to write")


def emit_csv(rows, path, include_timing=True):
    """
    Per-trial rows. Wall time is the only run-dependent column; without it
    repeated runs of one spec write identical bytes.
    """
    _require_rows(rows)
    fields = [name for name in CSV_FIELDS if include_timing or name != 'wall_time_seconds']
    with open(path, 'w', newline='') as handle:
        handle.write(CSV_VERSION + '\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(fields)
        for row in rows:
            values = {
                'method': Method(row.method).value,
                'rank': row.rank,
                'trial': row.trial,
                'lp_error': _number(row.lp_error),
                'wall_time_seconds': _number(row.wall_time_seconds, '%.6f'),
                'iterations_run': row.iterations_run,
                'seed': row.seed,
                'status': row.status,
                'error': row.error,
            }
            writer.writerow([values[name] for name in fields])


def emit_summary(rows, path):
    _require_rows(rows)
    with open(path, 'w', newline='') as handle:
        handle.write(SUMMARY_VERSION + '\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(SUMMARY_FIELDS)
        for entry in summarize(rows):
            writer.writerow([
                entry.method.value, entry.rank, entry.count, entry.failures,
                _number(entry.error_min), _number(entry.error_mean), _number(entry.error_median),
                _number(entry.time_min, '%.6f'), _number(entry.time_mean, '%.6f'), _number(entry.time_median, '%.6f'),
            ])


def plot_series(rows):
    """(methods, [(rank, {method: median error})]) for the plot-data table."""
    summary = summarize(rows)
    methods = sorted({entry.method for entry in summary}, key=lambda method: method.value)
    by_rank = {}
    for entry in summary:
        by_rank.setdefault(entry.rank, {})[entry.method] = entry.error_median
    return methods, sorted(by_rank.items())


def emit_plotdata(rows, path):
    """One line per rank, one median-error column per method."""
    _require_rows(rows)
    methods, series = plot_series(rows)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['rank'] + [method.value for method in methods])
        for rank, medians in series:
            writer.writerow([rank] + [_number(medians.get(method)) for method in methods])
