"""
Monte Carlo comparison of the solvers and baselines.

    python manage.py bench --experiment uniform --m 20 --n 30 --ranks 1-5 \
        --trials 10 --methods l1,svd --out rows.csv --summary-out summary.csv
"""
from django.conf import settings
from django.core.management.base import CommandError

from lowrank.experiments import (
    InstanceKind,
    Method,
    emit_csv,
    emit_plotdata,
    emit_summary,
    run_experiment,
    summarize,
)
from lowrank.models import ExperimentRun
from lowrank.serializers import ExperimentSpecSerializer

from ._base import ExitCode, LowRankCommand, add_mode_arguments, mode_data, split_list


def parse_ranks(values):
    """'1-3,5' style ranges to [1, 2, 3, 5]."""
    ranks = []
    for item in split_list(values):
        low, _, high = item.partition('-')
        try:
            ranks.extend(range(int(low), int(high or low) + 1))
        except ValueError:
            raise CommandError(f"bad rank '{item}'", returncode=ExitCode.USAGE) from None
    return ranks


class Command(LowRankCommand):
    help = 'Run a Monte Carlo experiment and write per-trial rows, summaries and plot data'

    def add_arguments(self, parser):
        parser.add_argument('--experiment', required=True, choices=[kind.value for kind in InstanceKind])
        parser.add_argument('--m', type=int, help='Rows of generated instances')
        parser.add_argument('--n', type=int, help='Columns of generated instances')
        parser.add_argument('--r-true', type=int, help='Rank of the quantized signal')
        parser.add_argument('--path', help='MatrixMarket file for --experiment file')
        parser.add_argument('--ranks', nargs='+', required=True, help="Target ranks, e.g. '1-5' or '1,2,4'")
        parser.add_argument('--trials', type=int, help='Monte Carlo trials per rank (default 10)')
        parser.add_argument(
            '--methods', nargs='+',
            help=f"Methods among {', '.join(method.value for method in Method)} (default l1,svd)",
        )
        parser.add_argument('--seed', type=int, help='64-bit experiment seed')
        parser.add_argument('--norm', choices=['1', 'inf'], help='Norm the SVD baseline is scored in (default 1)')
        parser.add_argument('--workers', type=int, help='Worker processes')
        parser.add_argument('--colsample-trials', type=int, help='Column samples per instance (default 10)')
        parser.add_argument('--time-matched', action='store_true',
                            help="Give column sampling at least the l1 solver's time on each instance")
        parser.add_argument('--out', required=True, help='Per-trial rows CSV')
        parser.add_argument('--summary-out', help='Summary CSV: [min, mean, median] per method and rank')
        parser.add_argument('--plot-out', help='Plot data CSV: median error per rank and method')
        parser.add_argument('--no-timing', action='store_true',
                            help='Leave wall time out of the rows CSV so repeated runs write identical bytes')
        parser.add_argument('--store', action='store_true', help='Save the run in the database')
        parser.add_argument('--label', default='', help='Label for a stored run')
        add_mode_arguments(parser)

    def handle(self, *args, **options):
        serializer = self.validate(ExperimentSpecSerializer, {
            'experiment': options['experiment'],
            'm': options['m'],
            'n': options['n'],
            'r_true': options['r_true'],
            'path': options['path'],
            'ranks': parse_ranks(options['ranks']),
            'trials': options['trials'],
            'methods': split_list(options['methods']) or None,
            'seed': options['seed'],
            'norm': options['norm'],
            'workers': options['workers'] or settings.LOWRANK['BENCH_WORKERS'],
            'colsample_trials': options['colsample_trials'],
            'time_matched': options['time_matched'],
            **mode_data(options),
        })
        spec = serializer.to_spec(max_cells=settings.LOWRANK['MAX_DENSE_CELLS'])

        rows = run_experiment(spec)
        emit_csv(rows, options['out'], include_timing=not options['no_timing'])
        if options['summary_out']:
            emit_summary(rows, options['summary_out'])
        if options['plot_out']:
            emit_plotdata(rows, options['plot_out'])

        failures = sum(1 for row in rows if not row.ok)
        self.stdout.write(f"{len(rows)} rows written to {options['out']} ({failures} failed)")
        for entry in summarize(rows):
            if entry.error_median is None:
                self.stdout.write(f"  {entry.method.value:>9} r={entry.rank}: all {entry.count} trials failed")
                continue
            self.stdout.write(
                f"  {entry.method.value:>9} r={entry.rank}: error "
                f"[{entry.error_min:.3e}, {entry.error_mean:.3e}, {entry.error_median:.3e}] "
                f"time median {entry.time_median:.3f}s"
            )
        if options['store']:
            run = ExperimentRun.objects.record(spec, rows, label=options['label'])
            self.stdout.write(self.style.SUCCESS(f"stored as run {run.pk}"))
