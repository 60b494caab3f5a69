"""
Solve one MatrixMarket matrix in the entrywise l1 or l-infinity norm.

    python manage.py solve --in matrix.mtx --rank 3 --p 1 --out trace.csv
"""
import csv

from django.conf import settings
from django.core.management.base import CommandError

from lowrank.bfgd import InitMode, StepSearch
from lowrank.matrix_market import load_matrix_market
from lowrank.serializers import SolveParamsSerializer
from lowrank.solvers import solve

from ._base import ExitCode, LowRankCommand, add_mode_arguments, mode_data

TRACE_VERSION = '# lowrank-solve-trace v1'


class Command(LowRankCommand):
    help = 'Rank-r approximation of a MatrixMarket matrix by smoothed bi-factored gradient descent'

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='input', required=True, help='MatrixMarket file to approximate')
        parser.add_argument('--rank', type=int, required=True, help='Target rank r')
        parser.add_argument('--p', choices=['1', 'inf'], default='1', help='Entrywise norm (default 1)')
        parser.add_argument('--init', choices=[mode.value for mode in InitMode], help='Initialization (default svd)')
        parser.add_argument('--seed', type=int, help='Seed for the power-iteration start vectors')
        parser.add_argument('--trace-every', type=int, help='Trace sampling interval')
        parser.add_argument('--step-search', choices=[search.value for search in StepSearch],
                            help='Step rule (default: armijo for practical l-infinity, fixed otherwise)')
        parser.add_argument('--out', help='Write the objective and error trace to this CSV file')
        add_mode_arguments(parser)

    def handle(self, *args, **options):
        params = self.validate(SolveParamsSerializer, {
            'rank': options['rank'],
            'p': options['p'],
            'init': options['init'],
            'seed': options['seed'],
            'trace_every': options['trace_every'] or settings.LOWRANK['TRACE_EVERY'],
            'step_search': options['step_search'],
            **mode_data(options),
        })
        data = params.validated_data

        M = load_matrix_market(options['input'], max_cells=settings.LOWRANK['MAX_DENSE_CELLS'])
        if data['rank'] > min(M.shape):
            raise CommandError(
                f"rank {data['rank']} exceeds min(m, n) = {min(M.shape)} for {options['input']}",
                returncode=ExitCode.USAGE,
            )

        report = solve(
            M, data['rank'], data['p'], params.mode(), **params.solver_options(),
        )
        if options['out']:
            self._write_trace(report, options['out'])

        norm = 'inf' if data['p'] != 1 else '1'
        self.stdout.write(f"matrix: {M.shape[0]}x{M.shape[1]}, rank {data['rank']}, l{norm}")
        self.stdout.write(f"termination: {report.termination.value} after {report.iterations_run} iterations")
        self.stdout.write(f"final error: {report.final_error:.6e}")
        self.stdout.write(f"wall time: {report.wall_time:.3f}s")

    @staticmethod
    def _write_trace(report, path):
        steps = dict(report.step_trace)
        errors = dict(report.error_trace)
        with open(path, 'w', newline='') as handle:
            handle.write(TRACE_VERSION + '\n')
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['iteration', 'objective', 'lp_error', 'step'])
            for iteration, value in report.objective_trace:
                step = steps.get(iteration)
                writer.writerow([
                    iteration,
                    '%.6e' % value,
                    '%.6e' % errors[iteration],
                    '' if step is None else '%.6e' % step,
                ])
