"""
Shared plumbing for the lowrank management commands: exit codes, argument
parsing and translation of library errors into CommandError.
"""
import enum
import sys

from django.core.management.base import BaseCommand, CommandError

from lowrank.exceptions import LowRankError, NumericalFailure, ParseError


class ExitCode(enum.IntEnum):
    OK = 0
    USAGE = 1
    DATA = 2
    NUMERICAL = 3


def split_list(values):
    """Flatten `--ranks 1,2 3` style arguments to ['1', '2', '3']."""
    return [item for value in values or [] for item in str(value).split(',') if item]


def add_mode_arguments(parser):
    group = parser.add_argument_group('practical mode')
    group.add_argument('--tau', type=float, help='Smoothing parameter (default 1e-3)')
    group.add_argument('--lambda', dest='lam', type=float, help='Ridge weight (default 1e-3)')
    group.add_argument('--iters', type=int, help='Iteration budget T (default 40000)')
    group = parser.add_argument_group('theory mode (all four, replaces tau, lambda and iters)')
    group.add_argument('--opt', type=float, help='OPT or an upper bound on it')
    group.add_argument('--xstar-fro-sq', type=float, help='Squared Frobenius norm of the optimum')
    group.add_argument('--sigma-r', type=float, help='r-th singular value of the rank-r optimum')
    group.add_argument('--epsilon', type=float, help='Target accuracy epsilon')


def mode_data(options):
    return {
        'tau': options.get('tau'),
        'lambda': options.get('lam'),
        'iterations': options.get('iters'),
        'opt': options.get('opt'),
        'xstar_fro_sq': options.get('xstar_fro_sq'),
        'sigma_r': options.get('sigma_r'),
        'epsilon': options.get('epsilon'),
    }


class LowRankCommand(BaseCommand):
    """
    Exit codes: 1 for usage and validation errors, 2 for unreadable or
    malformed input, 3 for numerical failures.
    """

    def run_from_argv(self, argv):
        # a parser built outside the command line raises CommandError (exit 1)
        # instead of letting argparse exit with 2
        parser = self.create_parser(argv[0], argv[1])
        try:
            parser.parse_args(argv[2:])
        except CommandError as exc:
            parser.print_usage(sys.stderr)
            self.stderr.write(f"{parser.prog}: {exc}")
            sys.exit(ExitCode.USAGE)
        super().run_from_argv(argv)

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except CommandError:
            raise
        except NumericalFailure as exc:
            raise CommandError(f"numerical failure: {exc}", returncode=ExitCode.NUMERICAL) from exc
        except (ParseError, OSError) as exc:
            raise CommandError(str(exc), returncode=ExitCode.DATA) from exc
        except LowRankError as exc:
            raise CommandError(str(exc), returncode=ExitCode.USAGE) from exc

    def validate(self, serializer_class, data):
        """Run CLI values through a serializer; unset values take the serializer defaults."""
        serializer = serializer_class(data={key: value for key, value in data.items() if value is not None})
        if not serializer.is_valid():
            raise CommandError(self._format_errors(serializer.errors), returncode=ExitCode.USAGE)
        return serializer

    @staticmethod
    def _format_errors(errors):
        lines = []
        for field, messages in errors.items():
            label = '' if field == 'non_field_errors' else f"{field}: "
            for message in messages if isinstance(messages, list) else [messages]:
                lines.append(f"{label}{message}")
        return '; '.join(lines)
