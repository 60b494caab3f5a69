"""
Write a synthetic instance to a MatrixMarket file.
"""
from lowrank.generators import gen_planted_sparse, gen_quantized, gen_sign, gen_uniform
from lowrank.matrix_market import write_matrix_market
from lowrank.serializers import GenerateSerializer

from ._base import LowRankCommand


class Command(LowRankCommand):
    help = 'Generate a uniform, sign, quantized or planted-sparse instance as a MatrixMarket file'

    def add_arguments(self, parser):
        parser.add_argument('--experiment', required=True, choices=GenerateSerializer.GENERATORS)
        parser.add_argument('--m', type=int, required=True)
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--r-true', type=int, help='Signal rank (quantized and planted)')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', required=True, help='MatrixMarket file to write')

    def handle(self, *args, **options):
        data = self.validate(GenerateSerializer, {
            'experiment': options['experiment'],
            'm': options['m'],
            'n': options['n'],
            'r_true': options['r_true'],
            'seed': options['seed'],
        }).validated_data
        kind, m, n, seed = data['experiment'], data['m'], data['n'], data['seed']
        comment = [f"{kind} {m}x{n} seed {seed}"]

        if kind == 'uniform':
            matrix = gen_uniform(m, n, seed)
        elif kind == 'sign':
            matrix = gen_sign(m, n, seed)
        elif kind == 'quantized':
            instance = gen_quantized(m, n, data['r_true'], seed)
            matrix = instance.matrix
            comment.append(f"r_true {data['r_true']}, linf distance to the rank-r signal {instance.certificate:.17g}")
        else:
            instance = gen_planted_sparse(m, n, data['r_true'], seed)
            matrix = instance.matrix
            comment.append(
                f"r_true {data['r_true']}, opt_bound {instance.opt_bound:.17g}, "
                f"xstar_fro_sq {instance.xstar_fro_sq:.17g}, sigma_r {instance.sigma_r:.17g}"
            )

        write_matrix_market(matrix, options['out'], comment='\n'.join(comment))
        self.stdout.write(self.style.SUCCESS(f"wrote {m}x{n} {kind} matrix to {options['out']}"))
