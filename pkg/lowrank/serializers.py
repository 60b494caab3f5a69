"""
Serializers for the low-rank approximation API and command-line flags.
"""
from rest_framework import serializers

from .bfgd import InitMode, StepSearch
from .experiments import ExperimentSpec, InstanceKind, InstanceSource, Method, parse_norm
from .models import ExperimentRecord, ExperimentRun
from .solvers import ITERATION_CAP, PracticalParams, TheoryParams

THEORY_FIELDS = ('opt', 'xstar_fro_sq', 'sigma_r', 'epsilon')


def build_mode(data, iteration_cap=ITERATION_CAP):
    """TheoryParams when the theory quantities are given, PracticalParams otherwise."""
    if data.get('opt') is not None:
        return TheoryParams(*(data[name] for name in THEORY_FIELDS), iteration_cap=iteration_cap)
    return PracticalParams(tau=data['tau'], lam=data['lambda'], iterations=data['iterations'])


class ExperimentRecordSerializer(serializers.ModelSerializer):
    """
    Serializer for one stored (method, rank, trial) row.
    """
    seed = serializers.CharField(read_only=True)

    class Meta:
        model = ExperimentRecord
        fields = ['method', 'rank', 'trial', 'lp_error', 'wall_time_seconds', 'iterations_run', 'seed', 'status', 'error']
        read_only_fields = fields


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Serializer for run listings. Seeds are strings since they can exceed 2^53.
    """
    seed = serializers.CharField(read_only=True)
    record_count = serializers.IntegerField(read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'label', 'experiment', 'norm', 'seed', 'record_count', 'created_at']
        read_only_fields = fields


class ExperimentRunDetailSerializer(ExperimentRunSerializer):
    records = ExperimentRecordSerializer(many=True, read_only=True)

    class Meta(ExperimentRunSerializer.Meta):
        fields = ['id', 'label', 'experiment', 'norm', 'seed', 'spec', 'created_at', 'records']
        read_only_fields = fields


class SummaryRowSerializer(serializers.Serializer):
    method = serializers.CharField(source='method.value')
    rank = serializers.IntegerField()
    count = serializers.IntegerField()
    failures = serializers.IntegerField()
    error_min = serializers.FloatField(allow_null=True)
    error_mean = serializers.FloatField(allow_null=True)
    error_median = serializers.FloatField(allow_null=True)
    time_min = serializers.FloatField(allow_null=True)
    time_mean = serializers.FloatField(allow_null=True)
    time_median = serializers.FloatField(allow_null=True)


class NormField(serializers.ChoiceField):
    """Accepts 1, '1', 'l1', 'inf' or 'linf'; returns 1 or math.inf."""

    def __init__(self, **kwargs):
        super().__init__(choices=['1', 'inf'], **kwargs)

    def to_internal_value(self, data):
        try:
            return parse_norm(data)
        except ValueError:
            self.fail('invalid_choice', input=data)

    def to_representation(self, value):
        return 'inf' if value == float('inf') else '1'


class ModeParamsSerializer(serializers.Serializer):
    """
    Practical parameters (tau, lambda, iterations) or, when `opt` is given,
    the theory quantities. The JSON key for the ridge weight is `lambda`.
    """
    tau = serializers.FloatField(default=1e-3, min_value=0.0)
    iterations = serializers.IntegerField(default=40000, min_value=0)
    opt = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    xstar_fro_sq = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    sigma_r = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    epsilon = serializers.FloatField(required=False, allow_null=True, min_value=0.0)

    def get_fields(self):
        fields = super().get_fields()
        fields['lambda'] = serializers.FloatField(default=1e-3, min_value=0.0)
        return fields

    def validate_tau(self, value):
        if value <= 0:
            raise serializers.ValidationError("tau must be positive")
        return value

    def validate(self, attrs):
        given = [name for name in THEORY_FIELDS if attrs.get(name) is not None]
        if given and len(given) != len(THEORY_FIELDS):
            missing = ', '.join(name for name in THEORY_FIELDS if name not in given)
            raise serializers.ValidationError(f"theory mode also needs: {missing}")
        for name in given:
            if attrs[name] <= 0:
                raise serializers.ValidationError({name: "must be positive"})
        return attrs

    def mode(self, iteration_cap=ITERATION_CAP):
        return build_mode(self.validated_data, iteration_cap)


class SolveParamsSerializer(ModeParamsSerializer):
    """
    Flags of a single solve.
    """
    rank = serializers.IntegerField(min_value=1)
    p = NormField(default=1)
    init = serializers.ChoiceField(choices=[mode.value for mode in InitMode], default=InitMode.SVD.value)
    seed = serializers.IntegerField(default=0, min_value=0, max_value=2 ** 64 - 1)
    trace_every = serializers.IntegerField(default=100, min_value=1)
    step_search = serializers.ChoiceField(choices=[search.value for search in StepSearch], required=False)

    def solver_options(self):
        """Keyword options for `solve`; an unset step search keeps the solver default."""
        data = self.validated_data
        options = {'init': data['init'], 'seed': data['seed'], 'trace_every': data['trace_every']}
        if data.get('step_search'):
            options['step_search'] = data['step_search']
        return options


class SolveRequestSerializer(SolveParamsSerializer):
    """
    Body of POST /api/solve. Size limits come from the serializer context:
    `max_cells` and `max_iterations`.
    """
    iterations = serializers.IntegerField(default=2000, min_value=0)
    matrix = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), allow_empty=False),
        allow_empty=False,
    )

    def validate_matrix(self, value):
        width = len(value[0])
        if any(len(row) != width for row in value):
            raise serializers.ValidationError("rows must all have the same length")
        max_cells = self.context.get('max_cells')
        if max_cells is not None and len(value) * width > max_cells:
            raise serializers.ValidationError(f"matrix has more than {max_cells} entries")
        return value

    def validate(self, attrs):
        attrs = super().validate(attrs)
        m, n = len(attrs['matrix']), len(attrs['matrix'][0])
        if attrs['rank'] > min(m, n):
            raise serializers.ValidationError({'rank': f"must be at most min(m, n) = {min(m, n)}"})
        max_iterations = self.context.get('max_iterations')
        if max_iterations is not None and attrs['iterations'] > max_iterations:
            raise serializers.ValidationError({'iterations': f"must be at most {max_iterations}"})
        return attrs


class ExperimentSpecSerializer(ModeParamsSerializer):
    """
    Flags of a `bench` run, validated into an ExperimentSpec.
    """
    experiment = serializers.ChoiceField(choices=[kind.value for kind in InstanceKind])
    m = serializers.IntegerField(required=False, allow_null=True, min_value=1)
    n = serializers.IntegerField(required=False, allow_null=True, min_value=1)
    r_true = serializers.IntegerField(required=False, allow_null=True, min_value=1)
    path = serializers.CharField(required=False, allow_null=True, allow_blank=False)
    ranks = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    trials = serializers.IntegerField(default=10, min_value=1)
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=[method.value for method in Method]),
        allow_empty=False,
        default=lambda: [Method.L1.value, Method.SVD.value],
    )
    seed = serializers.IntegerField(default=0, min_value=0, max_value=2 ** 64 - 1)
    norm = NormField(default=1)
    workers = serializers.IntegerField(default=1, min_value=1)
    time_matched = serializers.BooleanField(default=False)
    colsample_trials = serializers.IntegerField(default=10, min_value=1)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        kind = InstanceKind(attrs['experiment'])
        if kind is InstanceKind.FILE:
            if not attrs.get('path'):
                raise serializers.ValidationError({'path': "required for file experiments"})
        else:
            if not (attrs.get('m') and attrs.get('n')):
                raise serializers.ValidationError(f"{kind.value} experiments need m and n")
            limit = min(attrs['m'], attrs['n'])
            if max(attrs['ranks']) > limit:
                raise serializers.ValidationError({'ranks': f"every rank must be at most min(m, n) = {limit}"})
            if kind is InstanceKind.QUANTIZED and not (attrs.get('r_true') and attrs['r_true'] <= limit):
                raise serializers.ValidationError({'r_true': f"quantized experiments need r_true in [1, {limit}]"})
        if attrs['time_matched'] and not {Method.L1.value, Method.COLSAMPLE.value} <= set(attrs['methods']):
            raise serializers.ValidationError({'time_matched': "needs both the l1 and colsample methods"})
        return attrs

    def to_spec(self, max_cells=None):
        data = self.validated_data
        source = InstanceSource(
            kind=data['experiment'],
            m=data.get('m'),
            n=data.get('n'),
            r_true=data.get('r_true'),
            path=data.get('path'),
        )
        options = {} if max_cells is None else {'max_cells': max_cells}
        return ExperimentSpec(
            source=source,
            ranks=tuple(data['ranks']),
            trials=data['trials'],
            methods=tuple(data['methods']),
            mode=self.mode(),
            seed=data['seed'],
            norm=data['norm'],
            workers=data['workers'],
            time_matched=data['time_matched'],
            colsample_trials=data['colsample_trials'],
            **options,
        )


class GenerateSerializer(serializers.Serializer):
    """
    Flags of `gen`: which synthetic instance to write.
    """
    GENERATORS = ['uniform', 'sign', 'quantized', 'planted']

    experiment = serializers.ChoiceField(choices=GENERATORS)
    m = serializers.IntegerField(min_value=1)
    n = serializers.IntegerField(min_value=1)
    r_true = serializers.IntegerField(required=False, allow_null=True, min_value=1)
    seed = serializers.IntegerField(default=0, min_value=0, max_value=2 ** 64 - 1)

    def validate(self, attrs):
        if attrs['experiment'] in ('quantized', 'planted'):
            limit = min(attrs['m'], attrs['n'])
            if not (attrs.get('r_true') and attrs['r_true'] <= limit):
                raise serializers.ValidationError({'r_true': f"required, at most min(m, n) = {limit}"})
        return attrs
