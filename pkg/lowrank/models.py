"""
Models for stored experiment runs.
"""
from django.db import models, transaction

from .experiments import ExperimentRow, Method, norm_label, summarize


class ExperimentRunManager(models.Manager):
    def record(self, spec, rows, label=''):
        """
        Store an ExperimentSpec and its rows in one transaction.
        """
        with transaction.atomic():
            run = self.create(
                label=label,
                experiment=spec.source.kind.value,
                norm=norm_label(spec.norm),
                seed=str(spec.seed),
                spec=spec.as_dict(),
            )
            ExperimentRecord.objects.bulk_create([
                ExperimentRecord(
                    run=run,
                    method=Method(row.method).value,
                    rank=row.rank,
                    trial=row.trial,
                    lp_error=row.lp_error,
                    wall_time_seconds=row.wall_time_seconds,
                    iterations_run=row.iterations_run,
                    seed=str(row.seed),
                    status=row.status,
                    error=row.error,
                )
                for row in rows
            ])
        return run


class ExperimentRun(models.Model):
    """
    One `bench` invocation: the spec it ran and, through `records`, its rows.
    """
    label = models.CharField(max_length=100, blank=True, default='')
    experiment = models.CharField(max_length=20, help_text="Instance source: uniform, sign, quantized or file")
    norm = models.CharField(max_length=3, default='1', help_text="Norm the SVD baseline is scored in")
    seed = models.CharField(max_length=20, help_text="64-bit experiment seed, as decimal digits")
    spec = models.JSONField(help_text="Complete experiment spec as JSON")
    created_at = models.DateTimeField(auto_now_add=True)

    objects = ExperimentRunManager()

    class Meta:
        ordering = ['-created_at', '-id']
        indexes = [
            models.Index(fields=['-created_at']),
            models.Index(fields=['experiment', '-created_at']),
        ]

    def __str__(self):
        name = self.label or self.experiment
        return f"{name} - seed {self.seed} - {self.created_at.strftime('%Y-%m-%d %H:%M')}"

    def rows(self):
        return [record.as_row() for record in self.records.all()]

    def summary(self):
        return summarize(self.rows())


class ExperimentRecord(models.Model):
    """
    One (method, rank, trial) row of a run. `lp_error` is empty for failed methods.
    """
    STATUS_CHOICES = [('ok', 'ok'), ('error', 'error')]
    METHOD_CHOICES = [(method.value, method.value) for method in Method]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='records')
    method = models.CharField(max_length=10, choices=METHOD_CHOICES)
    rank = models.PositiveIntegerField()
    trial = models.PositiveIntegerField()
    lp_error = models.FloatField(null=True, blank=True)
    wall_time_seconds = models.FloatField(default=0.0)
    iterations_run = models.PositiveIntegerField(default=0)
    seed = models.CharField(max_length=20, help_text="Instance seed, as decimal digits")
    status = models.CharField(max_length=5, choices=STATUS_CHOICES, default='ok')
    error = models.TextField(blank=True, default='')

    class Meta:
        ordering = ['run', 'method', 'rank', 'trial']
        indexes = [
            models.Index(fields=['run', 'method', 'rank']),
        ]
        constraints = [
            models.UniqueConstraint(fields=['run', 'method', 'rank', 'trial'], name='unique_record_per_trial'),
        ]

    def __str__(self):
        return f"{self.method} r={self.rank} trial {self.trial} - {self.status}"

    def as_row(self):
        return ExperimentRow(
            method=Method(self.method),
            rank=self.rank,
            trial=self.trial,
            lp_error=self.lp_error,
            wall_time_seconds=self.wall_time_seconds,
            iterations_run=self.iterations_run,
            seed=int(self.seed),
            status=self.status,
            error=self.error,
        )
