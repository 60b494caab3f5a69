# Generated by Django 5.0 on 2026-10-16 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("label", models.CharField(blank=True, default="", max_length=100)),
                (
                    "experiment",
                    models.CharField(
                        help_text="Instance source: uniform, sign, quantized or file",
                        max_length=20,
                    ),
                ),
                (
                    "norm",
                    models.CharField(
                        default="1",
                        help_text="Norm the SVD baseline is scored in",
                        max_length=3,
                    ),
                ),
                (
                    "seed",
                    models.CharField(
                        help_text="64-bit experiment seed, as decimal digits",
                        max_length=20,
                    ),
                ),
                (
                    "spec",
                    models.JSONField(help_text="Complete experiment spec as JSON"),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at", "-id"],
                "indexes": [
                    models.Index(
                        fields=["-created_at"], name="lowrank_exp_created_4ad6b4_idx"
                    ),
                    models.Index(
                        fields=["experiment", "-created_at"],
                        name="lowrank_exp_experim_175a4e_idx",
                    ),
                ],
            },
        ),
        migrations.CreateModel(
            name="ExperimentRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "method",
                    models.CharField(
                        choices=[
                            ("l1", "l1"),
                            ("linf", "linf"),
                            ("svd", "svd"),
                            ("colsample", "colsample"),
                        ],
                        max_length=10,
                    ),
                ),
                ("rank", models.PositiveIntegerField()),
                ("trial", models.PositiveIntegerField()),
                ("lp_error", models.FloatField(blank=True, null=True)),
                ("wall_time_seconds", models.FloatField(default=0.0)),
                ("iterations_run", models.PositiveIntegerField(default=0)),
                (
                    "seed",
                    models.CharField(
                        help_text="Instance seed, as decimal digits", max_length=20
                    ),
                ),
                (
                    "status",
                    models.CharField(
                        choices=[("ok", "ok"), ("error", "error")],
                        default="ok",
                        max_length=5,
                    ),
                ),
                ("error", models.TextField(blank=True, default="")),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="records",
                        to="lowrank.experimentrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "method", "rank", "trial"],
                "indexes": [
                    models.Index(
                        fields=["run", "method", "rank"],
                        name="lowrank_exp_run_id_608d66_idx",
                    ),
                ],
                "constraints": [
                    models.UniqueConstraint(
                        fields=("run", "method", "rank", "trial"),
                        name="unique_record_per_trial",
                    ),
                ],
            },
        ),
    ]
