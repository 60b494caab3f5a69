"""
Admin configuration for stored experiment runs.
"""
from django.contrib import admin
from .models import ExperimentRecord, ExperimentRun


class ExperimentRecordInline(admin.TabularInline):
    model = ExperimentRecord
    fields = ['method', 'rank', 'trial', 'lp_error', 'wall_time_seconds', 'iterations_run', 'status']
    readonly_fields = fields
    extra = 0
    can_delete = False
    show_change_link = True


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    """
    Admin interface for ExperimentRun model.
    """
    list_display = ['id', 'label', 'experiment', 'norm', 'seed', 'created_at']
    list_filter = ['experiment', 'norm', 'created_at']
    search_fields = ['label']
    readonly_fields = ['created_at']
    date_hierarchy = 'created_at'
    inlines = [ExperimentRecordInline]


@admin.register(ExperimentRecord)
class ExperimentRecordAdmin(admin.ModelAdmin):
    """
    Admin interface for ExperimentRecord model.
    """
    list_display = ['run', 'method', 'rank', 'trial', 'lp_error', 'wall_time_seconds', 'status']
    list_filter = ['method', 'rank', 'status']
    search_fields = ['run__label', 'error']
    ordering = ['run', 'method', 'rank', 'trial']
