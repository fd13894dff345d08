from django.contrib import admin
from .models import ExperimentRun, ExperimentRow


class ExperimentRowInline(admin.TabularInline):
    model = ExperimentRow
    extra = 0
    readonly_fields = ('basis_size', 'est_stable', 'est_trad', 'err')
    can_delete = False


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'grid_n', 'greedy_estimator', 'max_basis', 'final_basis_size', 'status', 'created_at')
    list_filter = ('greedy_estimator', 'status', 'stagnated', 'grid_n')
    search_fields = ('output_path', 'processing_errors')
    inlines = [ExperimentRowInline]
    readonly_fields = ('status', 'final_basis_size', 'greedy_stop_reason', 'stagnated',
                       'wall_clock_seconds', 'processing_errors', 'created_at', 'finished_at')
    fieldsets = (
        ('Discretization', {
            'fields': ('grid_n', 'solver_method', 'solver_tol')
        }),
        ('Greedy', {
            'fields': ('train_points_per_axis', 'max_basis', 'greedy_tol', 'greedy_estimator')
        }),
        ('Evaluation', {
            'fields': ('n_test_params', 'rng_seed', 'output_path')
        }),
        ('Outcome', {
            'fields': ('status', 'final_basis_size', 'greedy_stop_reason', 'stagnated',
                       'wall_clock_seconds', 'processing_errors', 'created_at', 'finished_at')
        }),
    )
