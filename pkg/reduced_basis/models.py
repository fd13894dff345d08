from django.db import models


class ExperimentRun(models.Model):
    """A recorded run of the thermal block stability study"""
    STATUS_CHOICES = [
        ('running', 'Running'),
        ('finished', 'Finished'),
        ('failed', 'Failed'),
    ]
    ESTIMATOR_CHOICES = [
        ('stable', 'Stable'),
        ('traditional', 'Traditional'),
    ]

    # Configuration
    grid_n = models.IntegerField(default=100)
    train_points_per_axis = models.IntegerField(default=5)
    max_basis = models.IntegerField(default=35)
    greedy_tol = models.FloatField(default=0.0)
    greedy_estimator = models.CharField(max_length=20, choices=ESTIMATOR_CHOICES, default='stable')
    n_test_params = models.IntegerField(default=20)
    rng_seed = models.IntegerField(default=0)
    solver_method = models.CharField(max_length=10, blank=True, null=True)
    solver_tol = models.FloatField(blank=True, null=True)
    output_path = models.CharField(max_length=500, blank=True, null=True)

    # Outcome
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default='running')
    final_basis_size = models.IntegerField(blank=True, null=True)
    greedy_stop_reason = models.CharField(max_length=20, blank=True, null=True)
    stagnated = models.BooleanField(default=False)
    wall_clock_seconds = models.FloatField(blank=True, null=True)
    processing_errors = models.TextField(blank=True, null=True)

    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(blank=True, null=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"Run {self.pk}: grid {self.grid_n}, {self.get_greedy_estimator_display()} greedy ({self.status})"


class ExperimentRow(models.Model):
    """Maximum relative errors and bounds of one basis size"""
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='rows')
    basis_size = models.IntegerField()
    est_stable = models.FloatField()
    est_trad = models.FloatField()
    err = models.FloatField()

    class Meta:
        ordering = ['run', 'basis_size']
        unique_together = ('run', 'basis_size')

    def __str__(self):
        return f"N={self.basis_size}: err={self.err:.2e}"
