import time

from django.db import transaction
from django.utils import timezone

from .experiment import run_experiment
from .models import ExperimentRow, ExperimentRun

import logging
logger = logging.getLogger(__name__)


def create_run(config):
    return ExperimentRun.objects.create(
        grid_n=config.grid_n,
        train_points_per_axis=config.train_points_per_axis,
        max_basis=config.max_basis,
        greedy_tol=config.greedy_tol,
        greedy_estimator=config.greedy_estimator,
        n_test_params=config.n_test_params,
        rng_seed=config.rng_seed,
        solver_method=config.solver_method,
        solver_tol=config.solver_tol,
        output_path=config.output_path,
    )


def store_rows(run, rows):
    """Replace the stored rows of a run with the given result rows."""
    with transaction.atomic():
        run.rows.all().delete()
        ExperimentRow.objects.bulk_create([
            ExperimentRow(
                run=run,
                basis_size=int(row.N),
                est_stable=float(row.est_stable),
                est_trad=float(row.est_trad),
                err=float(row.err),
            )
            for row in rows
        ])


def record_experiment_run(config, runner=run_experiment):
    """Run the experiment and persist configuration, outcome and rows.

    Returns:
        tuple: (ExperimentRun, ExperimentResult)
    """
    run = create_run(config)
    start = time.perf_counter()
    try:
        result = runner(config)

        store_rows(run, result.result_rows())
        run.final_basis_size = len(result.greedy_log.reduced_models) - 1
        run.greedy_stop_reason = result.greedy_log.reason
        run.stagnated = result.greedy_log.stagnated
        run.status = 'finished'
        run.wall_clock_seconds = time.perf_counter() - start
        run.finished_at = timezone.now()
        run.save()

        logger.info(f"Recorded experiment run {run.id} with {run.rows.count()} rows")
        return run, result
    except Exception as e:
        logger.error(f"Error in experiment run {run.id}: {str(e)}")
        run.status = 'failed'
        run.processing_errors = str(e)
        run.wall_clock_seconds = time.perf_counter() - start
        run.finished_at = timezone.now()
        run.save()
        raise
