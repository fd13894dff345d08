"""
Run the thermal block stability study.

Example:
    python manage.py run_experiment --grid 100 --train 5 --max-basis 35 --out errors.csv

Exit status is 0 on success, 2 on invalid arguments and 1 when the
numerics fail; rows finished before a failure stay in the CSV file.
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from reduced_basis.conf import get_setting
from reduced_basis.exceptions import ConfigurationError, ReducedBasisError
from reduced_basis.experiment import format_efficiency_table, run_experiment
from reduced_basis.forms import ExperimentConfigForm
from reduced_basis.linops import SOLVER_METHODS
from reduced_basis.services import record_experiment_run

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
NUMERICAL_FAILURE = 1


class Command(BaseCommand):
    help = 'Greedy reduced basis generation for the thermal block and comparison of both error estimators'

    def add_arguments(self, parser):
        parser.add_argument('--grid', type=int, default=100, help='Cells per axis of the mesh (even)')
        parser.add_argument('--train', type=int, default=5, help='Training points per parameter axis')
        parser.add_argument('--max-basis', type=int, default=35, help='Maximum reduced basis size')
        parser.add_argument('--tol', type=float, default=0.0, help='Greedy tolerance on the relative bound')
        parser.add_argument('--greedy-estimator', choices=['stable', 'trad'], default='stable',
                            help='Estimator driving the greedy selection')
        parser.add_argument('--test-count', type=int, default=20, help='Number of random test parameters')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the test parameter generator')
        parser.add_argument('--solver-tol', type=float, default=None, help='Relative residual tolerance of solves')
        parser.add_argument('--out', default=None, help='CSV output path (setting OUTPUT_PATH by default)')
        parser.add_argument('--solver', choices=SOLVER_METHODS, default=None, help='High-dimensional solver')
        parser.add_argument('--workers', type=int, default=None, help='Threads for estimator sweeps')
        parser.add_argument('--record', action='store_true', help='Store the run in the database')
        parser.add_argument('--no-cache', action='store_true', help='Do not use the file cache of truth solutions')

    def handle(self, *args, **options):
        form = ExperimentConfigForm(data={
            'grid_n': options['grid'],
            'train_points_per_axis': options['train'],
            'max_basis': options['max_basis'],
            'greedy_tol': options['tol'],
            'greedy_estimator': options['greedy_estimator'],
            'n_test_params': options['test_count'],
            'rng_seed': options['seed'],
            'solver_tol': options['solver_tol'],
            'solver_method': options['solver'] or '',
            'output_path': options['out'] or get_setting('OUTPUT_PATH'),
            'workers': options['workers'],
            'use_file_cache': False if options['no_cache'] else None,
        })
        if not form.is_valid():
            raise CommandError(f"Invalid arguments: {form.error_summary()}", returncode=USAGE_ERROR)
        config = form.to_config()

        try:
            if options['record']:
                run, result = record_experiment_run(config)
                self.stdout.write(f"Recorded as experiment run {run.id}")
            else:
                result = run_experiment(config)
        except ConfigurationError as e:
            raise CommandError(str(e), returncode=USAGE_ERROR)
        except ReducedBasisError as e:
            logger.error(f"Experiment failed: {e}")
            raise CommandError(f"Numerical failure: {e}", returncode=NUMERICAL_FAILURE)

        log = result.greedy_log
        self.stdout.write(f"Greedy stopped at basis size {len(log.reduced_models) - 1} ({log.reason}), "
                          f"{len(log.deflated)} deflated snapshots, "
                          f"at most {log.max_gs_passes} Gram-Schmidt passes")
        if log.stagnated:
            self.stdout.write(self.style.WARNING('Greedy stagnated: no training snapshot extends the span'))
        self.stdout.write('Maximum and minimum efficiencies (true error / bound):')
        self.stdout.write(format_efficiency_table(result.efficiencies))
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(result.rows)} rows to {config.output_path}"))
