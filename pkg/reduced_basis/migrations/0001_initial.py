import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('grid_n', models.IntegerField(default=100)),
                ('train_points_per_axis', models.IntegerField(default=5)),
                ('max_basis', models.IntegerField(default=35)),
                ('greedy_tol', models.FloatField(default=0.0)),
                ('greedy_estimator', models.CharField(choices=[('stable', 'Stable'), ('traditional', 'Traditional')], default='stable', max_length=20)),
                ('n_test_params', models.IntegerField(default=20)),
                ('rng_seed', models.IntegerField(default=0)),
                ('solver_method', models.CharField(blank=True, max_length=10, null=True)),
                ('solver_tol', models.FloatField(blank=True, null=True)),
                ('output_path', models.CharField(blank=True, max_length=500, null=True)),
                ('status', models.CharField(choices=[('running', 'Running'), ('finished', 'Finished'), ('failed', 'Failed')], default='running', max_length=10)),
                ('final_basis_size', models.IntegerField(blank=True, null=True)),
                ('greedy_stop_reason', models.CharField(blank=True, max_length=20, null=True)),
                ('stagnated', models.BooleanField(default=False)),
                ('wall_clock_seconds', models.FloatField(blank=True, null=True)),
                ('processing_errors', models.TextField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='ExperimentRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('basis_size', models.IntegerField()),
                ('est_stable', models.FloatField()),
                ('est_trad', models.FloatField()),
                ('err', models.FloatField()),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='rows', to='reduced_basis.experimentrun')),
            ],
            options={
                'ordering': ['run', 'basis_size'],
                'unique_together': {('run', 'basis_size')},
            },
        ),
    ]
