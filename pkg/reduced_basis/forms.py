from django import forms

from .estimators import STABLE, TRADITIONAL
from .experiment import ExperimentConfig
from .linops import SOLVER_METHODS

# Command-line spelling -> estimator kind
GREEDY_ESTIMATOR_CHOICES = [
    ('stable', 'Stable (orthonormal residual basis)'),
    ('trad', 'Traditional (Gram matrix)'),
    ('traditional', 'Traditional (Gram matrix)'),
]
GREEDY_ESTIMATOR_KINDS = {'stable': STABLE, 'trad': TRADITIONAL, 'traditional': TRADITIONAL}


class ExperimentConfigForm(forms.Form):
    grid_n = forms.IntegerField(initial=100, help_text='Cells per axis (even)')
    train_points_per_axis = forms.IntegerField(initial=5)
    max_basis = forms.IntegerField(initial=35)
    greedy_tol = forms.FloatField(initial=0.0, required=False)
    greedy_estimator = forms.ChoiceField(choices=GREEDY_ESTIMATOR_CHOICES, initial='stable')
    n_test_params = forms.IntegerField(initial=20)
    rng_seed = forms.IntegerField(initial=0, min_value=0)
    solver_tol = forms.FloatField(required=False)
    solver_method = forms.ChoiceField(
        choices=[('', 'From settings')] + [(method, method) for method in SOLVER_METHODS],
        required=False,
    )
    output_path = forms.CharField(max_length=500, required=False)
    workers = forms.IntegerField(min_value=1, required=False)
    use_file_cache = forms.NullBooleanField(required=False)

    def clean_grid_n(self):
        grid_n = self.cleaned_data['grid_n']
        if grid_n < 2 or grid_n % 2:
            raise forms.ValidationError(f'Grid size must be a positive even number (got {grid_n})')
        return grid_n

    def clean_train_points_per_axis(self):
        points = self.cleaned_data['train_points_per_axis']
        if points < 2:
            raise forms.ValidationError('The training grid needs at least 2 points per axis')
        return points

    def clean_max_basis(self):
        max_basis = self.cleaned_data['max_basis']
        if max_basis < 1:
            raise forms.ValidationError('Maximum basis size must be at least 1')
        return max_basis

    def clean_greedy_tol(self):
        tol = self.cleaned_data.get('greedy_tol')
        if tol is None:
            return 0.0
        if tol < 0:
            raise forms.ValidationError('Greedy tolerance must be non-negative')
        return tol

    def clean_n_test_params(self):
        count = self.cleaned_data['n_test_params']
        if count < 1:
            raise forms.ValidationError('At least one test parameter is required')
        return count

    def clean_solver_tol(self):
        tol = self.cleaned_data.get('solver_tol')
        if tol is not None and not tol > 0:
            raise forms.ValidationError('Solver tolerance must be positive')
        return tol

    def to_config(self):
        """ExperimentConfig from the cleaned data; call after is_valid()."""
        data = self.cleaned_data
        return ExperimentConfig(
            grid_n=data['grid_n'],
            train_points_per_axis=data['train_points_per_axis'],
            max_basis=data['max_basis'],
            greedy_tol=data['greedy_tol'],
            greedy_estimator=GREEDY_ESTIMATOR_KINDS[data['greedy_estimator']],
            n_test_params=data['n_test_params'],
            rng_seed=data['rng_seed'],
            solver_tol=data.get('solver_tol'),
            solver_method=data.get('solver_method') or None,
            output_path=data.get('output_path') or None,
            workers=data.get('workers'),
            use_file_cache=data.get('use_file_cache'),
        )

    def error_summary(self):
        return '; '.join(
            f"{field}: {' '.join(messages)}" for field, messages in self.errors.items()
        )
