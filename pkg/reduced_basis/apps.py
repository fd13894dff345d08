from django.apps import AppConfig


class ReducedBasisConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'reduced_basis'
    verbose_name = 'Reduced Basis Stability Study'
