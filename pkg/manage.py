#!/usr/bin/env python
"""Command-line entry point: experiments, tests and admin tasks."""
import os
import sys


def main():
    """Run a management command (e.g. run_experiment, test, migrate)."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'rb_stability.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
