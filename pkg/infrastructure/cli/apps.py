"""
Django app configuration for infrastructure.cli.

This app holds the lab's management commands (solve, probe, degiorgi,
hedgehog); it has no models.
"""

from django.apps import AppConfig


class CliConfig(AppConfig):
    """Configuration for the command-line app."""

    name = "infrastructure.cli"
    verbose_name = "Regularity lab commands"
