"""Command-line front end: ``manage.py <command> [flags]``."""
