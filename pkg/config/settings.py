"""
Django settings for the regularity lab.

Django is used only for manage.py and its management commands: one app,
no database. Lab values come from the environment (optionally a ``.env``
file). CLI flags override them; they override module constants in
``core``.
"""

import logging
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger("infrastructure")

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# =============================================================================
# Django
# =============================================================================

SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "django-insecure-regularity-lab")

DEBUG = os.getenv("DJANGO_DEBUG", "False").lower() in ("true", "1", "yes")

INSTALLED_APPS = [
    "infrastructure.cli",
]

DATABASES = {}

USE_TZ = True


# =============================================================================
# Lab defaults
# =============================================================================

DEFAULT_OUTPUT_DIR = "out"
DEFAULT_SEED = 1
DEFAULT_L2LINF_CAP = 10.0
DEFAULT_AUDIT_SLACK = 0.1
DEFAULT_MAX_ITERS = 200_000


def _env_number(name: str, default, cast, minimum=None):
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default

    try:
        value = cast(raw)
    except ValueError:
        logger.warning("Invalid %s value '%s'. Using default %s.", name, raw, default)
        return default

    if minimum is not None and value < minimum:
        logger.warning("%s=%s is below %s. Using default %s.", name, value, minimum, default)
        return default

    return value


def get_output_dir() -> Path:
    return Path(os.environ.get("REGLAB_OUTPUT_DIR", "").strip() or DEFAULT_OUTPUT_DIR)


def get_seed() -> int:
    return _env_number("REGLAB_SEED", DEFAULT_SEED, int, minimum=0)


def get_l2linf_cap() -> float:
    return _env_number("REGLAB_L2LINF_CAP", DEFAULT_L2LINF_CAP, float, minimum=0.0)


def get_audit_slack() -> float:
    return _env_number("REGLAB_AUDIT_SLACK", DEFAULT_AUDIT_SLACK, float, minimum=0.0)


def get_max_iters() -> int:
    return _env_number("REGLAB_MAX_ITERS", DEFAULT_MAX_ITERS, int, minimum=1)


# =============================================================================
# Logging
# =============================================================================

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "[{asctime}] {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["console"],
            "level": os.getenv("CORE_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
        "etl": {
            "handlers": ["console"],
            "level": os.getenv("ETL_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
        "infrastructure": {
            "handlers": ["console"],
            "level": os.getenv("CLI_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
