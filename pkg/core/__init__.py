"""Core package: domain model and numerical services of the regularity lab."""
