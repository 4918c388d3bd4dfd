"""
Domain layer for the regularity lab.

Contains pure entities, value objects and errors without numerical services,
I/O or command-line dependencies.
"""
