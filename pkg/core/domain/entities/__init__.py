"""
Domain entities for the regularity lab.

Pure data holders validated on construction; numerical work lives in
core.services.
"""
