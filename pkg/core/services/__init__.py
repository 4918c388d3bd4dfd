"""
Numerical services of the regularity lab.

Services hold the algorithms that act on domain entities: parsing, grid
calculus, the variational solver, probes, De Giorgi tools and hedgehogs.
"""
