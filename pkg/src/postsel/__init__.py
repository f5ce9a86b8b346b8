"""Postselected quantum query algorithms.

Simulation primitives (qsim), weight-qubit constructions, majority voting
by family elimination, polynomial extraction and compilation, rational
approximants to sign and absolute value, and an exact feasibility oracle
for rational degree.
"""

__version__ = "0.1.0"
