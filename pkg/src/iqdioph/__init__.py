"""Diophantine approximation counting over imaginary quadratic number fields.

The package combines exact arithmetic in rings of integers of Q(sqrt(-D)),
closed-form and Monte Carlo volumes of the cutoff regions governing the
solution count, an exact lattice-point enumerator with an independent
brute-force oracle, echelon-form and subspace-height machinery, and a
Monte Carlo check of the classical mean value identity for planar lattices.
"""

__version__ = "0.1.0"
