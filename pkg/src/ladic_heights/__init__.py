"""Local l-adic height functions on hyperelliptic curves.

Computes the normalized local height at odd primes ell != p with respect to a
trace-zero correspondence, via cluster pictures, reduction graphs, annulus
residue transfer matrices with certified integer rounding, and exact graph
potential theory.
"""

__version__ = "0.1.0"
