"""heunfactor: exact-arithmetic verification of apparent-singularity
factorizations of generalized hypergeometric operators, with numeric
monodromy oracles and the exceptional-Jacobi application."""

__version__ = "0.1.0"
