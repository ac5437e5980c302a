"""Discrete multistochastic (n,k) Monge-Kantorovich problems.

Pose marginal families, check feasibility with exact certificates, solve
primal/dual transport LPs over rationals, and reproduce the package's
worked examples (xor coupling, density constructions, dual pathologies)
at desk scale.
"""

__version__ = "0.1.0"
