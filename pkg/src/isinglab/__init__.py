"""Low-temperature 3D Ising interface laboratory.

Exact combinatorics of the Dobrushin interface (walls, pillars, a
straightening map with a full audit trail), MCMC sampling with
reproducible counter-based randomness, and extreme-value statistics of
the interface maximum.
"""

__version__ = "0.1.0"
