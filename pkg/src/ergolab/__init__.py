"""Laboratory for nonsingular group actions: explicit systems, exact measures,
random walks, Markov operators and invariant-statistic testers."""

__version__ = "0.1.0"
