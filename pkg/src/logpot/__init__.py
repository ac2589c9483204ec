"""Numerical toolkit for weighted Fekete configurations, determinantal
ensembles, Bernstein-Markov measures, and univariate logarithmic equilibrium
problems, with an empirical harness for large-deviation rate checks."""

from .core import (
    CompactSetSpec,
    DiscreteMeasure,
    NeighborhoodSpec,
    Weight,
    WeightSyntaxError,
    UnknownIdentifierError,
    parse_weight,
    discretize,
    grid_cell_sizes,
    moment,
    moment_vector,
    in_neighborhood,
    weak_star_distance,
)

__version__ = "0.1.0"
