"""Zero-average Gaussian fields on finite graphs and their level-set percolation.

Modules
-------
graphs
    Graph construction, generators, spectral gap, edge boundaries.
field
    Exact covariance of the zero-average field and three sampler routes.
percolation
    The edge-opening rule, cluster statistics, and the bridge oracle.
potential
    Killed Green functions, hitting distributions, capacities, extensions.
martingale
    Set-indexed martingale coefficients and the exploration process.
experiments
    Reproducible Monte Carlo sweeps over sizes and levels.
cli
    Command-line front end (``gffperc``).
"""

from .errors import GffpercError

__version__ = "0.1.0"

__all__ = ["GffpercError", "__version__"]
