"""Search for a moving target with noisy, measurement-dependent queries.

Modules: ``noise`` (crossover models), ``infotheory`` (rates and error
exponents), ``geometry`` (circle arithmetic and trajectories), ``coding``
(codebooks and query sets), ``engine`` (search strategies and Monte Carlo)
and ``cli``.
"""

from .kernels import BACKEND
from .noise import NoiseModel

__version__ = "0.1.0"

__all__ = ["BACKEND", "NoiseModel", "__version__"]
