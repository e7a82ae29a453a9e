"""fslab: a Monte Carlo laboratory for random holomorphic sections on CP^1.

Samples rotation-invariant Gaussian/spherical ensembles of degree-k
polynomial sections, and verifies closed-form statistical laws for their
zeros, critical points, excursion sets, and heat-kernel random Bergman
metrics at desk scale.
"""

__version__ = "0.1.0"
