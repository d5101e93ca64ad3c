"""Maximum heights of one and two noncolliding Bessel bridges.

Special functions, lattice sums, moment formulas, the height distribution
and the discrete walk models whose diffusion limits they describe.
"""

from .errors import (
    BridgeHeightsError,
    CapacityError,
    DegeneracyError,
    DomainError,
    PoleProximityError,
    QuadratureError,
    TruncationError,
)
from .height_law import cdf_h1, cdf_h2, density_h1, density_h2, kernel, km_limit, km_ratio
from .lattice_series import DoubleSeriesParams, z_direct, z_tilde
from .moments import MomentQuery, moment, moment_h1, moment_h2_theta, xi2
from .special_fn import TruncationPolicy, gamma_upper, theta, xi_riemann
from .walkers import WalkEnsembleConfig, enumerate_heights, sample_heights, scaling_report

__version__ = "0.1.0"
