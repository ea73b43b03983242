"""Best constants in weighted Rellich inequalities on cones, with numerical certificates."""

from .constants import (
    arc_mu_navier,
    gamma,
    gamma_bar,
    is_resonant,
    mu_halfspace_navier,
    mu_nonradial,
    mu_radial,
    mu_whole_space,
    spectral_distance_sq,
    sweep,
)
from .errors import (
    DegenerateInput,
    HypothesisError,
    InsufficientSpectrum,
    InvalidInput,
    NoRootError,
    NumericalFailure,
    RellichError,
)
from .geometry import ConeGeometry
from .spectrum import (
    Spectrum,
    SturmLiouvilleGrid,
    arc_spectrum,
    cap_spectrum_numeric,
    find_theta_star,
    first_eigenvalue,
    full_sphere_spectrum,
    half_sphere_spectrum,
)

__version__ = "0.1.0"
